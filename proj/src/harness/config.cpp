#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "qfluct/harness.hpp"

namespace qfluct::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_uint<std::size_t>(key, trim(item)));
  if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
  return out;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"closed-ft",       "markov-ft", "nonmarkov-ft", "ep-rate-scan",
                                              "memory-ablation", "kolmogorov", "oracle-check"};
  return names;
}

Coupling parse_coupling(const std::string& name) {
  static const std::map<std::string, Coupling> table{{"random", Coupling::random},
                                                     {"swap", Coupling::swap},
                                                     {"product", Coupling::product},
                                                     {"collision", Coupling::collision},
                                                     {"closed", Coupling::closed}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("config: unknown coupling '" + name + "'");
  return it->second;
}

std::string coupling_name(Coupling c) {
  switch (c) {
    case Coupling::random: return "random";
    case Coupling::swap: return "swap";
    case Coupling::product: return "product";
    case Coupling::collision: return "collision";
    case Coupling::closed: return "closed";
  }
  return "random";
}

void ExperimentConfig::validate() const {
  bool known = false;
  for (const auto& e : experiment_names()) known = known || e == experiment;
  if (!known) throw ConfigError("unknown experiment '" + experiment + "'");
  if (ensemble < 1) throw ConfigError("config: ensemble must be >= 1");
  if (d.empty() || n.empty()) throw ConfigError("config: d and n must be nonempty");
  for (auto v : d)
    if (v < 2) throw ConfigError("config: d must be >= 2");
  for (auto v : n)
    if (v < 2) throw ConfigError("config: n must be >= 2");
  if (experiment == "kolmogorov")
    for (auto v : n)
      if (v < 3) throw ConfigError("config: kolmogorov needs n >= 3");
  if (d_s < 2) throw ConfigError("config: d_s must be >= 2");
  if (d_e < 1) throw ConfigError("config: d_e must be >= 1");
  if (coupling == Coupling::swap && d_e != d_s) throw ConfigError("config: swap coupling needs d_e = d_s");
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "closed-ft") {
    c.ensemble = 200;
    c.d = {2, 3};
    c.n = {2, 3, 4};
  } else if (experiment == "markov-ft") {
    c.ensemble = 100;
  } else if (experiment == "nonmarkov-ft") {
    c.ensemble = 50;
  } else if (experiment == "ep-rate-scan") {
    c.ensemble = 1000;
    c.coupling = Coupling::swap;
  } else if (experiment == "memory-ablation") {
    c.ensemble = 20;
  } else if (experiment == "kolmogorov") {
    c.ensemble = 100;
    c.d = {2, 3};
    c.n = {3, 4};
    c.permutation = true;
  } else if (experiment == "oracle-check") {
    c.ensemble = 100;
    c.d = {2, 3};
    c.n = {2, 3, 4};
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& experiment, const std::string& text) {
  ExperimentConfig c = default_config(experiment);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (key == "seed") c.seed = parse_uint<std::uint64_t>(key, val);
    else if (key == "ensemble") c.ensemble = parse_uint<std::size_t>(key, val);
    else if (key == "d") c.d = parse_list(key, val);
    else if (key == "n") c.n = parse_list(key, val);
    else if (key == "d_s") c.d_s = parse_uint<std::size_t>(key, val);
    else if (key == "d_e") c.d_e = parse_uint<std::size_t>(key, val);
    else if (key == "threads") c.threads = parse_uint<std::size_t>(key, val);
    else if (key == "coupling") c.coupling = parse_coupling(val);
    else if (key == "gamma") {
      if (val == "maximally_mixed") c.random_gamma = false;
      else if (val == "random") c.random_gamma = true;
      else throw ConfigError("config: gamma must be maximally_mixed or random");
    } else if (key == "construction") {
      if (val == "haar") c.permutation = false;
      else if (val == "permutation") c.permutation = true;
      else throw ConfigError("config: construction must be haar or permutation");
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& experiment, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(experiment, ss.str());
}

}  // namespace qfluct::harness
