#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qfluct/harness.hpp"
#include "qfluct/kernels.hpp"

namespace h = qfluct::harness;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("qfluct");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("QFLUCT_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"qfluct: fluctuation-theorem checks by exact enumeration"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  for (const auto& name : h::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output path (default stdout)");
    sub->add_option("--seed", seed, "overrides the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  h::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? h::default_config(experiment) : h::load_config(experiment, config_path);
    if (seed) cfg.seed = *seed;
    cfg.out = out_path;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }

  spdlog::info("{}: seed={} ensemble={} kernels={}", experiment, cfg.seed, cfg.ensemble, qfluct::kernels::active().name);
  std::vector<h::ReportRow> rows;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    rows = h::run_experiment(cfg);
  } catch (const std::exception& e) {
    spdlog::error("{} failed: {}", experiment, e.what());
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = h::all_pass(rows);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      spdlog::warn("FAIL {} seed={} {} = {}", r.experiment, r.seed, r.quantity, r.value);
    }
  spdlog::info("{}: {} rows, {} failed, {:.2f}s", experiment, rows.size(), failed, secs);

  const std::string csv = h::format_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      spdlog::error("cannot write '{}'", out_path);
      return 2;
    }
    f << csv;
  }
  return ok ? 0 : 1;
}
