#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qfluct/closed_ft.hpp"
#include "qfluct/errors.hpp"
#include "qfluct/markov_ft.hpp"
#include "qfluct/nonmarkov_ft.hpp"

namespace qfluct::harness {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

const std::vector<std::string>& experiment_names();

// Keys (one `key = value` per line, `#` starts a comment):
//   seed, ensemble, d (comma list), n (comma list), d_s, d_e,
//   gamma = maximally_mixed | random,
//   coupling = random | swap | product | collision | closed,
//   construction = haar | permutation, threads (0 = hardware)
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::size_t ensemble = 1;
  std::vector<std::size_t> d{2};
  std::vector<std::size_t> n{3};
  std::size_t d_s = 2;
  std::size_t d_e = 2;
  bool random_gamma = false;
  Coupling coupling = Coupling::random;
  bool permutation = false;
  std::size_t threads = 0;
  std::string out;

  void validate() const;
  // Instance i uses seed + i and, in closed and Markov experiments,
  // d[i % |d|] and n[(i / |d|) % |n|].
  std::uint64_t instance_seed(std::size_t i) const { return seed + i; }
  std::size_t instance_d(std::size_t i) const { return d[i % d.size()]; }
  std::size_t instance_n(std::size_t i) const { return n[(i / d.size()) % n.size()]; }
};

ExperimentConfig default_config(const std::string& experiment);
// Overlays `text` on the defaults of `experiment`. Throws ConfigError.
ExperimentConfig parse_config(const std::string& experiment, const std::string& text);
ExperimentConfig load_config(const std::string& experiment, const std::string& path);
Coupling parse_coupling(const std::string& name);
std::string coupling_name(Coupling c);

enum class Check { equal, at_most, at_least, report };

struct ReportRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string quantity;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  Check check = Check::report;
  bool pass = true;
};

// |value - target| <= tol
ReportRow row_equal(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                    double tol);
// value <= target + tol
ReportRow row_at_most(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                      double tol = 0.0);
// value >= target - tol
ReportRow row_at_least(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                       double tol = 0.0);
ReportRow row_report(const std::string& exp, std::uint64_t seed, const std::string& q, double value);

std::string csv_header();
std::string format_row(const ReportRow& row);
std::string format_csv(const std::vector<ReportRow>& rows);
bool all_pass(const std::vector<ReportRow>& rows);

// Independent oracles for the projective joints.
// Eigen-ensemble of rho0, pure-state propagation, Born projections.
double oracle_closed_prob(const ClosedProcess& proc, const OutcomePath& path);
// Same with Kraus operators read off each channel's Choi matrix, summed over
// Kraus index sequences.
double oracle_markov_prob(const MarkovProcess& proc, const OutcomePath& path);

// Max over (i, j, k', l') of |(Pi_k'l'|N|Pi_ij)* - (Pi_ij|R|Pi_k'l') Z^{gamma^-1}_ij Z^{N(gamma)}_k'l'|
// in the canonical eigenbases of gamma and N(gamma).
double petz_transpose_residual(const Superoperator& n, const DensityMatrix& gamma);

// fn(i) for i in [0, count), results in index order; the first exception is rethrown.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, std::size_t threads, Fn&& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::vector<ReportRow> run_closed_ft(const ExperimentConfig& cfg);
std::vector<ReportRow> run_markov_ft(const ExperimentConfig& cfg);
std::vector<ReportRow> run_nonmarkov_ft(const ExperimentConfig& cfg);
std::vector<ReportRow> run_ep_rate_scan(const ExperimentConfig& cfg);
std::vector<ReportRow> run_memory_ablation(const ExperimentConfig& cfg);
std::vector<ReportRow> run_kolmogorov(const ExperimentConfig& cfg);
std::vector<ReportRow> run_oracle_check(const ExperimentConfig& cfg);
// Dispatches on cfg.experiment.
std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg);

}  // namespace qfluct::harness
