#pragma once

#include <cstddef>
#include <vector>

#include "qfluct/channels.hpp"
#include "qfluct/enumerate.hpp"
#include "qfluct/matrix.hpp"

namespace qfluct {

// n measurement times, n - 1 unitaries between them, one basis per time.
class ClosedProcess {
 public:
  ClosedProcess(DensityMatrix rho0, std::vector<ComplexMatrix> unitaries,
                std::vector<MeasurementBasis> bases);

  std::size_t n() const { return bases_.size(); }
  std::size_t dim() const { return rho0_.dim(); }
  const DensityMatrix& rho0() const { return rho0_; }
  const std::vector<ComplexMatrix>& unitaries() const { return unitaries_; }
  const std::vector<MeasurementBasis>& bases() const { return bases_; }

 private:
  DensityMatrix rho0_;
  std::vector<ComplexMatrix> unitaries_;
  std::vector<MeasurementBasis> bases_;
};

enum class EPKind { full, R1, R2 };
enum class Direction { forward, backward };

struct EPAtom {
  double value;
  double weight;
};

struct EPDistribution {
  Direction direction;
  std::vector<EPAtom> atoms;  // sorted by value, clustered to 1e-9
  double total_weight() const;
};

struct FTCheck {
  double max_violation = 0.0;           // pointwise, relative
  double distribution_violation = 0.0;  // p(R) vs e^R p^tr(-R), relative
  std::size_t checked = 0;
  // Paths (or marginal keys) where exactly one direction carries weight.
  std::vector<OutcomePath> support_mismatch;
};

struct IntegralFT {
  double exp_minus_r = 0.0;     // <e^{-R}>
  double exp_minus_r_r1 = 0.0;  // <e^{-(R - R1)}>
  double avg_r = 0.0;
  double avg_r1 = 0.0;
  double avg_r2 = 0.0;
  double rate = 0.0;  // <R> - <R1>
};

// Precomputed forward/backward tables for one process; all queries are pure.
class ClosedEngine {
 public:
  explicit ClosedEngine(const ClosedProcess& proc);

  const ClosedProcess& process() const { return proc_; }
  std::size_t n() const { return proc_.n(); }
  std::size_t dim() const { return proc_.dim(); }

  double forward_joint(const OutcomePath& path) const;
  double backward_joint(const OutcomePath& path) const;
  const DensityMatrix& backward_initial() const { return rho_tilde0_; }
  const ComplexMatrix& rho_tilde1() const { return rho_tilde1_; }
  const ComplexMatrix& rho_before_last() const { return rho_nm1_; }

  double ep_full(const OutcomePath& path) const;
  double ep_marginal_last(const OutcomePath& prefix) const;   // x_1..x_{n-1}
  double ep_marginal_first(const OutcomePath& suffix) const;  // x_{n-1}, x_n
  // ln of summed forward over summed backward joints, keeping `times` (0-based, increasing).
  double ep_marginal_ratio(const std::vector<std::size_t>& times, const OutcomePath& kept) const;

  double forward_marginal(const std::vector<std::size_t>& times, const OutcomePath& kept) const;
  double backward_marginal(const std::vector<std::size_t>& times, const OutcomePath& kept) const;

  EPDistribution ep_distribution(EPKind kind, Direction direction) const;
  FTCheck detailed_ft_check(EPKind kind) const;
  IntegralFT integral_ft_and_rate() const;

 private:
  double first_weight(std::size_t x) const { return p1_[x]; }
  double last_weight(std::size_t x) const { return pt_[x]; }
  bool ep_defined(EPKind kind, const OutcomePath& key) const;
  double ep_of(EPKind kind, const OutcomePath& key) const;
  std::vector<std::size_t> kept_times(EPKind kind) const;

  ClosedProcess proc_;
  DensityMatrix rho_tilde0_;
  ComplexMatrix rho_tilde1_;
  ComplexMatrix rho_nm1_;
  std::vector<double> p1_;  // (Pi^x_1 | rho0)
  std::vector<double> pt_;  // (Pi^x_n | rho~0)
  std::vector<double> pt1_;   // (Pi^x_{n-1} | rho~1)
  std::vector<double> pnm1_;  // (Pi^x_{n-1} | rho_{n-1})
  // fwd_[m][x' * d + x] = (Pi^{x'}_{m+1} | U_m | Pi^x_m); bwd_ with U_m^{-1} and roles swapped.
  std::vector<std::vector<double>> fwd_;
  std::vector<std::vector<double>> bwd_;
};

double forward_joint(const ClosedProcess& proc, const OutcomePath& path);
double backward_joint(const ClosedProcess& proc, const OutcomePath& path);
DensityMatrix backward_initial(const ClosedProcess& proc);
double ep_full(const ClosedProcess& proc, const OutcomePath& path);
double ep_marginal_last(const ClosedProcess& proc, const OutcomePath& prefix);
double ep_marginal_first(const ClosedProcess& proc, const OutcomePath& suffix);
EPDistribution ep_distribution(const ClosedProcess& proc, EPKind kind, Direction direction);
FTCheck detailed_ft_check(const ClosedProcess& proc, EPKind kind);
IntegralFT integral_ft_and_rate(const ClosedProcess& proc);

// Max over interior times t and paths of |sum_{x_t} P(x) - P'(x without x_t)|, where
// P' is the process with U_t U_{t-1} merged and no measurement at t. Needs n >= 3.
double kolmogorov_check(const ClosedProcess& proc);
// The process with the measurement at `time` (0-based, interior) removed.
ClosedProcess drop_measurement(const ClosedProcess& proc, std::size_t time);

ClosedProcess random_closed_process(std::size_t d, std::size_t n, Rng& rng);
// Unitaries map each basis onto the next up to a permutation and phases.
ClosedProcess random_permutation_process(std::size_t d, std::size_t n, Rng& rng);

}  // namespace qfluct
