#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qfluct/channels.hpp"
#include "qfluct/enumerate.hpp"
#include "qfluct/markov_ft.hpp"

namespace qfluct {

// System (d_s) coupled to an environment (d_e >= 1) through n - 1 unitaries on
// the joint space, system factor first. Measurements act on the system only.
class DilatedProcess {
 public:
  DilatedProcess(DensityMatrix rho0_s, DensityMatrix rho0_e, std::vector<ComplexMatrix> se_unitaries,
                 std::vector<MeasurementBasis> bases, DensityMatrix gamma0,
                 std::optional<DensityMatrix> rho_tilde0 = std::nullopt);

  std::size_t n() const { return bases_.size(); }
  std::size_t d_s() const { return rho0_s_.dim(); }
  std::size_t d_e() const { return rho0_e_.dim(); }
  const DensityMatrix& rho0_s() const { return rho0_s_; }
  const DensityMatrix& rho0_e() const { return rho0_e_; }
  const std::vector<ComplexMatrix>& se_unitaries() const { return us_; }
  const std::vector<MeasurementBasis>& bases() const { return bases_; }
  const DensityMatrix& gamma0() const { return gamma0_; }
  const std::optional<DensityMatrix>& rho_tilde0_override() const { return rho_tilde0_; }

  DilatedProcess with_bases(std::vector<MeasurementBasis> bases) const;
  DilatedProcess with_rho0(DensityMatrix rho0_s) const;

 private:
  DensityMatrix rho0_s_;
  DensityMatrix rho0_e_;
  std::vector<ComplexMatrix> us_;
  std::vector<MeasurementBasis> bases_;
  DensityMatrix gamma0_;
  std::optional<DensityMatrix> rho_tilde0_;
};

// Reference states per step m (0-based, step m maps time m to m + 1):
// gamma_in[m] is gamma0 for m = 0 and gamma_out[m - 1] otherwise; gamma_out[m]
// is gamma0 evolved through steps 0..m with system dephasing at every interior
// time. in/out hold the eigenbases used for the quasi indices of step m:
// interior times use their measurement basis; time 0 uses its measurement basis
// when that basis diagonalizes gamma0; the final output uses the canonical
// eigenbasis of gamma_out[n - 2].
struct GammaTrajectory {
  std::vector<DensityMatrix> gamma_in;
  std::vector<DensityMatrix> gamma_out;
  std::vector<Eigenbasis> in;
  std::vector<Eigenbasis> out;
  std::vector<bool> in_aligned;   // in basis is the measurement basis of time m
  std::vector<bool> out_aligned;  // out basis is the measurement basis of time m + 1
};

GammaTrajectory gamma_trajectory(const DilatedProcess& proc);

// Tr_E of (rho_s (x) rho_E) evolved through steps 0..steps-1, dephasing the
// system at every interior time reached; refresh_env resets the environment
// to rho_E after every step.
ComplexMatrix evolve_system(const DilatedProcess& proc, const ComplexMatrix& rho_s, std::size_t steps,
                            bool dephase = true, bool refresh_env = false);

// History of the first h steps: input matrix units (i_m, j_m), output index k'_m = l'_m.
struct ConditionalEnvState {
  std::vector<std::size_t> i, j, kp;
  cplx amplitude = 0.0;  // trace of the unnormalized environment operator
  ComplexMatrix sigma;   // environment operator divided by the amplitude
  bool defined = false;  // false when |amplitude| <= 1e-14
};

struct NonMarkovEPs {
  double r = 0.0;
  double r1p = 0.0;  // (n-1)-time sub-process EP, backward from rho_{n-1}
  double r2 = 0.0;   // last-step marginal EP from the dephased rho_{n-1}
};

struct MemoryAblation {
  double dephased = 0.0;     // (a) intermediate measurements incorporated
  double undephased = 0.0;   // (b) no intermediate measurements
  double refreshed = 0.0;    // (c) environment reset after every step
};

struct NonMarkovReport {
  double normalization_forward = 0.0;
  double normalization_backward = 0.0;
  double avg_r = 0.0;
  double avg_r_formula = 0.0;
  double avg_r1p = 0.0;
  double rate = 0.0;          // <R> - <R'1>
  double rate_formula = 0.0;  // S(M rho_{n-1} || gamma'_{n-1}) - S(rho_n || gamma'_n)
  double pointwise_ft = 0.0;  // full process
  double projective_vs_quasi = 0.0;  // max |sum_q q_f - forward_with_dephasing|
  double tpc_residual = 0.0;
  double history_ft = 0.0;
  double history_spread = 0.0;  // max Frobenius distance between history-dependent rho~1
  double marginal_ft_failure = 0.0;
};

class NonMarkovEngine {
 public:
  explicit NonMarkovEngine(const DilatedProcess& proc);

  const DilatedProcess& process() const { return proc_; }
  const GammaTrajectory& trajectory() const { return traj_; }
  std::size_t n() const { return proc_.n(); }
  std::size_t d_s() const { return proc_.d_s(); }
  std::size_t d_e() const { return proc_.d_e(); }
  const ComplexMatrix& rho_n() const { return rho_n_; }
  const DensityMatrix& rho_tilde0() const { return rho_tilde0_; }
  const ComplexMatrix& rho_before_last() const { return rho_nm1_; }

  // Projective joint with measurement projections and dephasing on the SE register.
  double forward_with_dephasing(const OutcomePath& path) const;
  cplx quasi_forward(const QuasiOutcome& q) const;
  cplx quasi_backward(const QuasiOutcome& q) const;
  NonMarkovEPs eps(const QuasiOutcome& q) const;

  // Visits every quasi outcome with a nonzero projective factor, calling
  // fn(q, forward, backward).
  template <typename Fn>
  void for_each_quasi(Fn&& fn) const;

  ConditionalEnvState conditional_env_state(const std::vector<std::size_t>& i, const std::vector<std::size_t>& j,
                                            const std::vector<std::size_t>& kp) const;
  // max over (i, j) histories of all n - 1 steps of |sum_{k'} amplitude - prod delta_ij|
  double tpc_residual() const;
  // rho~1 for a history of the first n - 2 steps (diagonal inputs i, outputs k').
  std::optional<ComplexMatrix> history_rho_tilde1(const std::vector<std::size_t>& i,
                                                  const std::vector<std::size_t>& kp) const;
  // R1 for a prefix outcome: x_1..x_{n-1} and the first n - 2 steps' indices.
  double ep_marginal_history(const QuasiOutcome& prefix) const;

  double avg_ep() const;
  double avg_ep_formula() const;
  double history_ft_violation() const;
  double history_spread() const;
  double marginal_ft_failure() const;
  NonMarkovReport report() const;

 private:
  ComplexMatrix dephase_system(const ComplexMatrix& x, std::size_t time) const;
  bool interior(std::size_t time) const { return time > 0 && time + 1 < n(); }
  cplx projective_factor(const QuasiOutcome& q) const;
  cplx forward_element(const QuasiOutcome& q) const;
  cplx backward_element(const QuasiOutcome& q) const;
  double z_log(std::size_t m, std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

  DilatedProcess proc_;
  GammaTrajectory traj_;
  ComplexMatrix rho_n_;
  DensityMatrix rho_tilde0_;
  ComplexMatrix rho_nm1_;    // steps 0..n-3 from rho0 (no M at time 0)
  ComplexMatrix rho_nm1_m_;  // same from M_0(rho0)
  std::vector<double> p1_, pt_, pnm1_, pnm1_m_;
  std::vector<ComplexMatrix> gout_mhalf_, gin_half_;
  std::vector<ComplexMatrix> deph_proj_;  // per time: kron(Pi^x, I_E) stacked by x
};

template <typename Fn>
void NonMarkovEngine::for_each_quasi(Fn&& fn) const {
  const std::size_t d = d_s(), steps = n() - 1;
  QuasiOutcome q;
  q.i.assign(steps, 0);
  q.j.assign(steps, 0);
  q.kp.assign(steps, 0);
  q.lp.assign(steps, 0);
  // Free index slots: 2 per unaligned input, 2 per unaligned output.
  std::size_t free = 0;
  for (std::size_t m = 0; m < steps; ++m) free += (traj_.in_aligned[m] ? 0 : 2) + (traj_.out_aligned[m] ? 0 : 2);
  for_each_path(d, n(), [&](const OutcomePath& x) {
    q.x = x;
    for_each_path(d, free, [&](const OutcomePath& idx) {
      std::size_t c = 0;
      for (std::size_t m = 0; m < steps; ++m) {
        if (traj_.in_aligned[m]) {
          q.i[m] = q.j[m] = x[m];
        } else {
          q.i[m] = idx[c++];
          q.j[m] = idx[c++];
        }
        if (traj_.out_aligned[m]) {
          q.kp[m] = q.lp[m] = x[m + 1];
        } else {
          q.kp[m] = idx[c++];
          q.lp[m] = idx[c++];
        }
      }
      fn(static_cast<const QuasiOutcome&>(q), quasi_forward(q), quasi_backward(q));
    });
  });
}

double forward_with_dephasing(const DilatedProcess& proc, const OutcomePath& path);
cplx backward_quasi_nonmarkov(const DilatedProcess& proc, const QuasiOutcome& q);
double ep_nonmarkov_full(const DilatedProcess& proc, const QuasiOutcome& q);
double avg_ep(const DilatedProcess& proc);
ConditionalEnvState conditional_env_states(const DilatedProcess& proc, const std::vector<std::size_t>& i,
                                           const std::vector<std::size_t>& j,
                                           const std::vector<std::size_t>& kp);
double ep_marginal_history(const DilatedProcess& proc, const QuasiOutcome& prefix);
double marginal_ft_failure_scan(const DilatedProcess& proc);

// <R> - <R'1> by enumeration.
double ep_rate(const DilatedProcess& proc);

struct RateRecord {
  std::uint64_t seed;
  double rate;
};
enum class Coupling { random, swap, product, collision, closed };
// Entropy production rate <R> - <R'1> for seeds first_seed .. first_seed + count - 1,
// one random dilation per seed (d_e is ignored for collision and closed couplings).
std::vector<RateRecord> rate_scan(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n,
                                  std::uint64_t first_seed, std::size_t count);
// The subset of rate_scan with rate < -threshold.
std::vector<RateRecord> negative_rate_search(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n,
                                             std::uint64_t first_seed, std::size_t count,
                                             double threshold = 1e-6);

// Three averages for the memory comparison, each S(rho0||gamma0) - S(rho_n||gamma'_n)
// under the corresponding dynamics.
MemoryAblation memory_ablation_values(const DilatedProcess& proc);

// Markov process with channels X -> [M_{m+1}] Tr_E U_m (X (x) sigma_m) U_m^dagger,
// sigma_m the environment marginal before step m, reference pairs from the gamma
// trajectory and rho~0 = rho_n. Exact for dilations that never correlate S and E
// (product and collision couplings).
MarkovProcess markov_reduction(const DilatedProcess& proc);

// Endpoint bases replaced by the canonical eigenbases of rho0 and rho_n.
DilatedProcess align_endpoint_bases(const DilatedProcess& proc);

DilatedProcess random_dilation(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n, Rng& rng,
                               bool random_gamma = false, bool align = true);

}  // namespace qfluct
