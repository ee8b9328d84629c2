#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qfluct/channels.hpp"
#include "qfluct/closed_ft.hpp"
#include "qfluct/enumerate.hpp"
#include "qfluct/opstate.hpp"

namespace qfluct {

// n times, channels N_1..N_{n-1} (all d -> d), one basis per time and one
// reference pair per step. The backward initial state defaults to the
// unmeasured forward output N_{n-1} o ... o N_1 (rho0).
class MarkovProcess {
 public:
  MarkovProcess(DensityMatrix rho0, std::vector<Superoperator> channels,
                std::vector<MeasurementBasis> bases, std::vector<ReferencePair> refs,
                std::optional<DensityMatrix> rho_tilde0 = std::nullopt);
  // Reference pairs built from the given gammas with canonical eigenbases.
  static MarkovProcess with_gammas(DensityMatrix rho0, std::vector<Superoperator> channels,
                                   std::vector<MeasurementBasis> bases,
                                   const std::vector<DensityMatrix>& gammas);

  std::size_t n() const { return bases_.size(); }
  std::size_t dim() const { return rho0_.dim(); }
  const DensityMatrix& rho0() const { return rho0_; }
  const std::vector<Superoperator>& channels() const { return channels_; }
  const std::vector<MeasurementBasis>& bases() const { return bases_; }
  const std::vector<ReferencePair>& refs() const { return refs_; }
  const DensityMatrix& rho_tilde0() const { return rho_tilde0_; }

 private:
  DensityMatrix rho0_;
  std::vector<Superoperator> channels_;
  std::vector<MeasurementBasis> bases_;
  std::vector<ReferencePair> refs_;
  DensityMatrix rho_tilde0_;
};

// Projective outcomes x_1..x_n plus, per step m, input indices (i_m, j_m) in
// the gamma_m eigenbasis and output indices (k'_m, l'_m) in the N_m(gamma_m) eigenbasis.
struct QuasiOutcome {
  OutcomePath x;
  std::vector<std::size_t> i, j, kp, lp;
};

struct QuasiEPs {
  double r = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r1p = 0.0;  // R'1: forward prefix against rho_{n-1}
  double r2p = 0.0;  // R'2: last step started from rho~1
};

struct MarkovReport {
  double normalization_forward = 0.0;  // |sum q_f - 1|
  double normalization_backward = 0.0;
  double marginalization_forward = 0.0;  // max_x |sum_q q_f - P_f(x)|
  double marginalization_backward = 0.0;
  double marginal_imag = 0.0;  // max |Im| of the projective marginals
  double pointwise_ft = 0.0;
  std::size_t pointwise_checked = 0;
  double chain_r1p_r2 = 0.0;  // max |R'1 + R2 - R|
  double chain_r1_r2p = 0.0;  // max |R1 + R'2 - R|
  double exp_minus_r = 0.0;
  double exp_minus_r_r1 = 0.0;
  double avg_r = 0.0;
  double avg_r1 = 0.0;
  double avg_r2p = 0.0;
  double rate = 0.0;      // <R> - <R1>
  double rate_gap = 0.0;  // <R> - <R1> - <R'2>
};

class MarkovEngine {
 public:
  explicit MarkovEngine(const MarkovProcess& proc);

  const MarkovProcess& process() const { return proc_; }
  std::size_t n() const { return proc_.n(); }
  std::size_t dim() const { return proc_.dim(); }
  const std::vector<Superoperator>& petz() const { return petz_; }
  const ComplexMatrix& rho_tilde1() const { return rho_tilde1_; }
  const ComplexMatrix& rho_before_last() const { return rho_nm1_; }

  double forward_joint(const OutcomePath& path) const;
  // (Pi^{x_1}|R_1|Pi^{x_2}) ... (Pi^{x_{n-1}}|R_{n-1}|Pi^{x_n}) (Pi^{x_n}|rho~0)
  double backward_joint(const OutcomePath& path) const;
  cplx quasi_forward(const QuasiOutcome& q) const;
  cplx quasi_backward(const QuasiOutcome& q) const;
  QuasiEPs eps(const QuasiOutcome& q) const;

  // Calls fn(q, forward, backward) over the full quasi lattice.
  template <typename Fn>
  void for_each_quasi(Fn&& fn) const;

  MarkovReport suite() const;

 private:
  std::size_t d2() const { return dim() * dim(); }
  void validate(const QuasiOutcome& q) const;
  cplx step_forward(std::size_t m, std::size_t x, std::size_t xn, std::size_t i, std::size_t j,
                    std::size_t k, std::size_t l) const;
  cplx step_backward(std::size_t m, std::size_t x, std::size_t xn, std::size_t i, std::size_t j,
                     std::size_t k, std::size_t l) const;
  double z_log(std::size_t m, std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

  MarkovProcess proc_;
  std::vector<Superoperator> petz_;
  ComplexMatrix rho_tilde1_;
  ComplexMatrix rho_nm1_;
  std::vector<double> p1_, pt_, pt1_, pnm1_;
  std::vector<std::vector<double>> fwd_, bwd_;  // projective transitions, [x_{m+1} * d + x_m]
  std::vector<std::vector<cplx>> in_;           // [x * d2 + i * d + j] = <i|x><x|j>
  std::vector<std::vector<cplx>> out_;          // [x * d2 + k * d + l] = <x|k><l|x>
  std::vector<std::vector<cplx>> chan_;         // [(k*d+l) * d2 + i*d+j] = (Pi_kl|N|Pi_ij)
  std::vector<std::vector<cplx>> petz_el_;      // [(i*d+j) * d2 + k*d+l] = (Pi_ij|R|Pi_kl)
  std::vector<std::vector<double>> zin_, zout_;  // ln Z^{gamma^-1}_ij, ln Z^{N(gamma)}_kl
};

template <typename Fn>
void MarkovEngine::for_each_quasi(Fn&& fn) const {
  const std::size_t d = dim(), steps = n() - 1;
  QuasiOutcome q;
  q.i.resize(steps);
  q.j.resize(steps);
  q.kp.resize(steps);
  q.lp.resize(steps);
  for_each_path(d, n(), [&](const OutcomePath& x) {
    q.x = x;
    for_each_path(d, 4 * steps, [&](const OutcomePath& idx) {
      for (std::size_t m = 0; m < steps; ++m) {
        q.i[m] = idx[4 * m];
        q.j[m] = idx[4 * m + 1];
        q.kp[m] = idx[4 * m + 2];
        q.lp[m] = idx[4 * m + 3];
      }
      fn(static_cast<const QuasiOutcome&>(q), quasi_forward(q), quasi_backward(q));
    });
  });
}

double forward_joint_markov(const MarkovProcess& proc, const OutcomePath& path);
cplx quasi_forward(const MarkovProcess& proc, const QuasiOutcome& q);
cplx quasi_backward(const MarkovProcess& proc, const QuasiOutcome& q);
double ep_quasi_full(const MarkovProcess& proc, const QuasiOutcome& q);
QuasiEPs ep_quasi_marginals(const MarkovProcess& proc, const QuasiOutcome& q);
MarkovReport markov_ft_suite(const MarkovProcess& proc);

// Random rho0, Stinespring channels (env dimension 2), random bases; gamma_m = I/d
// unless random_gamma.
MarkovProcess random_markov_process(std::size_t d, std::size_t n, Rng& rng, bool random_gamma = false);
MarkovProcess from_closed(const ClosedProcess& proc);

}  // namespace qfluct
