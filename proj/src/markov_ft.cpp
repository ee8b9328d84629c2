#include "qfluct/markov_ft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct {
namespace {

constexpr double kQuasiFloor = 1e-12;

double real_part_checked(cplx z, const char* what) {
  if (std::abs(z.imag()) > 1e-10)
    throw ConsistencyError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()));
  return z.real();
}

std::vector<double> diag_weights(const MeasurementBasis& b, const ComplexMatrix& rho) {
  std::vector<double> w(b.dim());
  for (std::size_t x = 0; x < b.dim(); ++x) w[x] = real_part_checked(b.weight(x, rho), "basis weight");
  return w;
}

double log_ratio(double a, double b, const char* what) {
  if (a <= 0.0 || b <= 0.0) throw SupportViolation(std::string(what) + ": zero marginal, entropy production undefined");
  return std::log(a / b);
}

}  // namespace

MarkovProcess::MarkovProcess(DensityMatrix rho0, std::vector<Superoperator> channels,
                             std::vector<MeasurementBasis> bases, std::vector<ReferencePair> refs,
                             std::optional<DensityMatrix> rho_tilde0)
    : rho0_(std::move(rho0)),
      channels_(std::move(channels)),
      bases_(std::move(bases)),
      refs_(std::move(refs)),
      rho_tilde0_(rho0_) {
  const std::size_t d = rho0_.dim();
  if (bases_.size() < 2) throw InvalidArgument("MarkovProcess: need at least two measurement times");
  if (channels_.size() + 1 != bases_.size() || refs_.size() != channels_.size())
    throw InvalidArgument("MarkovProcess: need n - 1 channels and reference pairs for n bases");
  for (const auto& b : bases_)
    if (b.dim() != d) throw InvalidArgument("MarkovProcess: basis dimension mismatch");
  for (std::size_t m = 0; m < channels_.size(); ++m) {
    const auto& ch = channels_[m];
    if (ch.in_dim() != d || ch.out_dim() != d) throw InvalidArgument("MarkovProcess: channel dimension mismatch");
    if (!is_tp(ch) || !is_cp(ch)) throw InvalidArgument("MarkovProcess: channel is not CPTP");
    if (frobenius_distance(apply(ch, refs_[m].gamma.matrix()), refs_[m].gamma_out.matrix()) > 1e-11)
      throw InvalidArgument("MarkovProcess: reference pair does not match its channel");
  }
  if (rho_tilde0) {
    if (rho_tilde0->dim() != d) throw InvalidArgument("MarkovProcess: backward initial state dimension mismatch");
    rho_tilde0_ = std::move(*rho_tilde0);
  } else {
    ComplexMatrix rt = rho0_.matrix();
    for (const auto& ch : channels_) rt = apply(ch, rt);
    rho_tilde0_ = DensityMatrix::trusted(rt);
  }
}

MarkovProcess MarkovProcess::with_gammas(DensityMatrix rho0, std::vector<Superoperator> channels,
                                         std::vector<MeasurementBasis> bases,
                                         const std::vector<DensityMatrix>& gammas) {
  if (gammas.size() != channels.size()) throw InvalidArgument("MarkovProcess: one gamma per channel required");
  std::vector<ReferencePair> refs;
  for (std::size_t m = 0; m < channels.size(); ++m) refs.push_back(make_reference_pair(channels[m], gammas[m]));
  return MarkovProcess(std::move(rho0), std::move(channels), std::move(bases), std::move(refs));
}

MarkovEngine::MarkovEngine(const MarkovProcess& proc) : proc_(proc) {
  const std::size_t n = proc_.n(), d = proc_.dim(), dd = d * d;
  const auto& b = proc_.bases();
  for (std::size_t m = 0; m + 1 < n; ++m) petz_.push_back(petz_recovery(proc_.channels()[m], proc_.refs()[m].gamma));

  const ComplexMatrix& rt = proc_.rho_tilde0().matrix();
  rho_tilde1_ = apply(petz_[n - 2], apply(dephasing_map(b[n - 1]), rt));
  rho_nm1_ = proc_.rho0().matrix();
  for (std::size_t m = 0; m + 2 < n; ++m)
    rho_nm1_ = apply(proc_.channels()[m], apply(dephasing_map(b[m]), rho_nm1_));

  p1_ = diag_weights(b[0], proc_.rho0().matrix());
  pt_ = diag_weights(b[n - 1], rt);
  pt1_ = diag_weights(b[n - 2], rho_tilde1_);
  pnm1_ = diag_weights(b[n - 2], rho_nm1_);

  for (std::size_t m = 0; m + 1 < n; ++m) {
    const Superoperator& ch = proc_.channels()[m];
    const ReferencePair& ref = proc_.refs()[m];
    const MeasurementBasis& ib = ref.in.basis;
    const MeasurementBasis& kb = ref.out.basis;

    std::vector<double> f(dd), r(dd);
    for (std::size_t x = 0; x < d; ++x) {
      const ComplexMatrix img = apply(ch, b[m].projector(x));
      for (std::size_t y = 0; y < d; ++y) f[y * d + x] = real_part_checked(b[m + 1].weight(y, img), "transition");
    }
    for (std::size_t y = 0; y < d; ++y) {
      const ComplexMatrix img = apply(petz_[m], b[m + 1].projector(y));
      for (std::size_t x = 0; x < d; ++x) r[y * d + x] = real_part_checked(b[m].weight(x, img), "Petz transition");
    }
    fwd_.push_back(std::move(f));
    bwd_.push_back(std::move(r));

    std::vector<cplx> in(d * dd), out(d * dd);
    for (std::size_t x = 0; x < d; ++x) {
      const auto& ket = b[m].ket(x);
      const auto& ket_next = b[m + 1].ket(x);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          in[x * dd + i * d + j] = dotc(ib.ket(i), ket) * dotc(ket, ib.ket(j));
          out[x * dd + i * d + j] = dotc(ket_next, kb.ket(i)) * dotc(kb.ket(j), ket_next);
        }
    }
    in_.push_back(std::move(in));
    out_.push_back(std::move(out));

    std::vector<cplx> ce(dd * dd), pe(dd * dd);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const ComplexMatrix img = apply(ch, ib.unit(i, j));
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t l = 0; l < d; ++l) ce[(k * d + l) * dd + i * d + j] = sandwich(kb.ket(k), img, kb.ket(l));
      }
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l) {
        const ComplexMatrix img = apply(petz_[m], kb.unit(k, l));
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) pe[(i * d + j) * dd + k * d + l] = sandwich(ib.ket(i), img, ib.ket(j));
      }
    chan_.push_back(std::move(ce));
    petz_el_.push_back(std::move(pe));

    std::vector<double> zi(dd), zo(dd);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        zi[i * d + j] = std::log(z_factor(ref.in.values, -1.0, i, j));
        zo[i * d + j] = std::log(z_factor(ref.out.values, 1.0, i, j));
      }
    zin_.push_back(std::move(zi));
    zout_.push_back(std::move(zo));
  }
}

void MarkovEngine::validate(const QuasiOutcome& q) const {
  const std::size_t steps = n() - 1, d = dim();
  if (q.x.size() != n() || q.i.size() != steps || q.j.size() != steps || q.kp.size() != steps ||
      q.lp.size() != steps)
    throw InvalidArgument("QuasiOutcome: index lists have the wrong length");
  const auto in_range = [d](const std::vector<std::size_t>& v) {
    return std::all_of(v.begin(), v.end(), [d](std::size_t k) { return k < d; });
  };
  if (!in_range(q.x) || !in_range(q.i) || !in_range(q.j) || !in_range(q.kp) || !in_range(q.lp))
    throw InvalidArgument("QuasiOutcome: index out of range");
}

double MarkovEngine::forward_joint(const OutcomePath& path) const {
  if (path.size() != n()) throw InvalidArgument("forward_joint: path has the wrong length");
  const std::size_t d = dim();
  double p = p1_.at(path[0]);
  for (std::size_t m = 0; m + 1 < n(); ++m) p *= fwd_[m].at(path[m + 1] * d + path[m]);
  return p;
}

double MarkovEngine::backward_joint(const OutcomePath& path) const {
  if (path.size() != n()) throw InvalidArgument("backward_joint: path has the wrong length");
  const std::size_t d = dim();
  double p = pt_.at(path[n() - 1]);
  for (std::size_t m = 0; m + 1 < n(); ++m) p *= bwd_[m].at(path[m + 1] * d + path[m]);
  return p;
}

cplx MarkovEngine::step_forward(std::size_t m, std::size_t x, std::size_t xn, std::size_t i, std::size_t j,
                                std::size_t k, std::size_t l) const {
  const std::size_t d = dim(), dd = d2();
  return in_[m][x * dd + i * d + j] * chan_[m][(k * d + l) * dd + i * d + j] * out_[m][xn * dd + k * d + l];
}

cplx MarkovEngine::step_backward(std::size_t m, std::size_t x, std::size_t xn, std::size_t i, std::size_t j,
                                 std::size_t k, std::size_t l) const {
  const std::size_t d = dim(), dd = d2();
  return std::conj(in_[m][x * dd + i * d + j]) * petz_el_[m][(i * d + j) * dd + k * d + l] *
         std::conj(out_[m][xn * dd + k * d + l]);
}

double MarkovEngine::z_log(std::size_t m, std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  const std::size_t d = dim();
  return zin_[m][i * d + j] + zout_[m][k * d + l];
}

cplx MarkovEngine::quasi_forward(const QuasiOutcome& q) const {
  validate(q);
  cplx w = p1_[q.x[0]];
  for (std::size_t m = 0; m + 1 < n(); ++m) w *= step_forward(m, q.x[m], q.x[m + 1], q.i[m], q.j[m], q.kp[m], q.lp[m]);
  return w;
}

cplx MarkovEngine::quasi_backward(const QuasiOutcome& q) const {
  validate(q);
  cplx w = pt_[q.x[n() - 1]];
  for (std::size_t m = 0; m + 1 < n(); ++m) w *= step_backward(m, q.x[m], q.x[m + 1], q.i[m], q.j[m], q.kp[m], q.lp[m]);
  return std::conj(w);
}

QuasiEPs MarkovEngine::eps(const QuasiOutcome& q) const {
  validate(q);
  const std::size_t nn = n(), last = nn - 2;
  double zsum_head = 0.0;
  for (std::size_t m = 0; m < last; ++m) zsum_head += z_log(m, q.i[m], q.j[m], q.kp[m], q.lp[m]);
  const double zlast = z_log(last, q.i[last], q.j[last], q.kp[last], q.lp[last]);
  const std::size_t x1 = q.x[0], xm = q.x[nn - 2], xn = q.x[nn - 1];
  QuasiEPs e;
  e.r = log_ratio(p1_[x1], pt_[xn], "R") + zsum_head + zlast;
  e.r1 = log_ratio(p1_[x1], pt1_[xm], "R1") + zsum_head;
  e.r2 = log_ratio(pnm1_[xm], pt_[xn], "R2") + zlast;
  e.r1p = log_ratio(p1_[x1], pnm1_[xm], "R'1") + zsum_head;
  e.r2p = log_ratio(pt1_[xm], pt_[xn], "R'2") + zlast;
  return e;
}

MarkovReport MarkovEngine::suite() const {
  MarkovReport rep;
  const std::size_t nn = n(), d = dim();
  cplx sum_f = 0.0, sum_b = 0.0, e_r = 0.0, e_rr1 = 0.0, avg_r = 0.0, avg_r1 = 0.0;
  std::map<OutcomePath, std::pair<cplx, cplx>> marg;
  const auto defined = [&](const OutcomePath& x) {
    return p1_[x[0]] > 0.0 && pt_[x[nn - 1]] > 0.0 && pt1_[x[nn - 2]] > 0.0 && pnm1_[x[nn - 2]] > 0.0;
  };
  for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
    sum_f += f;
    sum_b += b;
    auto& acc = marg[q.x];
    acc.first += f;
    acc.second += b;
    if (!defined(q.x)) {
      if (std::abs(f) > kQuasiFloor) throw ConsistencyError("markov suite: forward weight on an undefined EP");
      return;
    }
    const QuasiEPs e = eps(q);
    e_r += f * std::exp(-e.r);
    e_rr1 += f * std::exp(-(e.r - e.r1));
    avg_r += f * e.r;
    avg_r1 += f * e.r1;
    rep.chain_r1p_r2 = std::max(rep.chain_r1p_r2, std::abs(e.r1p + e.r2 - e.r));
    rep.chain_r1_r2p = std::max(rep.chain_r1_r2p, std::abs(e.r1 + e.r2p - e.r));
    const cplx eb = std::exp(e.r) * b;
    if (std::max(std::abs(f), std::abs(eb)) > kQuasiFloor) {
      rep.pointwise_ft = std::max(rep.pointwise_ft, relative_violation(f, eb));
      ++rep.pointwise_checked;
    }
  });
  rep.normalization_forward = std::abs(sum_f - 1.0);
  rep.normalization_backward = std::abs(sum_b - 1.0);
  for (const auto& [x, fb] : marg) {
    rep.marginalization_forward = std::max(rep.marginalization_forward, std::abs(fb.first - forward_joint(x)));
    rep.marginalization_backward = std::max(rep.marginalization_backward, std::abs(fb.second - backward_joint(x)));
    rep.marginal_imag = std::max({rep.marginal_imag, std::abs(fb.first.imag()), std::abs(fb.second.imag())});
  }
  rep.exp_minus_r = e_r.real();
  rep.exp_minus_r_r1 = e_rr1.real();
  rep.avg_r = avg_r.real();
  rep.avg_r1 = avg_r1.real();
  rep.rate = rep.avg_r - rep.avg_r1;

  // <R'2> under the last step alone, started from rho~1.
  const std::size_t last = nn - 2;
  cplx avg_r2p = 0.0;
  for (std::size_t x = 0; x < d; ++x)
    for (std::size_t xn = 0; xn < d; ++xn) {
      if (pt1_[x] <= 0.0 || pt_[xn] <= 0.0) continue;
      const double base = std::log(pt1_[x] / pt_[xn]);
      for_each_path(d, 4, [&](const OutcomePath& idx) {
        const cplx w = pt1_[x] * step_forward(last, x, xn, idx[0], idx[1], idx[2], idx[3]);
        avg_r2p += w * (base + z_log(last, idx[0], idx[1], idx[2], idx[3]));
      });
    }
  rep.avg_r2p = avg_r2p.real();
  rep.rate_gap = rep.rate - rep.avg_r2p;
  return rep;
}

double forward_joint_markov(const MarkovProcess& proc, const OutcomePath& path) {
  return MarkovEngine(proc).forward_joint(path);
}
cplx quasi_forward(const MarkovProcess& proc, const QuasiOutcome& q) { return MarkovEngine(proc).quasi_forward(q); }
cplx quasi_backward(const MarkovProcess& proc, const QuasiOutcome& q) { return MarkovEngine(proc).quasi_backward(q); }
double ep_quasi_full(const MarkovProcess& proc, const QuasiOutcome& q) { return MarkovEngine(proc).eps(q).r; }
QuasiEPs ep_quasi_marginals(const MarkovProcess& proc, const QuasiOutcome& q) { return MarkovEngine(proc).eps(q); }
MarkovReport markov_ft_suite(const MarkovProcess& proc) { return MarkovEngine(proc).suite(); }

MarkovProcess random_markov_process(std::size_t d, std::size_t n, Rng& rng, bool random_gamma) {
  DensityMatrix rho0 = random_density(d, rng);
  std::vector<Superoperator> chans;
  std::vector<MeasurementBasis> bases;
  std::vector<DensityMatrix> gammas;
  for (std::size_t m = 0; m + 1 < n; ++m) chans.push_back(random_channel(d, 2, rng));
  for (std::size_t t = 0; t < n; ++t) bases.push_back(random_basis(d, rng));
  for (std::size_t m = 0; m + 1 < n; ++m)
    gammas.push_back(random_gamma ? random_density(d, rng) : DensityMatrix::maximally_mixed(d));
  return MarkovProcess::with_gammas(std::move(rho0), std::move(chans), std::move(bases), gammas);
}

MarkovProcess from_closed(const ClosedProcess& proc) {
  std::vector<Superoperator> chans;
  std::vector<DensityMatrix> gammas;
  for (const auto& u : proc.unitaries()) {
    chans.push_back(unitary_channel(u));
    gammas.push_back(DensityMatrix::maximally_mixed(proc.dim()));
  }
  return MarkovProcess::with_gammas(proc.rho0(), std::move(chans), proc.bases(), gammas);
}

}  // namespace qfluct
