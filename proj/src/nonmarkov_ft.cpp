#include "qfluct/nonmarkov_ft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct {
namespace {

constexpr double kAmplitudeFloor = 1e-14;
constexpr double kQuasiFloor = 1e-13;

ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& x) { return u * x * u.adjoint(); }

// <k|X|l> on the system factor of an (d_s d_e)-dimensional operator.
ComplexMatrix system_element(const ComplexMatrix& x, const std::vector<cplx>& k, const std::vector<cplx>& l,
                             std::size_t ds, std::size_t de) {
  ComplexMatrix out(de, de);
  for (std::size_t a = 0; a < ds; ++a) {
    const cplx ka = std::conj(k[a]);
    if (ka == cplx(0.0, 0.0)) continue;
    for (std::size_t b = 0; b < ds; ++b) {
      const cplx c = ka * l[b];
      if (c == cplx(0.0, 0.0)) continue;
      for (std::size_t e = 0; e < de; ++e)
        for (std::size_t f = 0; f < de; ++f) out(e, f) += c * x(a * de + e, b * de + f);
    }
  }
  return out;
}

double real_checked(cplx z, const char* what) {
  if (std::abs(z.imag()) > 1e-10)
    throw ConsistencyError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()));
  return z.real();
}

double log_ratio(double a, double b, const char* what) {
  if (a <= 0.0 || b <= 0.0) throw SupportViolation(std::string(what) + ": zero marginal, entropy production undefined");
  return std::log(a / b);
}

ComplexMatrix dephase(const MeasurementBasis& b, const ComplexMatrix& x) {
  ComplexMatrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < b.dim(); ++k) {
    const ComplexMatrix p = b.projector(k);
    out += p * x * p;
  }
  return out;
}

}  // namespace

DilatedProcess::DilatedProcess(DensityMatrix rho0_s, DensityMatrix rho0_e, std::vector<ComplexMatrix> se_unitaries,
                               std::vector<MeasurementBasis> bases, DensityMatrix gamma0,
                               std::optional<DensityMatrix> rho_tilde0)
    : rho0_s_(std::move(rho0_s)),
      rho0_e_(std::move(rho0_e)),
      us_(std::move(se_unitaries)),
      bases_(std::move(bases)),
      gamma0_(std::move(gamma0)),
      rho_tilde0_(std::move(rho_tilde0)) {
  const std::size_t ds = rho0_s_.dim(), de = rho0_e_.dim(), dse = ds * de;
  if (bases_.size() < 2) throw InvalidArgument("DilatedProcess: need at least two measurement times");
  if (us_.size() + 1 != bases_.size()) throw InvalidArgument("DilatedProcess: need n - 1 unitaries for n bases");
  if (gamma0_.dim() != ds) throw InvalidArgument("DilatedProcess: gamma0 dimension mismatch");
  if (rho_tilde0_ && rho_tilde0_->dim() != ds)
    throw InvalidArgument("DilatedProcess: backward initial state dimension mismatch");
  for (const auto& b : bases_)
    if (b.dim() != ds) throw InvalidArgument("DilatedProcess: basis dimension mismatch");
  for (const auto& u : us_) {
    if (u.rows() != dse || u.cols() != dse) throw InvalidArgument("DilatedProcess: unitary dimension mismatch");
    if (frobenius_distance(u.adjoint() * u, ComplexMatrix::identity(dse)) > 1e-11)
      throw InvalidArgument("DilatedProcess: matrix is not unitary");
  }
}

DilatedProcess DilatedProcess::with_bases(std::vector<MeasurementBasis> bases) const {
  return DilatedProcess(rho0_s_, rho0_e_, us_, std::move(bases), gamma0_, rho_tilde0_);
}

DilatedProcess DilatedProcess::with_rho0(DensityMatrix rho0_s) const {
  return DilatedProcess(std::move(rho0_s), rho0_e_, us_, bases_, gamma0_, rho_tilde0_);
}

ComplexMatrix evolve_system(const DilatedProcess& proc, const ComplexMatrix& rho_s, std::size_t steps, bool dephase_on,
                            bool refresh_env) {
  const std::size_t ds = proc.d_s(), de = proc.d_e(), n = proc.n();
  if (steps > n - 1) throw InvalidArgument("evolve_system: more steps than the process has");
  const ComplexMatrix id_e = ComplexMatrix::identity(de);
  ComplexMatrix x = kron(rho_s, proc.rho0_e().matrix());
  for (std::size_t m = 0; m < steps; ++m) {
    x = conjugate_by(proc.se_unitaries()[m], x);
    const std::size_t t = m + 1;
    if (dephase_on && t + 1 < n) {
      ComplexMatrix y(x.rows(), x.cols());
      for (std::size_t k = 0; k < ds; ++k) {
        const ComplexMatrix p = kron(proc.bases()[t].projector(k), id_e);
        y += p * x * p;
      }
      x = std::move(y);
    }
    if (refresh_env) x = kron(partial_trace(x, {ds, de}, 0), proc.rho0_e().matrix());
  }
  return partial_trace(x, {ds, de}, 0);
}

GammaTrajectory gamma_trajectory(const DilatedProcess& proc) {
  const std::size_t n = proc.n();
  const auto& b = proc.bases();
  GammaTrajectory tr;
  const DensityMatrix g0 = regularize(proc.gamma0());
  for (std::size_t m = 0; m + 1 < n; ++m) {
    tr.gamma_out.push_back(regularize(DensityMatrix::trusted(evolve_system(proc, g0.matrix(), m + 1))));
    tr.gamma_in.push_back(m == 0 ? g0 : tr.gamma_out[m - 1]);
  }
  for (std::size_t m = 0; m + 1 < n; ++m) {
    const ComplexMatrix& gin = tr.gamma_in[m].matrix();
    if (m > 0 || b[0].offdiag_in(gin) <= 1e-12) {
      tr.in.push_back(eigenbasis_in(gin, b[m]));
      tr.in_aligned.push_back(true);
    } else {
      tr.in.push_back(eigenbasis_of(gin));
      tr.in_aligned.push_back(false);
    }
    const ComplexMatrix& gout = tr.gamma_out[m].matrix();
    if (m + 2 < n) {
      tr.out.push_back(eigenbasis_in(gout, b[m + 1]));
      tr.out_aligned.push_back(true);
    } else {
      tr.out.push_back(eigenbasis_of(gout));
      tr.out_aligned.push_back(false);
    }
  }
  return tr;
}

NonMarkovEngine::NonMarkovEngine(const DilatedProcess& proc)
    : proc_(proc), traj_(gamma_trajectory(proc)), rho_tilde0_(proc.rho0_s()) {
  const std::size_t n = proc_.n(), ds = proc_.d_s(), de = proc_.d_e();
  const auto& b = proc_.bases();
  const ComplexMatrix& rho0 = proc_.rho0_s().matrix();
  rho_n_ = evolve_system(proc_, rho0, n - 1);
  rho_tilde0_ = proc_.rho_tilde0_override() ? *proc_.rho_tilde0_override() : DensityMatrix::trusted(rho_n_);
  rho_nm1_ = evolve_system(proc_, rho0, n - 2);
  rho_nm1_m_ = evolve_system(proc_, dephase(b[0], rho0), n - 2);

  const auto diag = [](const MeasurementBasis& basis, const ComplexMatrix& r) {
    std::vector<double> w(basis.dim());
    for (std::size_t x = 0; x < basis.dim(); ++x) w[x] = real_checked(basis.weight(x, r), "basis weight");
    return w;
  };
  p1_ = diag(b[0], rho0);
  pt_ = diag(b[n - 1], rho_tilde0_.matrix());
  pnm1_ = diag(b[n - 2], rho_nm1_);
  pnm1_m_ = diag(b[n - 2], rho_nm1_m_);

  for (std::size_t m = 0; m + 1 < n; ++m) {
    gout_mhalf_.push_back(mat_power(traj_.gamma_out[m].matrix(), -0.5));
    gin_half_.push_back(mat_power(traj_.gamma_in[m].matrix(), 0.5));
  }
  const ComplexMatrix id_e = ComplexMatrix::identity(de);
  for (std::size_t t = 0; t < n; ++t) {
    ComplexMatrix stacked(ds * ds * de, ds * de);
    for (std::size_t x = 0; x < ds; ++x) {
      const ComplexMatrix p = kron(b[t].projector(x), id_e);
      for (std::size_t r = 0; r < ds * de; ++r)
        for (std::size_t c = 0; c < ds * de; ++c) stacked(x * ds * de + r, c) = p(r, c);
    }
    deph_proj_.push_back(std::move(stacked));
  }
}

ComplexMatrix NonMarkovEngine::dephase_system(const ComplexMatrix& x, std::size_t time) const {
  const std::size_t ds = d_s(), dse = ds * d_e();
  const ComplexMatrix& stacked = deph_proj_[time];
  ComplexMatrix out(dse, dse);
  for (std::size_t k = 0; k < ds; ++k) {
    ComplexMatrix p(dse, dse);
    for (std::size_t r = 0; r < dse; ++r)
      for (std::size_t c = 0; c < dse; ++c) p(r, c) = stacked(k * dse + r, c);
    out += p * x * p;
  }
  return out;
}

double NonMarkovEngine::forward_with_dephasing(const OutcomePath& path) const {
  const std::size_t n = this->n(), ds = d_s(), de = d_e();
  if (path.size() != n) throw InvalidArgument("forward_with_dephasing: path has the wrong length");
  for (auto x : path)
    if (x >= ds) throw InvalidArgument("forward_with_dephasing: outcome out of range");
  const auto& b = proc_.bases();
  const ComplexMatrix id_e = ComplexMatrix::identity(de);
  const ComplexMatrix p0 = b[0].projector(path[0]);
  const ComplexMatrix start = kron(p0 * proc_.rho0_s().matrix() * p0, proc_.rho0_e().matrix());
  ComplexMatrix with = start, without = start;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    const std::size_t t = m + 1;
    const ComplexMatrix p = kron(b[t].projector(path[t]), id_e);
    with = conjugate_by(proc_.se_unitaries()[m], with);
    if (interior(t)) with = dephase_system(with, t);
    with = p * with * p;
    without = conjugate_by(proc_.se_unitaries()[m], without);
    without = p * without * p;
  }
  const double pw = real_checked(with.trace(), "forward_with_dephasing");
  const double po = real_checked(without.trace(), "forward_with_dephasing");
  if (std::abs(pw - po) > 1e-12)
    throw ConsistencyError("forward_with_dephasing: dephasing changed the projective joint");
  return pw;
}

cplx NonMarkovEngine::projective_factor(const QuasiOutcome& q) const {
  const auto& b = proc_.bases();
  cplx f = 1.0;
  for (std::size_t m = 0; m + 1 < n(); ++m) {
    const auto& x = b[m].ket(q.x[m]);
    const auto& xn = b[m + 1].ket(q.x[m + 1]);
    const auto& ib = traj_.in[m].basis;
    const auto& kb = traj_.out[m].basis;
    f *= dotc(ib.ket(q.i[m]), x) * dotc(x, ib.ket(q.j[m]));
    f *= dotc(xn, kb.ket(q.kp[m])) * dotc(kb.ket(q.lp[m]), xn);
  }
  return f;
}

cplx NonMarkovEngine::forward_element(const QuasiOutcome& q) const {
  const std::size_t ds = d_s(), de = d_e();
  ComplexMatrix sigma = proc_.rho0_e().matrix();
  for (std::size_t m = 0; m + 1 < n(); ++m) {
    const ComplexMatrix unit = traj_.in[m].basis.unit(q.i[m], q.j[m]);
    ComplexMatrix x = conjugate_by(proc_.se_unitaries()[m], kron(unit, sigma));
    if (interior(m + 1)) x = dephase_system(x, m + 1);
    const auto& kb = traj_.out[m].basis;
    sigma = system_element(x, kb.ket(q.kp[m]), kb.ket(q.lp[m]), ds, de);
  }
  return sigma.trace();
}

cplx NonMarkovEngine::backward_element(const QuasiOutcome& q) const {
  const std::size_t ds = d_s(), de = d_e();
  const auto& b = proc_.bases();
  ComplexMatrix tau = ComplexMatrix::identity(de);
  for (std::size_t m = n() - 1; m-- > 0;) {
    ComplexMatrix a = gout_mhalf_[m] * traj_.out[m].basis.unit(q.kp[m], q.lp[m]) * gout_mhalf_[m];
    if (interior(m + 1)) a = dephase(b[m + 1], a);
    const ComplexMatrix& u = proc_.se_unitaries()[m];
    const ComplexMatrix w = u.adjoint() * kron(a, tau) * u;
    const ComplexMatrix xin = gin_half_[m] * traj_.in[m].basis.unit(q.i[m], q.j[m]) * gin_half_[m];
    ComplexMatrix next(de, de);
    for (std::size_t r = 0; r < ds; ++r)
      for (std::size_t c = 0; c < ds; ++c) {
        const cplx coeff = std::conj(xin(r, c));
        if (coeff == cplx(0.0, 0.0)) continue;
        for (std::size_t e = 0; e < de; ++e)
          for (std::size_t f = 0; f < de; ++f) next(e, f) += coeff * w(r * de + e, c * de + f);
      }
    tau = std::move(next);
  }
  return hs_inner(tau.adjoint(), proc_.rho0_e().matrix());
}

cplx NonMarkovEngine::quasi_forward(const QuasiOutcome& q) const {
  const cplx pf = projective_factor(q);
  if (pf == cplx(0.0, 0.0)) return 0.0;
  return p1_[q.x[0]] * pf * forward_element(q);
}

cplx NonMarkovEngine::quasi_backward(const QuasiOutcome& q) const {
  const cplx pf = projective_factor(q);
  if (pf == cplx(0.0, 0.0)) return 0.0;
  return std::conj(pt_[q.x[n() - 1]] * std::conj(pf) * backward_element(q));
}

double NonMarkovEngine::z_log(std::size_t m, std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return std::log(z_factor(traj_.in[m].values, -1.0, i, j)) + std::log(z_factor(traj_.out[m].values, 1.0, k, l));
}

NonMarkovEPs NonMarkovEngine::eps(const QuasiOutcome& q) const {
  const std::size_t nn = n(), last = nn - 2;
  double head = 0.0;
  for (std::size_t m = 0; m < last; ++m) head += z_log(m, q.i[m], q.j[m], q.kp[m], q.lp[m]);
  const double zl = z_log(last, q.i[last], q.j[last], q.kp[last], q.lp[last]);
  const std::size_t x1 = q.x[0], xm = q.x[nn - 2], xn = q.x[nn - 1];
  NonMarkovEPs e;
  e.r = log_ratio(p1_[x1], pt_[xn], "R") + head + zl;
  e.r1p = log_ratio(p1_[x1], pnm1_[xm], "R'1") + head;
  e.r2 = log_ratio(pnm1_m_[xm], pt_[xn], "R2") + zl;
  return e;
}

ConditionalEnvState NonMarkovEngine::conditional_env_state(const std::vector<std::size_t>& i,
                                                           const std::vector<std::size_t>& j,
                                                           const std::vector<std::size_t>& kp) const {
  const std::size_t h = i.size(), ds = d_s(), de = d_e();
  if (j.size() != h || kp.size() != h || h > n() - 1)
    throw InvalidArgument("conditional_env_state: inconsistent history lengths");
  ConditionalEnvState st{i, j, kp, 0.0, ComplexMatrix(), false};
  ComplexMatrix sigma = proc_.rho0_e().matrix();
  for (std::size_t m = 0; m < h; ++m) {
    if (i[m] >= ds || j[m] >= ds || kp[m] >= ds) throw InvalidArgument("conditional_env_state: index out of range");
    ComplexMatrix x = conjugate_by(proc_.se_unitaries()[m], kron(traj_.in[m].basis.unit(i[m], j[m]), sigma));
    if (interior(m + 1)) x = dephase_system(x, m + 1);
    const auto& k = traj_.out[m].basis.ket(kp[m]);
    sigma = system_element(x, k, k, ds, de);
  }
  st.amplitude = sigma.trace();
  if (std::abs(st.amplitude) > kAmplitudeFloor) {
    st.defined = true;
    st.sigma = sigma * (1.0 / st.amplitude);
  }
  return st;
}

double NonMarkovEngine::tpc_residual() const {
  const std::size_t ds = d_s(), h = n() - 1;
  double worst = 0.0;
  for_each_path(ds, 2 * h, [&](const OutcomePath& ij) {
    std::vector<std::size_t> i(h), j(h);
    double expected = 1.0;
    for (std::size_t m = 0; m < h; ++m) {
      i[m] = ij[2 * m];
      j[m] = ij[2 * m + 1];
      if (i[m] != j[m]) expected = 0.0;
    }
    cplx total = 0.0;
    for_each_path(ds, h, [&](const OutcomePath& kp) { total += conditional_env_state(i, j, kp).amplitude; });
    worst = std::max(worst, std::abs(total - expected));
  });
  return worst;
}

std::optional<ComplexMatrix> NonMarkovEngine::history_rho_tilde1(const std::vector<std::size_t>& i,
                                                                 const std::vector<std::size_t>& kp) const {
  const std::size_t nn = n(), last = nn - 2, ds = d_s(), de = d_e();
  if (i.size() != last || kp.size() != last) throw InvalidArgument("history_rho_tilde1: history must cover n - 2 steps");
  ComplexMatrix sigma = proc_.rho0_e().matrix();
  if (last > 0) {
    const ConditionalEnvState st = conditional_env_state(i, i, kp);
    if (!st.defined) return std::nullopt;
    sigma = st.sigma;
  }
  const ComplexMatrix a = gout_mhalf_[last] * dephase(proc_.bases()[nn - 1], rho_tilde0_.matrix()) * gout_mhalf_[last];
  const ComplexMatrix& u = proc_.se_unitaries()[last];
  const ComplexMatrix w = u.adjoint() * kron(a, ComplexMatrix::identity(de)) * u;
  ComplexMatrix adj(ds, ds);
  for (std::size_t r = 0; r < ds; ++r)
    for (std::size_t c = 0; c < ds; ++c) {
      cplx s = 0.0;
      for (std::size_t e = 0; e < de; ++e)
        for (std::size_t f = 0; f < de; ++f) s += w(r * de + e, c * de + f) * sigma(f, e);
      adj(r, c) = s;
    }
  return gin_half_[last] * adj * gin_half_[last];
}

double NonMarkovEngine::ep_marginal_history(const QuasiOutcome& prefix) const {
  const std::size_t nn = n(), last = nn - 2;
  if (prefix.x.size() != nn - 1 || prefix.i.size() != last || prefix.kp.size() != last ||
      prefix.j.size() != last || prefix.lp.size() != last)
    throw InvalidArgument("ep_marginal_history: prefix must cover n - 1 times and n - 2 steps");
  const auto rt1 = history_rho_tilde1(prefix.i, prefix.kp);
  if (!rt1) throw SupportViolation("ep_marginal_history: history has zero amplitude");
  double head = 0.0;
  for (std::size_t m = 0; m < last; ++m) head += z_log(m, prefix.i[m], prefix.j[m], prefix.kp[m], prefix.lp[m]);
  const double w = real_checked(proc_.bases()[nn - 2].weight(prefix.x[nn - 2], *rt1), "history rho~1");
  return log_ratio(p1_[prefix.x[0]], w, "R1 (history)") + head;
}

double NonMarkovEngine::avg_ep() const {
  cplx s = 0.0;
  for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx) {
    if (std::abs(f) == 0.0) return;
    s += f * eps(q).r;
  });
  return s.real();
}

double NonMarkovEngine::avg_ep_formula() const {
  return relative_entropy(proc_.rho0_s(), traj_.gamma_in[0]) -
         relative_entropy(DensityMatrix::trusted(rho_n_), traj_.gamma_out[n() - 2]);
}

namespace {

struct PrefixKey {
  OutcomePath x;
  std::vector<std::size_t> i, j, kp, lp;
  bool operator<(const PrefixKey& o) const {
    return std::tie(x, i, j, kp, lp) < std::tie(o.x, o.i, o.j, o.kp, o.lp);
  }
};

}  // namespace

double NonMarkovEngine::history_ft_violation() const {
  const std::size_t nn = n(), last = nn - 2;
  std::map<PrefixKey, std::pair<cplx, cplx>> marg;
  for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
    PrefixKey k{OutcomePath(q.x.begin(), q.x.end() - 1),
                {q.i.begin(), q.i.begin() + static_cast<std::ptrdiff_t>(last)},
                {q.j.begin(), q.j.begin() + static_cast<std::ptrdiff_t>(last)},
                {q.kp.begin(), q.kp.begin() + static_cast<std::ptrdiff_t>(last)},
                {q.lp.begin(), q.lp.begin() + static_cast<std::ptrdiff_t>(last)}};
    auto& acc = marg[k];
    acc.first += f;
    acc.second += b;
  });
  double worst = 0.0;
  for (const auto& [k, fb] : marg) {
    if (std::abs(fb.first) <= kQuasiFloor || std::abs(fb.second) <= kQuasiFloor) continue;
    const double r = ep_marginal_history(QuasiOutcome{k.x, k.i, k.j, k.kp, k.lp});
    worst = std::max(worst, relative_violation(fb.first, std::exp(r) * fb.second));
  }
  return worst;
}

double NonMarkovEngine::history_spread() const {
  const std::size_t last = n() - 2, ds = d_s();
  std::vector<ComplexMatrix> seen;
  for_each_path(ds, 2 * last, [&](const OutcomePath& ik) {
    std::vector<std::size_t> i(last), kp(last);
    for (std::size_t m = 0; m < last; ++m) {
      i[m] = ik[2 * m];
      kp[m] = ik[2 * m + 1];
    }
    if (auto r = history_rho_tilde1(i, kp)) seen.push_back(std::move(*r));
  });
  double worst = 0.0;
  for (std::size_t a = 0; a < seen.size(); ++a)
    for (std::size_t b = a + 1; b < seen.size(); ++b) worst = std::max(worst, frobenius_distance(seen[a], seen[b]));
  return worst;
}

double NonMarkovEngine::marginal_ft_failure() const {
  const std::size_t nn = n(), last = nn - 2;
  std::map<PrefixKey, std::pair<cplx, cplx>> marg;
  std::map<PrefixKey, QuasiOutcome> rep;
  for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
    PrefixKey k{{q.x[nn - 2], q.x[nn - 1]}, {q.i[last]}, {q.j[last]}, {q.kp[last]}, {q.lp[last]}};
    auto& acc = marg[k];
    acc.first += f;
    acc.second += b;
    rep.emplace(k, q);
  });
  double worst = 0.0;
  for (const auto& [k, fb] : marg) {
    if (std::abs(fb.first) <= kQuasiFloor || std::abs(fb.second) <= kQuasiFloor) continue;
    const double r2 = eps(rep.at(k)).r2;
    worst = std::max(worst, relative_violation(fb.first, std::exp(r2) * fb.second));
  }
  return worst;
}

NonMarkovReport NonMarkovEngine::report() const {
  NonMarkovReport rep;
  cplx sf = 0.0, sb = 0.0, ar = 0.0, ar1 = 0.0;
  std::map<OutcomePath, cplx> proj;
  for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
    sf += f;
    sb += b;
    proj[q.x] += f;
    if (f == cplx(0.0, 0.0) && b == cplx(0.0, 0.0)) return;
    const NonMarkovEPs e = eps(q);
    ar += f * e.r;
    ar1 += f * e.r1p;
    if (std::abs(f) > kQuasiFloor && std::abs(b) > kQuasiFloor)
      rep.pointwise_ft = std::max(rep.pointwise_ft, relative_violation(f, std::exp(e.r) * b));
  });
  rep.normalization_forward = std::abs(sf - 1.0);
  rep.normalization_backward = std::abs(sb - 1.0);
  for (const auto& [x, f] : proj)
    rep.projective_vs_quasi = std::max(rep.projective_vs_quasi, std::abs(f - forward_with_dephasing(x)));
  rep.avg_r = ar.real();
  rep.avg_r1p = ar1.real();
  rep.rate = rep.avg_r - rep.avg_r1p;
  rep.avg_r_formula = avg_ep_formula();
  const std::size_t nn = n();
  rep.rate_formula =
      relative_entropy(DensityMatrix::trusted(dephase(proc_.bases()[nn - 2], rho_nm1_)), traj_.gamma_in[nn - 2]) -
      relative_entropy(DensityMatrix::trusted(rho_n_), traj_.gamma_out[nn - 2]);
  rep.tpc_residual = tpc_residual();
  rep.history_ft = history_ft_violation();
  rep.history_spread = history_spread();
  rep.marginal_ft_failure = nn >= 3 ? marginal_ft_failure() : 0.0;
  return rep;
}

double forward_with_dephasing(const DilatedProcess& proc, const OutcomePath& path) {
  return NonMarkovEngine(proc).forward_with_dephasing(path);
}
cplx backward_quasi_nonmarkov(const DilatedProcess& proc, const QuasiOutcome& q) {
  return NonMarkovEngine(proc).quasi_backward(q);
}
double ep_nonmarkov_full(const DilatedProcess& proc, const QuasiOutcome& q) { return NonMarkovEngine(proc).eps(q).r; }
double avg_ep(const DilatedProcess& proc) { return NonMarkovEngine(proc).avg_ep(); }
ConditionalEnvState conditional_env_states(const DilatedProcess& proc, const std::vector<std::size_t>& i,
                                           const std::vector<std::size_t>& j, const std::vector<std::size_t>& kp) {
  return NonMarkovEngine(proc).conditional_env_state(i, j, kp);
}
double ep_marginal_history(const DilatedProcess& proc, const QuasiOutcome& prefix) {
  return NonMarkovEngine(proc).ep_marginal_history(prefix);
}
double marginal_ft_failure_scan(const DilatedProcess& proc) {
  if (proc.n() < 3) throw InvalidArgument("marginal_ft_failure_scan: needs n >= 3");
  return NonMarkovEngine(proc).marginal_ft_failure();
}

MemoryAblation memory_ablation_values(const DilatedProcess& proc) {
  const std::size_t steps = proc.n() - 1;
  const DensityMatrix g0 = regularize(proc.gamma0());
  const double head = relative_entropy(proc.rho0_s(), g0);
  const auto tail = [&](bool dephase_on, bool refresh) {
    const auto rho = DensityMatrix::trusted(evolve_system(proc, proc.rho0_s().matrix(), steps, dephase_on, refresh));
    const auto gam = regularize(DensityMatrix::trusted(evolve_system(proc, g0.matrix(), steps, dephase_on, refresh)));
    return relative_entropy(rho, gam);
  };
  return {head - tail(true, false), head - tail(false, false), head - tail(true, true)};
}

MarkovProcess markov_reduction(const DilatedProcess& proc) {
  const std::size_t n = proc.n(), ds = proc.d_s(), de = proc.d_e();
  const GammaTrajectory tr = gamma_trajectory(proc);
  const NonMarkovEngine engine(proc);
  std::vector<Superoperator> chans;
  std::vector<ReferencePair> refs;
  ComplexMatrix x = kron(regularize(proc.gamma0()).matrix(), proc.rho0_e().matrix());
  for (std::size_t m = 0; m + 1 < n; ++m) {
    const ComplexMatrix sigma = partial_trace(x, {ds, de}, 1);
    const ComplexMatrix& u = proc.se_unitaries()[m];
    ComplexMatrix mat(ds * ds, ds * ds);
    for (std::size_t i = 0; i < ds; ++i)
      for (std::size_t j = 0; j < ds; ++j) {
        ComplexMatrix img = partial_trace(conjugate_by(u, kron(ComplexMatrix::unit(ds, i, j), sigma)), {ds, de}, 0);
        if (m + 2 < n) img = dephase(proc.bases()[m + 1], img);
        for (std::size_t k = 0; k < ds; ++k)
          for (std::size_t l = 0; l < ds; ++l) mat(k * ds + l, i * ds + j) = img(k, l);
      }
    chans.push_back(Superoperator(ds, ds, std::move(mat)).checked());
    refs.push_back(ReferencePair{tr.gamma_in[m], tr.gamma_out[m], tr.in[m], tr.out[m]});
    x = conjugate_by(u, x);
    if (m + 2 < n) {
      ComplexMatrix y(x.rows(), x.cols());
      for (std::size_t k = 0; k < ds; ++k) {
        const ComplexMatrix p = kron(proc.bases()[m + 1].projector(k), ComplexMatrix::identity(de));
        y += p * x * p;
      }
      x = std::move(y);
    }
  }
  return MarkovProcess(proc.rho0_s(), std::move(chans), proc.bases(), std::move(refs), engine.rho_tilde0());
}

DilatedProcess align_endpoint_bases(const DilatedProcess& proc) {
  std::vector<MeasurementBasis> b = proc.bases();
  const ComplexMatrix rho_n = evolve_system(proc, proc.rho0_s().matrix(), proc.n() - 1);
  b.front() = eigenbasis_of(proc.rho0_s().matrix()).basis;
  b.back() = eigenbasis_of(rho_n).basis;
  return proc.with_bases(std::move(b));
}

namespace {

ComplexMatrix partial_swap(std::size_t d, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, M_PI / 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dd = d * d;
  ComplexMatrix swap(dd, dd);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) swap(b * d + a, a * d + b) = 1.0;
  const double th = angle(rng);
  ComplexMatrix h(dd, dd);
  for (std::size_t r = 0; r < dd; ++r)
    for (std::size_t c = 0; c < dd; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(r, c) = cplx(re, im);
    }
  h = (h + h.adjoint()) * cplx(0.5);
  const auto eig = herm_eig(h);
  ComplexMatrix phased = eig.vectors;
  for (std::size_t k = 0; k < dd; ++k)
    for (std::size_t r = 0; r < dd; ++r) phased(r, k) *= std::polar(1.0, 0.3 * eig.values[k]);
  const ComplexMatrix small = phased * eig.vectors.adjoint();
  return small * (ComplexMatrix::identity(dd) * cplx(std::cos(th)) + swap * cplx(0.0, std::sin(th)));
}

// V on S (x) E_m embedded into S (x) E_0 (x) ... (x) E_{count-1}, each E of dimension 2.
ComplexMatrix embed_collision(const ComplexMatrix& v, std::size_t ds, std::size_t m, std::size_t count) {
  const std::size_t de = ipow(2, count), dim = ds * de;
  const std::size_t stride = ipow(2, count - 1 - m);
  ComplexMatrix u(dim, dim);
  for (std::size_t s = 0; s < ds; ++s)
    for (std::size_t e = 0; e < de; ++e) {
      const std::size_t em = (e / stride) % 2;
      const std::size_t rest = e - em * stride;
      for (std::size_t s2 = 0; s2 < ds; ++s2)
        for (std::size_t em2 = 0; em2 < 2; ++em2)
          u(s2 * de + rest + em2 * stride, s * de + e) = v(s2 * 2 + em2, s * 2 + em);
    }
  return u;
}

}  // namespace

DilatedProcess random_dilation(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n, Rng& rng,
                               bool random_gamma, bool align) {
  if (n < 2 || d_s < 2) throw InvalidArgument("random_dilation: need n >= 2 and d_s >= 2");
  if (coupling == Coupling::collision) d_e = ipow(2, n - 1);
  if (coupling == Coupling::closed) d_e = 1;
  if (d_e < 1) throw InvalidArgument("random_dilation: d_e must be >= 1");
  if (coupling == Coupling::swap && d_e != d_s) throw InvalidArgument("random_dilation: swap coupling needs d_e = d_s");
  DensityMatrix rho0 = random_density(d_s, rng);
  DensityMatrix rho_e = DensityMatrix::maximally_mixed(1);
  if (coupling == Coupling::collision) {
    ComplexMatrix e = ComplexMatrix::identity(1);
    for (std::size_t m = 0; m + 1 < n; ++m) e = kron(e, random_density(2, rng).matrix());
    rho_e = DensityMatrix::trusted(e);
  } else if (d_e > 1) {
    rho_e = random_density(d_e, rng);
  }
  std::vector<ComplexMatrix> us;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    switch (coupling) {
      case Coupling::random: us.push_back(random_unitary(d_s * d_e, rng)); break;
      case Coupling::swap: us.push_back(partial_swap(d_s, rng)); break;
      case Coupling::product: {
        const ComplexMatrix a = random_unitary(d_s, rng);
        us.push_back(kron(a, random_unitary(d_e, rng)));
        break;
      }
      case Coupling::collision: us.push_back(embed_collision(random_unitary(2 * d_s, rng), d_s, m, n - 1)); break;
      case Coupling::closed: us.push_back(random_unitary(d_s, rng)); break;
    }
  }
  std::vector<MeasurementBasis> bases;
  for (std::size_t t = 0; t < n; ++t) bases.push_back(random_basis(d_s, rng));
  DensityMatrix gamma0 = random_gamma ? random_density(d_s, rng) : DensityMatrix::maximally_mixed(d_s);
  DilatedProcess proc(std::move(rho0), std::move(rho_e), std::move(us), std::move(bases), std::move(gamma0));
  return align ? align_endpoint_bases(proc) : proc;
}

double ep_rate(const DilatedProcess& proc) {
  const NonMarkovEngine engine(proc);
  cplx ar = 0.0;
  engine.for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx) {
    if (f == cplx(0.0, 0.0)) return;
    const NonMarkovEPs e = engine.eps(q);
    ar += f * (e.r - e.r1p);
  });
  return ar.real();
}

std::vector<RateRecord> rate_scan(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n,
                                  std::uint64_t first_seed, std::size_t count) {
  std::vector<RateRecord> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t seed = first_seed + k;
    Rng rng(seed);
    out.push_back({seed, ep_rate(random_dilation(coupling, d_s, d_e, n, rng))});
  }
  return out;
}

std::vector<RateRecord> negative_rate_search(Coupling coupling, std::size_t d_s, std::size_t d_e, std::size_t n,
                                             std::uint64_t first_seed, std::size_t count, double threshold) {
  std::vector<RateRecord> out;
  for (const auto& r : rate_scan(coupling, d_s, d_e, n, first_seed, count))
    if (r.rate < -threshold) out.push_back(r);
  return out;
}

}  // namespace qfluct
