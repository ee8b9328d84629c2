#include "qfluct/closed_ft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/linalg.hpp"
#include "qfluct/opstate.hpp"

namespace qfluct {
namespace {

constexpr double kImagTol = 1e-10;
constexpr double kCluster = 1e-9;
constexpr double kBackwardFloor = 1e-14;

double real_checked(cplx z, const char* what) {
  if (std::abs(z.imag()) > kImagTol)
    throw ConsistencyError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()));
  return z.real();
}

// (Pi^{y}_to | S | Pi^{x}_from) for all x, y.
std::vector<double> transition_table(const Superoperator& s, const MeasurementBasis& from,
                                     const MeasurementBasis& to) {
  const std::size_t d = from.dim();
  std::vector<double> t(d * d);
  for (std::size_t x = 0; x < d; ++x) {
    const OperatorVector image = vectorize(apply(s, from.projector(x)));
    for (std::size_t y = 0; y < d; ++y)
      t[y * d + x] = real_checked(inner(vectorize(to.projector(y)), image), "transition element");
  }
  return t;
}

std::vector<double> diag_weights(const MeasurementBasis& b, const ComplexMatrix& rho) {
  std::vector<double> w(b.dim());
  for (std::size_t x = 0; x < b.dim(); ++x) w[x] = real_checked(b.weight(x, rho), "basis weight");
  return w;
}

bool matches(const OutcomePath& path, const std::vector<std::size_t>& times, const OutcomePath& kept) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (path[times[k]] != kept[k]) return false;
  return true;
}

OutcomePath project(const OutcomePath& path, const std::vector<std::size_t>& times) {
  OutcomePath key(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) key[k] = path[times[k]];
  return key;
}

std::vector<EPAtom> cluster(std::vector<EPAtom> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const EPAtom& a, const EPAtom& b) { return a.value < b.value; });
  std::vector<EPAtom> atoms;
  for (const auto& r : records) {
    if (!atoms.empty() && r.value - atoms.back().value <= kCluster) {
      atoms.back().weight += r.weight;
    } else {
      atoms.push_back(r);
    }
  }
  return atoms;
}

void validate_path(const OutcomePath& path, std::size_t len, std::size_t d) {
  if (path.size() != len) throw InvalidArgument("outcome path has the wrong length");
  for (auto x : path)
    if (x >= d) throw InvalidArgument("outcome index out of range");
}

}  // namespace

ClosedProcess::ClosedProcess(DensityMatrix rho0, std::vector<ComplexMatrix> unitaries,
                             std::vector<MeasurementBasis> bases)
    : rho0_(std::move(rho0)), unitaries_(std::move(unitaries)), bases_(std::move(bases)) {
  const std::size_t d = rho0_.dim();
  if (bases_.size() < 2) throw InvalidArgument("ClosedProcess: need at least two measurement times");
  if (unitaries_.size() + 1 != bases_.size())
    throw InvalidArgument("ClosedProcess: need exactly n - 1 unitaries for n bases");
  for (const auto& b : bases_)
    if (b.dim() != d) throw InvalidArgument("ClosedProcess: basis dimension mismatch");
  for (const auto& u : unitaries_) {
    if (u.rows() != d || u.cols() != d) throw InvalidArgument("ClosedProcess: unitary dimension mismatch");
    if (frobenius_distance(u.adjoint() * u, ComplexMatrix::identity(d)) > 1e-11)
      throw InvalidArgument("ClosedProcess: matrix is not unitary");
  }
}

double EPDistribution::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

ClosedEngine::ClosedEngine(const ClosedProcess& proc)
    : proc_(proc), rho_tilde0_(proc.rho0()) {
  const std::size_t n = proc_.n();
  const auto& b = proc_.bases();
  std::vector<Superoperator> step, back, deph;
  for (const auto& u : proc_.unitaries()) {
    step.push_back(unitary_channel(u));
    back.push_back(unitary_channel(u.adjoint()));
  }
  for (const auto& basis : b) deph.push_back(dephasing_map(basis));

  ComplexMatrix rt = proc_.rho0().matrix();
  for (const auto& s : step) rt = apply(s, rt);
  rho_tilde0_ = DensityMatrix::trusted(rt);

  rho_tilde1_ = apply(back[n - 2], apply(deph[n - 1], rt));
  rho_nm1_ = proc_.rho0().matrix();
  for (std::size_t m = 0; m + 2 < n; ++m) rho_nm1_ = apply(step[m], apply(deph[m], rho_nm1_));

  p1_ = diag_weights(b[0], proc_.rho0().matrix());
  pt_ = diag_weights(b[n - 1], rt);
  pt1_ = diag_weights(b[n - 2], rho_tilde1_);
  pnm1_ = diag_weights(b[n - 2], rho_nm1_);
  for (std::size_t m = 0; m + 1 < n; ++m) {
    fwd_.push_back(transition_table(step[m], b[m], b[m + 1]));
    // bwd_[m][x_{m+1} * d + x_m] = (Pi^{x_m} | U_m^{-1} | Pi^{x_{m+1}})
    const auto t = transition_table(back[m], b[m + 1], b[m]);
    const std::size_t d = proc_.dim();
    std::vector<double> r(d * d);
    for (std::size_t x = 0; x < d; ++x)
      for (std::size_t y = 0; y < d; ++y) r[y * d + x] = t[x * d + y];
    bwd_.push_back(std::move(r));
  }
}

double ClosedEngine::forward_joint(const OutcomePath& path) const {
  const std::size_t d = dim();
  validate_path(path, n(), d);
  double p = p1_[path[0]];
  for (std::size_t m = 0; m + 1 < n(); ++m) p *= fwd_[m][path[m + 1] * d + path[m]];
  return p;
}

double ClosedEngine::backward_joint(const OutcomePath& path) const {
  const std::size_t d = dim();
  validate_path(path, n(), d);
  double p = pt_[path[n() - 1]];
  for (std::size_t m = 0; m + 1 < n(); ++m) p *= bwd_[m][path[m + 1] * d + path[m]];
  return p;
}

double ClosedEngine::ep_full(const OutcomePath& path) const {
  validate_path(path, n(), dim());
  const double a = p1_[path.front()], b = pt_[path.back()];
  if (a <= 0.0 || b <= 0.0) throw SupportViolation("ep_full: zero marginal, entropy production undefined");
  return std::log(a / b);
}

double ClosedEngine::ep_marginal_last(const OutcomePath& prefix) const {
  validate_path(prefix, n() - 1, dim());
  const double a = p1_[prefix.front()], b = pt1_[prefix.back()];
  if (a <= 0.0 || b <= 0.0) throw SupportViolation("ep_marginal_last: zero marginal");
  return std::log(a / b);
}

double ClosedEngine::ep_marginal_first(const OutcomePath& suffix) const {
  validate_path(suffix, 2, dim());
  const double a = pnm1_[suffix[0]], b = pt_[suffix[1]];
  if (a <= 0.0 || b <= 0.0) throw SupportViolation("ep_marginal_first: zero marginal");
  return std::log(a / b);
}

double ClosedEngine::forward_marginal(const std::vector<std::size_t>& times,
                                      const OutcomePath& kept) const {
  double s = 0.0;
  for_each_path(dim(), n(), [&](const OutcomePath& p) {
    if (matches(p, times, kept)) s += forward_joint(p);
  });
  return s;
}

double ClosedEngine::backward_marginal(const std::vector<std::size_t>& times,
                                       const OutcomePath& kept) const {
  double s = 0.0;
  for_each_path(dim(), n(), [&](const OutcomePath& p) {
    if (matches(p, times, kept)) s += backward_joint(p);
  });
  return s;
}

double ClosedEngine::ep_marginal_ratio(const std::vector<std::size_t>& times,
                                       const OutcomePath& kept) const {
  if (times.size() != kept.size() || !std::is_sorted(times.begin(), times.end()))
    throw InvalidArgument("ep_marginal_ratio: times must be increasing and match the kept outcomes");
  for (auto t : times)
    if (t >= n()) throw InvalidArgument("ep_marginal_ratio: time out of range");
  const double f = forward_marginal(times, kept), b = backward_marginal(times, kept);
  if (f <= 0.0 || b <= 0.0) throw SupportViolation("ep_marginal_ratio: zero marginal");
  return std::log(f / b);
}

std::vector<std::size_t> ClosedEngine::kept_times(EPKind kind) const {
  std::vector<std::size_t> t;
  switch (kind) {
    case EPKind::full:
      t.resize(n());
      std::iota(t.begin(), t.end(), 0);
      break;
    case EPKind::R1:
      t.resize(n() - 1);
      std::iota(t.begin(), t.end(), 0);
      break;
    case EPKind::R2:
      t = {n() - 2, n() - 1};
      break;
  }
  return t;
}

bool ClosedEngine::ep_defined(EPKind kind, const OutcomePath& key) const {
  switch (kind) {
    case EPKind::full: return p1_[key.front()] > 0.0 && pt_[key.back()] > 0.0;
    case EPKind::R1: return p1_[key.front()] > 0.0 && pt1_[key.back()] > 0.0;
    case EPKind::R2: return pnm1_[key[0]] > 0.0 && pt_[key[1]] > 0.0;
  }
  return false;
}

double ClosedEngine::ep_of(EPKind kind, const OutcomePath& key) const {
  switch (kind) {
    case EPKind::full: return ep_full(key);
    case EPKind::R1: return ep_marginal_last(key);
    case EPKind::R2: return ep_marginal_first(key);
  }
  return 0.0;
}

namespace {

struct MarginalTable {
  std::map<OutcomePath, double> forward;
  std::map<OutcomePath, double> backward;
};

MarginalTable marginals(const ClosedEngine& e, const std::vector<std::size_t>& times) {
  MarginalTable t;
  for_each_path(e.dim(), e.n(), [&](const OutcomePath& p) {
    const OutcomePath key = project(p, times);
    t.forward[key] += e.forward_joint(p);
    t.backward[key] += e.backward_joint(p);
  });
  return t;
}

}  // namespace

EPDistribution ClosedEngine::ep_distribution(EPKind kind, Direction direction) const {
  const auto table = marginals(*this, kept_times(kind));
  std::vector<EPAtom> records;
  for (const auto& [key, wf] : table.forward) {
    if (!ep_defined(kind, key)) continue;
    const double r = ep_of(kind, key);
    if (direction == Direction::forward) {
      records.push_back({r, wf});
    } else {
      records.push_back({-r, table.backward.at(key)});
    }
  }
  return {direction, cluster(std::move(records))};
}

FTCheck ClosedEngine::detailed_ft_check(EPKind kind) const {
  FTCheck out;
  const auto table = marginals(*this, kept_times(kind));
  for (const auto& [key, wf] : table.forward) {
    const double wb = table.backward.at(key);
    if (wb <= kBackwardFloor) {
      if (wf > kBackwardFloor) out.support_mismatch.push_back(key);
      continue;
    }
    if (!ep_defined(kind, key)) {
      out.support_mismatch.push_back(key);
      continue;
    }
    const double r = ep_of(kind, key);
    out.max_violation = std::max(out.max_violation, relative_violation(wf, std::exp(r) * wb));
    ++out.checked;
  }

  const auto fwd = ep_distribution(kind, Direction::forward);
  const auto bwd = ep_distribution(kind, Direction::backward);
  for (const auto& atom : fwd.atoms) {
    double wb = 0.0;
    for (const auto& b : bwd.atoms)
      if (std::abs(b.value + atom.value) <= kCluster) wb += b.weight;
    if (atom.weight <= kBackwardFloor && wb <= kBackwardFloor) continue;
    out.distribution_violation =
        std::max(out.distribution_violation, relative_violation(atom.weight, std::exp(atom.value) * wb));
  }
  return out;
}

IntegralFT ClosedEngine::integral_ft_and_rate() const {
  IntegralFT out;
  const std::size_t nn = n();
  for_each_path(dim(), nn, [&](const OutcomePath& p) {
    const double w = forward_joint(p);
    if (w == 0.0) return;
    const OutcomePath prefix(p.begin(), p.end() - 1);
    const OutcomePath suffix{p[nn - 2], p[nn - 1]};
    if (!ep_defined(EPKind::full, p) || !ep_defined(EPKind::R1, prefix) ||
        !ep_defined(EPKind::R2, suffix)) {
      if (w > kBackwardFloor) throw ConsistencyError("integral_ft_and_rate: forward weight on an undefined EP");
      return;
    }
    const double r = ep_full(p), r1 = ep_marginal_last(prefix), r2 = ep_marginal_first(suffix);
    out.exp_minus_r += w * std::exp(-r);
    out.exp_minus_r_r1 += w * std::exp(-(r - r1));
    out.avg_r += w * r;
    out.avg_r1 += w * r1;
    out.avg_r2 += w * r2;
  });
  out.rate = out.avg_r - out.avg_r1;
  return out;
}

double forward_joint(const ClosedProcess& proc, const OutcomePath& path) {
  return ClosedEngine(proc).forward_joint(path);
}
double backward_joint(const ClosedProcess& proc, const OutcomePath& path) {
  return ClosedEngine(proc).backward_joint(path);
}
DensityMatrix backward_initial(const ClosedProcess& proc) { return ClosedEngine(proc).backward_initial(); }
double ep_full(const ClosedProcess& proc, const OutcomePath& path) { return ClosedEngine(proc).ep_full(path); }
double ep_marginal_last(const ClosedProcess& proc, const OutcomePath& prefix) {
  return ClosedEngine(proc).ep_marginal_last(prefix);
}
double ep_marginal_first(const ClosedProcess& proc, const OutcomePath& suffix) {
  return ClosedEngine(proc).ep_marginal_first(suffix);
}
EPDistribution ep_distribution(const ClosedProcess& proc, EPKind kind, Direction direction) {
  return ClosedEngine(proc).ep_distribution(kind, direction);
}
FTCheck detailed_ft_check(const ClosedProcess& proc, EPKind kind) {
  return ClosedEngine(proc).detailed_ft_check(kind);
}
IntegralFT integral_ft_and_rate(const ClosedProcess& proc) { return ClosedEngine(proc).integral_ft_and_rate(); }

ClosedProcess drop_measurement(const ClosedProcess& proc, std::size_t time) {
  if (time == 0 || time + 1 >= proc.n()) throw InvalidArgument("drop_measurement: time must be interior");
  std::vector<ComplexMatrix> us;
  std::vector<MeasurementBasis> bs;
  for (std::size_t t = 0; t < proc.n(); ++t)
    if (t != time) bs.push_back(proc.bases()[t]);
  for (std::size_t m = 0; m + 1 < proc.n(); ++m) {
    if (m == time - 1) {
      us.push_back(proc.unitaries()[m + 1] * proc.unitaries()[m]);
      ++m;
    } else {
      us.push_back(proc.unitaries()[m]);
    }
  }
  return ClosedProcess(proc.rho0(), std::move(us), std::move(bs));
}

double kolmogorov_check(const ClosedProcess& proc) {
  if (proc.n() < 3) throw InvalidArgument("kolmogorov_check: needs n >= 3");
  const ClosedEngine full(proc);
  double worst = 0.0;
  for (std::size_t t = 1; t + 1 < proc.n(); ++t) {
    const ClosedEngine reduced(drop_measurement(proc, t));
    for_each_path(proc.dim(), proc.n() - 1, [&](const OutcomePath& y) {
      double summed = 0.0;
      OutcomePath x(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(t));
      x.push_back(0);
      x.insert(x.end(), y.begin() + static_cast<std::ptrdiff_t>(t), y.end());
      for (std::size_t v = 0; v < proc.dim(); ++v) {
        x[t] = v;
        summed += full.forward_joint(x);
      }
      worst = std::max(worst, std::abs(summed - reduced.forward_joint(y)));
    });
  }
  return worst;
}

ClosedProcess random_closed_process(std::size_t d, std::size_t n, Rng& rng) {
  DensityMatrix rho0 = random_density(d, rng);
  std::vector<ComplexMatrix> us;
  std::vector<MeasurementBasis> bs;
  for (std::size_t m = 0; m + 1 < n; ++m) us.push_back(random_unitary(d, rng));
  for (std::size_t t = 0; t < n; ++t) bs.push_back(random_basis(d, rng));
  return ClosedProcess(std::move(rho0), std::move(us), std::move(bs));
}

ClosedProcess random_permutation_process(std::size_t d, std::size_t n, Rng& rng) {
  DensityMatrix rho0 = random_density(d, rng);
  std::vector<MeasurementBasis> bs;
  for (std::size_t t = 0; t < n; ++t) bs.push_back(random_basis(d, rng));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::vector<ComplexMatrix> us;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ph(d);
    for (auto& p : ph) p = phase(rng);
    us.push_back(basis_permuting_unitary(bs[m], bs[m + 1], perm, ph));
  }
  return ClosedProcess(std::move(rho0), std::move(us), std::move(bs));
}

}  // namespace qfluct
