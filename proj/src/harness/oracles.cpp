#include <cmath>
#include <functional>

#include "qfluct/harness.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct::harness {
namespace {

using Ket = std::vector<cplx>;

Ket project(const MeasurementBasis& b, std::size_t x, const Ket& psi) {
  const Ket& k = b.ket(x);
  const cplx amp = dotc(k, psi);
  Ket out(k.size());
  for (std::size_t r = 0; r < k.size(); ++r) out[r] = amp * k[r];
  return out;
}

double norm2(const Ket& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

// Sum over the eigen-ensemble of rho0 of p_a * branch_weight(projected |v_a>).
template <typename Fn>
double over_ensemble(const DensityMatrix& rho0, const MeasurementBasis& b0, std::size_t x0, Fn&& branch_weight) {
  const auto eig = herm_eig(rho0.matrix());
  double total = 0.0;
  for (std::size_t a = 0; a < eig.values.size(); ++a) {
    if (eig.values[a] <= 0.0) continue;
    total += eig.values[a] * branch_weight(project(b0, x0, eig.vectors.column(a)));
  }
  return total;
}

void check_path(const OutcomePath& path, std::size_t n, std::size_t d) {
  if (path.size() != n) throw InvalidArgument("oracle: path has the wrong length");
  for (auto x : path)
    if (x >= d) throw InvalidArgument("oracle: outcome out of range");
}

}  // namespace

double oracle_closed_prob(const ClosedProcess& proc, const OutcomePath& path) {
  check_path(path, proc.n(), proc.dim());
  return over_ensemble(proc.rho0(), proc.bases()[0], path[0], [&](Ket psi) {
    for (std::size_t m = 0; m + 1 < proc.n(); ++m) psi = project(proc.bases()[m + 1], path[m + 1], proc.unitaries()[m] * psi);
    return norm2(psi);
  });
}

double oracle_markov_prob(const MarkovProcess& proc, const OutcomePath& path) {
  check_path(path, proc.n(), proc.dim());
  std::vector<std::vector<ComplexMatrix>> kraus;
  for (const auto& ch : proc.channels()) kraus.push_back(kraus_from_choi(choi_of(ch), ch.in_dim(), ch.out_dim()));
  return over_ensemble(proc.rho0(), proc.bases()[0], path[0], [&](const Ket& start) {
    std::function<double(std::size_t, const Ket&)> walk = [&](std::size_t m, const Ket& psi) -> double {
      if (m + 1 == proc.n()) return norm2(psi);
      double s = 0.0;
      for (const auto& k : kraus[m]) s += walk(m + 1, project(proc.bases()[m + 1], path[m + 1], k * psi));
      return s;
    };
    return walk(0, start);
  });
}

double petz_transpose_residual(const Superoperator& n, const DensityMatrix& gamma) {
  const ReferencePair ref = make_reference_pair(n, gamma);
  const Superoperator r = petz_recovery(n, ref.gamma);
  const std::size_t d = n.in_dim(), dp = n.out_dim();
  const auto& in = ref.in.basis;
  const auto& out = ref.out.basis;
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const ComplexMatrix img = apply(n, in.unit(i, j));
      for (std::size_t k = 0; k < dp; ++k)
        for (std::size_t l = 0; l < dp; ++l) {
          const cplx fwd = hs_inner(out.unit(k, l), img);
          const cplx bwd = hs_inner(in.unit(i, j), apply(r, out.unit(k, l)));
          const double z = z_factor(ref.in.values, -1.0, i, j) * z_factor(ref.out.values, 1.0, k, l);
          worst = std::max(worst, std::abs(std::conj(fwd) - bwd * z));
        }
    }
  return worst;
}

}  // namespace qfluct::harness
