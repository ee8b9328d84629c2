#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "qfluct/errors.hpp"
#include "qfluct/nonmarkov_ft.hpp"

using namespace qfluct;
using namespace testutil;

namespace {

DilatedProcess from_closed_dilation(const ClosedProcess& cp, DensityMatrix gamma0) {
  return DilatedProcess(cp.rho0(), DensityMatrix::maximally_mixed(1), cp.unitaries(), cp.bases(), std::move(gamma0));
}

ComplexMatrix dephase(const MeasurementBasis& b, const ComplexMatrix& x) {
  ComplexMatrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < b.dim(); ++k) out += b.projector(k) * x * b.projector(k);
  return out;
}

}  // namespace

TEST_CASE("trivial environment collapses to the closed process") {
  Rng rng(1);
  const ClosedProcess cp = random_closed_process(2, 3, rng);
  const DilatedProcess dp = from_closed_dilation(cp, DensityMatrix::maximally_mixed(2));
  const ClosedEngine ce(cp);
  const NonMarkovEngine ne(dp);
  double total = 0.0;
  for_each_path(2, 3, [&](const OutcomePath& x) {
    CHECK(std::abs(ne.forward_with_dephasing(x) - ce.forward_joint(x)) < 1e-12);
    total += ne.forward_with_dephasing(x);
  });
  CHECK(std::abs(total - 1.0) < 1e-10);

  SUBCASE("backward reduces for n = 2") {
    const ClosedProcess c2 = random_closed_process(2, 2, rng);
    const NonMarkovEngine e2(from_closed_dilation(c2, DensityMatrix::maximally_mixed(2)));
    std::map<OutcomePath, cplx> bw;
    e2.for_each_quasi([&](const QuasiOutcome& q, cplx, cplx b) { bw[q.x] += b; });
    const ClosedEngine c2e(c2);
    for (const auto& [x, b] : bw) CHECK(std::abs(b - c2e.backward_joint(x)) < 1e-11);
  }

  SUBCASE("gamma trajectory is the dephased unitary orbit") {
    const DensityMatrix g0 = random_density(2, rng);
    const GammaTrajectory tr = gamma_trajectory(from_closed_dilation(cp, g0));
    const ComplexMatrix& u0 = cp.unitaries()[0];
    const ComplexMatrix& u1 = cp.unitaries()[1];
    const ComplexMatrix g1 = dephase(cp.bases()[1], u0 * g0.matrix() * u0.adjoint());
    const ComplexMatrix g2 = u1 * g1 * u1.adjoint();
    CHECK(max_abs(tr.gamma_out[0].matrix(), g1) < 1e-12);
    CHECK(max_abs(tr.gamma_out[1].matrix(), g2) < 1e-12);
    CHECK(cp.bases()[1].offdiag_in(tr.gamma_out[0].matrix()) < 1e-12);
  }

  SUBCASE("average entropy production by two routes") {
    const DensityMatrix g0 = random_density(2, rng);
    const NonMarkovEngine e(from_closed_dilation(cp, g0).with_bases(align_endpoint_bases(from_closed_dilation(cp, g0)).bases()));
    const auto& u = cp.unitaries();
    const auto orbit = [&](const ComplexMatrix& r) {
      const ComplexMatrix mid = dephase(cp.bases()[1], u[0] * r * u[0].adjoint());
      return u[1] * mid * u[1].adjoint();
    };
    const double formula = relative_entropy(cp.rho0(), g0) -
                           relative_entropy(DensityMatrix::trusted(orbit(cp.rho0().matrix())),
                                            DensityMatrix::trusted(orbit(g0.matrix())));
    CHECK(std::abs(e.avg_ep() - formula) < 1e-8);
  }

  SUBCASE("conditional environment state is scalar") {
    const ConditionalEnvState st = conditional_env_states(dp, {1, 0}, {1, 0}, {0, 1});
    CHECK(st.sigma.rows() == 1);
    if (st.defined) CHECK(std::abs(st.sigma(0, 0) - 1.0) < 1e-12);
  }
}

TEST_CASE("unital dynamics keep the maximally mixed reference") {
  Rng rng(2);
  const DilatedProcess dp = random_dilation(Coupling::closed, 3, 1, 4, rng);
  for (const auto& g : gamma_trajectory(dp).gamma_out)
    CHECK(max_abs(g.matrix(), DensityMatrix::maximally_mixed(3).matrix()) < 1e-12);
}

TEST_CASE("random dilations") {
  Rng rng(3);
  for (int t = 0; t < 8; ++t) {
    const DilatedProcess dp = random_dilation(t % 2 ? Coupling::random : Coupling::swap, 2, 2, 3, rng);
    const NonMarkovReport r = NonMarkovEngine(dp).report();
    CHECK(r.normalization_forward < 1e-10);
    CHECK(r.normalization_backward < 1e-10);
    CHECK(std::abs(r.avg_r - r.avg_r_formula) < 1e-8);
    CHECK(std::abs(r.rate - r.rate_formula) < 1e-8);
    CHECK(r.pointwise_ft < 1e-9);
    CHECK(r.projective_vs_quasi < 1e-12);
    CHECK(r.tpc_residual < 1e-11);
    CHECK(r.history_ft < 1e-9);
  }
}

TEST_CASE("reference state as initial state") {
  Rng rng(4);
  const DilatedProcess base = random_dilation(Coupling::random, 2, 2, 3, rng, true, false);
  const DilatedProcess dp = align_endpoint_bases(base.with_rho0(base.gamma0()));
  CHECK(std::abs(avg_ep(dp)) < 1e-10);
}

TEST_CASE("history dependence and marginal FT failure") {
  double spread = 0.0, fail = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    const NonMarkovEngine e(random_dilation(Coupling::random, 2, 2, 3, rng));
    spread = std::max(spread, e.history_spread());
    fail = std::max(fail, e.marginal_ft_failure());
  }
  CHECK(spread > 1e-3);
  CHECK(fail > 1e-3);
  for (auto c : {Coupling::product, Coupling::collision}) {
    Rng rng(5);
    const DilatedProcess dp = random_dilation(c, 2, 2, 3, rng);
    CHECK(marginal_ft_failure_scan(dp) < 1e-10);
    CHECK(NonMarkovEngine(dp).history_spread() < 1e-10);
  }
}

TEST_CASE("product couplings leave the environment uncorrelated") {
  Rng rng(6);
  const DilatedProcess dp = random_dilation(Coupling::product, 2, 2, 3, rng);
  const ConditionalEnvState a = conditional_env_states(dp, {0, 1}, {0, 1}, {1, 0});
  const ConditionalEnvState b = conditional_env_states(dp, {1, 0}, {1, 0}, {0, 0});
  REQUIRE(a.defined);
  REQUIRE(b.defined);
  CHECK(max_abs(a.sigma, b.sigma) < 1e-12);
}

TEST_CASE("Markovian reduction") {
  for (auto c : {Coupling::product, Coupling::collision}) {
    Rng rng(7);
    const DilatedProcess dp = random_dilation(c, 2, 2, 3, rng);
    const NonMarkovEngine ne(dp);
    const MarkovEngine me(markov_reduction(dp));
    for_each_path(2, 3, [&](const OutcomePath& x) {
      CHECK(std::abs(ne.forward_with_dephasing(x) - me.forward_joint(x)) < 1e-11);
    });
    ne.for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
      CHECK(std::abs(f - me.quasi_forward(q)) < 1e-10);
      CHECK(std::abs(b - me.quasi_backward(q)) < 1e-10);
      if (f != cplx(0.0, 0.0)) CHECK(std::abs(ne.eps(q).r - me.eps(q).r) < 1e-10);
    });
  }
  Rng rng(8);
  CHECK_THROWS(markov_reduction(random_dilation(Coupling::random, 2, 2, 3, rng)));
}

TEST_CASE("entropy production rate") {
  const auto swap_neg = negative_rate_search(Coupling::swap, 2, 2, 3, 0, 60);
  CHECK_FALSE(swap_neg.empty());
  for (const auto& r : swap_neg) CHECK(r.rate < -1e-6);
  CHECK(negative_rate_search(Coupling::collision, 2, 2, 3, 0, 60).empty());
  CHECK(negative_rate_search(Coupling::closed, 2, 1, 3, 0, 60).empty());
  const auto all = rate_scan(Coupling::random, 2, 2, 3, 10, 5);
  REQUIRE(all.size() == 5);
  CHECK(all[2].seed == 12);
}

TEST_CASE("memory ablation") {
  Rng rng(9);
  const MemoryAblation p = memory_ablation_values(random_dilation(Coupling::product, 2, 2, 3, rng));
  CHECK(std::abs(p.dephased - p.refreshed) < 1e-10);

  Rng rng2(10);
  const ClosedProcess perm = random_permutation_process(2, 3, rng2);
  const auto& b0 = perm.bases()[0];
  const auto diag_in_b0 = [&](double p) {
    return DensityMatrix(b0.projector(0) * cplx(p) + b0.projector(1) * cplx(1.0 - p));
  };
  const ClosedProcess diag(diag_in_b0(0.8), perm.unitaries(), perm.bases());
  const MemoryAblation c = memory_ablation_values(from_closed_dilation(diag, diag_in_b0(0.35)));
  CHECK(std::abs(c.dephased - c.undephased) < 1e-10);
  CHECK(std::abs(c.dephased - c.refreshed) < 1e-10);

  const MemoryAblation h = memory_ablation_values(random_dilation(Coupling::closed, 2, 1, 3, rng2, true));
  CHECK(std::abs(h.dephased - h.refreshed) < 1e-10);
}

TEST_CASE("invalid dilations") {
  Rng rng(11);
  const auto comp = MeasurementBasis::computational(2);
  const DensityMatrix g = DensityMatrix::maximally_mixed(2);
  CHECK_THROWS_AS(DilatedProcess(g, g, {ComplexMatrix::identity(2)}, {comp, comp}, g), InvalidArgument);
  CHECK_THROWS_AS(DilatedProcess(g, g, {ComplexMatrix::identity(4) * cplx(2.0)}, {comp, comp}, g), InvalidArgument);
  CHECK_THROWS_AS(DilatedProcess(g, g, {}, {comp}, g), InvalidArgument);
  CHECK_THROWS_AS(random_dilation(Coupling::swap, 2, 3, 3, rng), InvalidArgument);
}
