#include <doctest.h>

#include "helpers.hpp"
#include "qfluct/closed_ft.hpp"
#include "qfluct/errors.hpp"

using namespace qfluct;
using namespace testutil;

namespace {

ClosedProcess hadamard_process() {
  const auto comp = MeasurementBasis::computational(2);
  return ClosedProcess(DensityMatrix(ComplexMatrix::diagonal({0.75, 0.25})), {hadamard()}, {comp, comp});
}

ClosedProcess identity_process(double p, std::size_t n) {
  const auto comp = MeasurementBasis::computational(2);
  return ClosedProcess(DensityMatrix(ComplexMatrix::diagonal({p, 1.0 - p})),
                       std::vector<ComplexMatrix>(n - 1, ComplexMatrix::identity(2)),
                       std::vector<MeasurementBasis>(n, comp));
}

double total(const ClosedProcess& p, bool forward) {
  const ClosedEngine e(p);
  double s = 0.0;
  for_each_path(p.dim(), p.n(), [&](const OutcomePath& x) { s += forward ? e.forward_joint(x) : e.backward_joint(x); });
  return s;
}

}  // namespace

TEST_CASE("forward and backward joints") {
  const ClosedProcess id = identity_process(0.3, 2);
  CHECK(forward_joint(id, {0, 0}) == doctest::Approx(0.3));
  CHECK(forward_joint(id, {0, 1}) == 0.0);
  const ClosedProcess h = hadamard_process();
  CHECK(forward_joint(h, {0, 0}) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(backward_joint(h, {0, 0}) == doctest::Approx(0.25).epsilon(1e-14));
  const auto rt = backward_initial(h).matrix();
  CHECK(rt(0, 0).real() == doctest::Approx(0.5));
  CHECK(rt(1, 1).real() == doctest::Approx(0.5));
  CHECK(max_abs(backward_initial(id).matrix(), id.rho0().matrix()) < 1e-15);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const ClosedProcess p = random_closed_process(2 + t % 2, 2 + t % 3, rng);
    CHECK(std::abs(total(p, true) - 1.0) < 1e-12);
    CHECK(std::abs(total(p, false) - 1.0) < 1e-10);
    CHECK(std::abs(backward_initial(p).matrix().trace() - 1.0) < 1e-12);
  }
  const ClosedProcess id3 = identity_process(0.4, 3);
  for_each_path(2, 3, [&](const OutcomePath& x) { CHECK(forward_joint(id3, x) == backward_joint(id3, x)); });
  CHECK_THROWS_AS(forward_joint(h, {0}), InvalidArgument);
  CHECK_THROWS_AS(forward_joint(h, {0, 2}), InvalidArgument);
}

TEST_CASE("entropy productions") {
  CHECK(ep_full(identity_process(0.3, 2), {0, 0}) == doctest::Approx(0.0));
  CHECK(ep_full(hadamard_process(), {0, 0}) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
  CHECK(ep_marginal_first(hadamard_process(), {0, 0}) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
  CHECK(ep_marginal_last(identity_process(0.3, 3), {1, 1}) == doctest::Approx(0.0));
  CHECK(ep_marginal_first(identity_process(0.3, 3), {1, 1}) == doctest::Approx(0.0));

  Rng rng(2);
  const ClosedProcess p = random_closed_process(2, 3, rng);
  const ClosedEngine e(p);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(e.ep_full({a, 0, c}) - e.ep_full({a, 1, c})) < 1e-12);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      double f = 0.0, bw = 0.0, f2 = 0.0, b2 = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        f += e.forward_joint({a, b, c});
        bw += e.backward_joint({a, b, c});
        f2 += e.forward_joint({c, a, b});
        b2 += e.backward_joint({c, a, b});
      }
      CHECK(std::abs(std::exp(e.ep_marginal_last({a, b})) - f / bw) < 1e-10 * (f / bw));
      CHECK(std::abs(std::exp(e.ep_marginal_first({a, b})) - f2 / b2) < 1e-10 * (f2 / b2));
    }
}

TEST_CASE("ep distributions") {
  const auto mixed = ClosedProcess(DensityMatrix::maximally_mixed(2), {ComplexMatrix::identity(2)},
                                   {MeasurementBasis::computational(2), MeasurementBasis::computational(2)});
  const EPDistribution d0 = ep_distribution(mixed, EPKind::full, Direction::forward);
  REQUIRE(d0.atoms.size() == 1);
  CHECK(d0.atoms[0].value == doctest::Approx(0.0));
  CHECK(d0.atoms[0].weight == doctest::Approx(1.0));

  const EPDistribution dh = ep_distribution(hadamard_process(), EPKind::full, Direction::forward);
  REQUIRE(dh.atoms.size() == 2);
  CHECK(dh.atoms[0].value == doctest::Approx(std::log(0.5)));
  CHECK(dh.atoms[0].weight == doctest::Approx(0.25));
  CHECK(dh.atoms[1].value == doctest::Approx(std::log(1.5)));
  CHECK(dh.atoms[1].weight == doctest::Approx(0.75));
  const EPDistribution bh = ep_distribution(hadamard_process(), EPKind::full, Direction::backward);
  CHECK(std::abs(bh.total_weight() - 1.0) < 1e-10);
}

TEST_CASE("detailed and integral fluctuation theorems") {
  CHECK(detailed_ft_check(identity_process(0.3, 3), EPKind::full).max_violation < 1e-15);
  const IntegralFT idr = integral_ft_and_rate(identity_process(0.3, 3));
  CHECK(idr.exp_minus_r_r1 == doctest::Approx(1.0));
  CHECK(idr.rate == doctest::Approx(0.0));
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const ClosedProcess p = random_closed_process(2 + t % 2, 2 + t % 3, rng);
    for (auto k : {EPKind::full, EPKind::R1, EPKind::R2}) {
      const FTCheck c = detailed_ft_check(p, k);
      CHECK(c.max_violation <= 1e-10);
      CHECK(c.distribution_violation <= 1e-10);
    }
    const IntegralFT ig = integral_ft_and_rate(p);
    CHECK(std::abs(ig.exp_minus_r - 1.0) <= 1e-10);
    CHECK(std::abs(ig.exp_minus_r_r1 - 1.0) <= 1e-10);
    CHECK(ig.rate >= -1e-12);
  }
}

TEST_CASE("kolmogorov condition") {
  CHECK(kolmogorov_check(identity_process(0.3, 3)) == 0.0);
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const ClosedProcess p = random_permutation_process(2 + t % 2, 3 + t % 2, rng);
    CHECK(kolmogorov_check(p) <= 1e-12);
    const IntegralFT ig = integral_ft_and_rate(p);
    CHECK(std::abs(ig.avg_r1 + ig.avg_r2 - ig.avg_r) <= 1e-10);
  }
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) worst = std::max(worst, kolmogorov_check(random_closed_process(2, 3, rng)));
  CHECK(worst > 1e-3);
  const ClosedProcess p = random_closed_process(2, 4, rng);
  CHECK(drop_measurement(p, 1).n() == 3);
  CHECK_THROWS_AS(drop_measurement(p, 0), InvalidArgument);
}
