#include <doctest.h>

#include <stdexcept>

#include "helpers.hpp"
#include "qfluct/harness.hpp"

using namespace qfluct;
using namespace qfluct::harness;
using namespace testutil;

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config("closed-ft", "# comment\nseed = 7\nensemble=3\nd = 2, 3\nn = 4\n");
  CHECK(c.seed == 7);
  CHECK(c.ensemble == 3);
  CHECK(c.d == std::vector<std::size_t>{2, 3});
  CHECK(c.n == std::vector<std::size_t>{4});
  CHECK(c.instance_seed(2) == 9);
  CHECK(c.instance_d(3) == 3);
  const ExperimentConfig nm = parse_config("nonmarkov-ft", "coupling = swap\ngamma = random\nd_e = 2\n");
  CHECK(nm.coupling == Coupling::swap);
  CHECK(nm.random_gamma);
  CHECK_THROWS_AS(parse_config("closed-ft", "colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("closed-ft", "seed 7\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("closed-ft", "seed = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("closed-ft", "d = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("closed-ft", "ensemble = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kolmogorov", "n = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nonmarkov-ft", "coupling = swap\nd_e = 3\n"), ConfigError);
  CHECK_THROWS_AS(default_config("bogus"), ConfigError);
}

TEST_CASE("csv rows") {
  CHECK(csv_header() == "experiment,seed,quantity,value,target,tolerance,pass");
  CHECK(format_row(row_equal("x", 3, "q", 1.0, 1.0, 1e-10)) == "x,3,q,1,1,1e-10,true");
  CHECK(format_row(row_at_most("x", 3, "q", 2e-10, 0.0, 1e-10)) == "x,3,q,2.0000000000000001e-10,<=0,1e-10,false");
  CHECK(format_row(row_at_least("x", 1, "q", 0.5, 1.0)) == "x,1,q,0.5,>=1,0,false");
  CHECK(format_row(row_report("x", 1, "q", 0.25)) == "x,1,q,0.25,,,true");
  CHECK_FALSE(row_at_most("x", 1, "q", std::nan(""), 0.0, 1.0).pass);
  CHECK(all_pass({row_report("x", 1, "q", 1.0)}));
}

TEST_CASE("Born-rule oracle") {
  const auto comp = MeasurementBasis::computational(2);
  const ClosedProcess h(DensityMatrix(ComplexMatrix::diagonal({0.75, 0.25})), {hadamard()}, {comp, comp});
  CHECK(oracle_closed_prob(h, {0, 0}) == doctest::Approx(0.375).epsilon(1e-14));
  const ClosedProcess id(DensityMatrix(ComplexMatrix::diagonal({0.2, 0.8})), {ComplexMatrix::identity(2)}, {comp, comp});
  CHECK(oracle_closed_prob(id, {1, 1}) == forward_joint(id, {1, 1}));
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const ClosedProcess p = random_closed_process(2 + t % 2, 3, rng);
    for_each_path(p.dim(), 3, [&](const OutcomePath& x) {
      CHECK(std::abs(oracle_closed_prob(p, x) - forward_joint(p, x)) < 1e-10);
    });
  }
}

TEST_CASE("Kraus-trajectory oracle") {
  const auto comp = MeasurementBasis::computational(2);
  const Superoperator ad = amplitude_damping(0.3);
  const DensityMatrix g = DensityMatrix::maximally_mixed(2);
  const MarkovProcess mp = MarkovProcess::with_gammas(DensityMatrix(ComplexMatrix{{0.6, 0.2}, {0.2, 0.4}}), {ad, ad},
                                                      {comp, MeasurementBasis(hadamard()), comp}, {g, DensityMatrix(apply(ad, g.matrix()))});
  for_each_path(2, 3, [&](const OutcomePath& x) {
    CHECK(std::abs(oracle_markov_prob(mp, x) - forward_joint_markov(mp, x)) < 1e-11);
  });
}

TEST_CASE("petz transpose relation") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const std::size_t d = 2 + t % 2;
    CHECK(petz_transpose_residual(random_channel(d, 2, rng), random_density(d, rng)) < 1e-11);
  }
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  const auto v = parallel_map<std::size_t>(100, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 100; ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map<int>(10, 3,
                                    [](std::size_t i) -> int {
                                      if (i == 7) throw std::runtime_error("boom");
                                      return 0;
                                    }),
                  std::runtime_error);
}

TEST_CASE("experiments run and are deterministic") {
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    ExperimentConfig c = default_config(name);
    c.ensemble = name == "ep-rate-scan" ? 40 : 4;
    c.threads = 3;
    const auto rows = run_experiment(c);
    CHECK_FALSE(rows.empty());
    c.threads = 1;
    CHECK(format_csv(run_experiment(c)) == format_csv(rows));
    if (name != "ep-rate-scan") CHECK(all_pass(rows));
  }
}
