#include "ensembles.hpp"

namespace qfluct::harness {

ClosedProcess closed_instance(const ExperimentConfig& cfg, std::size_t i) {
  Rng rng(cfg.instance_seed(i));
  const std::size_t d = cfg.instance_d(i), n = cfg.instance_n(i);
  return cfg.permutation ? random_permutation_process(d, n, rng) : random_closed_process(d, n, rng);
}

MarkovProcess markov_instance(const ExperimentConfig& cfg, std::size_t i) {
  Rng rng(cfg.instance_seed(i));
  return random_markov_process(cfg.instance_d(i), cfg.instance_n(i), rng, cfg.random_gamma);
}

DilatedProcess dilation_instance(const ExperimentConfig& cfg, std::size_t i, Coupling coupling) {
  Rng rng(cfg.instance_seed(i));
  return random_dilation(coupling, cfg.d_s, cfg.d_e, cfg.n[i % cfg.n.size()], rng, cfg.random_gamma);
}

std::pair<Superoperator, DensityMatrix> petz_instance(const ExperimentConfig& cfg, std::size_t i) {
  std::seed_seq seq{cfg.instance_seed(i), std::uint64_t{0x9e3779b97f4a7c15ULL}};
  Rng rng(seq);
  const std::size_t d = 2 + i % 2;
  Superoperator ch = random_channel(d, 2, rng);
  DensityMatrix gamma = random_density(d, rng);
  return {std::move(ch), std::move(gamma)};
}

bool is_markovian(Coupling c) { return c == Coupling::product || c == Coupling::collision || c == Coupling::closed; }

}  // namespace qfluct::harness
