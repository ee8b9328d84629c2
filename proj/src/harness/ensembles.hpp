#pragma once

#include "qfluct/harness.hpp"

namespace qfluct::harness {

ClosedProcess closed_instance(const ExperimentConfig& cfg, std::size_t i);
MarkovProcess markov_instance(const ExperimentConfig& cfg, std::size_t i);
DilatedProcess dilation_instance(const ExperimentConfig& cfg, std::size_t i, Coupling coupling);
// Independent (channel, gamma) pair for instance i, d alternating 2, 3.
std::pair<Superoperator, DensityMatrix> petz_instance(const ExperimentConfig& cfg, std::size_t i);
bool is_markovian(Coupling c);

}  // namespace qfluct::harness
