#include <algorithm>
#include <cmath>
#include <functional>

#include "ensembles.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct::harness {
namespace {

using Rows = std::vector<ReportRow>;

Rows flatten(std::vector<Rows> parts) {
  Rows out;
  for (auto& p : parts)
    for (auto& r : p) out.push_back(std::move(r));
  return out;
}

double max_abs_diff_paths(std::size_t d, std::size_t n, const std::function<double(const OutcomePath&)>& a,
                          const std::function<double(const OutcomePath&)>& b) {
  double worst = 0.0;
  for_each_path(d, n, [&](const OutcomePath& x) { worst = std::max(worst, std::abs(a(x) - b(x))); });
  return worst;
}

}  // namespace

Rows run_closed_ft(const ExperimentConfig& cfg) {
  const std::string ex = "closed-ft";
  return flatten(parallel_map<Rows>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const ClosedEngine engine(closed_instance(cfg, i));
    Rows rows;
    const FTCheck full = engine.detailed_ft_check(EPKind::full);
    const FTCheck r1 = engine.detailed_ft_check(EPKind::R1);
    const FTCheck r2 = engine.detailed_ft_check(EPKind::R2);
    rows.push_back(row_at_most(ex, s, "detailed_ft.full", full.max_violation, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "distribution_ft.full", full.distribution_violation, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "detailed_ft.r1", r1.max_violation, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "distribution_ft.r1", r1.distribution_violation, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "detailed_ft.r2", r2.max_violation, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "distribution_ft.r2", r2.distribution_violation, 0.0, 1e-10));
    rows.push_back(row_report(ex, s, "support_mismatch.full", static_cast<double>(full.support_mismatch.size())));
    const IntegralFT ig = engine.integral_ft_and_rate();
    rows.push_back(row_equal(ex, s, "integral.exp_minus_r", ig.exp_minus_r, 1.0, 1e-10));
    rows.push_back(row_equal(ex, s, "integral.exp_minus_r_r1", ig.exp_minus_r_r1, 1.0, 1e-10));
    rows.push_back(row_report(ex, s, "avg_r", ig.avg_r));
    rows.push_back(row_at_least(ex, s, "rate", ig.rate, 0.0, 1e-12));
    return rows;
  }));
}

Rows run_markov_ft(const ExperimentConfig& cfg) {
  const std::string ex = "markov-ft";
  return flatten(parallel_map<Rows>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const MarkovReport r = MarkovEngine(markov_instance(cfg, i)).suite();
    Rows rows;
    rows.push_back(row_at_most(ex, s, "normalization.forward", r.normalization_forward, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "normalization.backward", r.normalization_backward, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "marginalization.forward", r.marginalization_forward, 0.0, 1e-12));
    rows.push_back(row_at_most(ex, s, "marginalization.backward", r.marginalization_backward, 0.0, 1e-12));
    rows.push_back(row_at_most(ex, s, "marginalization.imag", r.marginal_imag, 0.0, 1e-12));
    rows.push_back(row_at_most(ex, s, "quasi_ft.pointwise", r.pointwise_ft, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "chain.r1p_r2", r.chain_r1p_r2, 0.0, 1e-11));
    rows.push_back(row_at_most(ex, s, "chain.r1_r2p", r.chain_r1_r2p, 0.0, 1e-11));
    rows.push_back(row_equal(ex, s, "integral.exp_minus_r", r.exp_minus_r, 1.0, 1e-10));
    rows.push_back(row_equal(ex, s, "integral.exp_minus_r_r1", r.exp_minus_r_r1, 1.0, 1e-10));
    rows.push_back(row_report(ex, s, "avg_r", r.avg_r));
    rows.push_back(row_at_least(ex, s, "rate", r.rate, 0.0, 1e-12));
    rows.push_back(row_report(ex, s, "rate_gap", r.rate_gap));

    const auto [ch, gamma] = petz_instance(cfg, i);
    const Superoperator petz = petz_recovery(ch, gamma);
    const ComplexMatrix back = apply(petz, apply(ch, gamma.matrix()));
    rows.push_back(row_at_most(ex, s, "petz.recovery", trace_distance(back, gamma.matrix()), 0.0, 1e-11));
    rows.push_back(row_at_least(ex, s, "petz.choi_min_eig", choi_min_eigenvalue(petz), 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "petz.tp_residual", tp_residual(petz), 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "petz.transpose", petz_transpose_residual(ch, gamma), 0.0, 1e-11));
    return rows;
  }));
}

namespace {

Rows reduction_rows(const std::string& ex, std::uint64_t s, const NonMarkovEngine& nm) {
  const MarkovEngine mk(markov_reduction(nm.process()));
  double joint = 0.0, qf = 0.0, qb = 0.0, ep = 0.0;
  for_each_path(nm.d_s(), nm.n(), [&](const OutcomePath& x) {
    joint = std::max(joint, std::abs(nm.forward_with_dephasing(x) - mk.forward_joint(x)));
  });
  nm.for_each_quasi([&](const QuasiOutcome& q, cplx f, cplx b) {
    qf = std::max(qf, std::abs(f - mk.quasi_forward(q)));
    qb = std::max(qb, std::abs(b - mk.quasi_backward(q)));
    if (f == cplx(0.0, 0.0)) return;
    const NonMarkovEPs a = nm.eps(q);
    const QuasiEPs m = mk.eps(q);
    ep = std::max({ep, std::abs(a.r - m.r), std::abs(a.r2 - m.r2)});
  });
  return {row_at_most(ex, s, "reduction.joint", joint, 0.0, 1e-10),
          row_at_most(ex, s, "reduction.quasi_forward", qf, 0.0, 1e-10),
          row_at_most(ex, s, "reduction.quasi_backward", qb, 0.0, 1e-10),
          row_at_most(ex, s, "reduction.ep", ep, 0.0, 1e-10)};
}

}  // namespace

Rows run_nonmarkov_ft(const ExperimentConfig& cfg) {
  const std::string ex = "nonmarkov-ft";
  const bool markovian = is_markovian(cfg.coupling);
  std::vector<double> failures;
  auto parts = parallel_map<std::pair<Rows, double>>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const DilatedProcess proc = dilation_instance(cfg, i, cfg.coupling);
    const NonMarkovEngine engine(proc);
    const NonMarkovReport r = engine.report();
    Rows rows;
    rows.push_back(row_at_most(ex, s, "normalization.forward", r.normalization_forward, 0.0, 1e-10));
    rows.push_back(row_at_most(ex, s, "normalization.backward", r.normalization_backward, 0.0, 1e-10));
    rows.push_back(row_report(ex, s, "avg_r", r.avg_r));
    rows.push_back(row_at_most(ex, s, "avg_r.formula_gap", std::abs(r.avg_r - r.avg_r_formula), 0.0, 1e-8));
    rows.push_back(row_report(ex, s, "rate", r.rate));
    rows.push_back(row_at_most(ex, s, "rate.formula_gap", std::abs(r.rate - r.rate_formula), 0.0, 1e-8));
    rows.push_back(row_at_most(ex, s, "quasi_ft.pointwise", r.pointwise_ft, 0.0, 1e-9));
    rows.push_back(row_at_most(ex, s, "marginalization.forward", r.projective_vs_quasi, 0.0, 1e-12));
    rows.push_back(row_at_most(ex, s, "tpc", r.tpc_residual, 0.0, 1e-11));
    rows.push_back(row_at_most(ex, s, "history_ft", r.history_ft, 0.0, 1e-9));
    rows.push_back(row_report(ex, s, "history_spread", r.history_spread));
    if (markovian)
      rows.push_back(row_at_most(ex, s, "marginal_ft", r.marginal_ft_failure, 0.0, 1e-10));
    else
      rows.push_back(row_report(ex, s, "marginal_ft", r.marginal_ft_failure));

    Rng rng(s);
    const DilatedProcess ctl =
        align_endpoint_bases(random_dilation(cfg.coupling, cfg.d_s, cfg.d_e, proc.n(), rng, true, false));
    const DilatedProcess eq = align_endpoint_bases(ctl.with_rho0(ctl.gamma0()));
    rows.push_back(row_equal(ex, s, "control.avg_r", NonMarkovEngine(eq).avg_ep(), 0.0, 1e-10));

    if (markovian)
      for (auto& row : reduction_rows(ex, s, engine)) rows.push_back(std::move(row));
    return std::pair<Rows, double>{std::move(rows), r.marginal_ft_failure};
  });
  Rows out;
  double worst = 0.0;
  for (auto& [rows, fail] : parts) {
    worst = std::max(worst, fail);
    for (auto& r : rows) out.push_back(std::move(r));
  }
  if (markovian)
    out.push_back(row_at_most(ex, cfg.seed, "marginal_ft.max", worst, 0.0, 1e-10));
  else
    out.push_back(row_at_least(ex, cfg.seed, "marginal_ft.max", worst, 1e-3));
  return out;
}

Rows run_ep_rate_scan(const ExperimentConfig& cfg) {
  const std::string ex = "ep-rate-scan";
  constexpr double kNegative = -1e-6;
  Rows out;
  const auto scan = [&](const std::string& label, const std::function<double(std::size_t)>& rate_of,
                        bool expect_negative) {
    const auto rates = parallel_map<double>(cfg.ensemble, cfg.threads, rate_of);
    std::size_t negative = 0;
    double lowest = rates.empty() ? 0.0 : rates.front();
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (rates[i] < kNegative) ++negative;
      lowest = std::min(lowest, rates[i]);
      if (label == "coupled") out.push_back(row_report(ex, cfg.instance_seed(i), "coupled.rate", rates[i]));
    }
    out.push_back(row_report(ex, cfg.seed, label + ".min_rate", lowest));
    if (expect_negative)
      out.push_back(row_at_least(ex, cfg.seed, label + ".negative_count", static_cast<double>(negative), 1.0));
    else
      out.push_back(row_at_most(ex, cfg.seed, label + ".negative_count", static_cast<double>(negative), 0.0));
  };
  const std::size_t n = cfg.n.front();
  scan("coupled", [&](std::size_t i) { return ep_rate(dilation_instance(cfg, i, cfg.coupling)); },
       !is_markovian(cfg.coupling));
  scan("control.collision", [&](std::size_t i) { return ep_rate(dilation_instance(cfg, i, Coupling::collision)); },
       false);
  scan("control.closed_dilation", [&](std::size_t i) { return ep_rate(dilation_instance(cfg, i, Coupling::closed)); },
       false);
  scan("control.markov", [&](std::size_t i) {
    Rng rng(cfg.instance_seed(i));
    return MarkovEngine(random_markov_process(cfg.d_s, n, rng, cfg.random_gamma)).suite().rate;
  }, false);
  scan("control.closed", [&](std::size_t i) {
    Rng rng(cfg.instance_seed(i));
    return ClosedEngine(random_closed_process(cfg.d_s, n, rng)).integral_ft_and_rate().rate;
  }, false);
  return out;
}

Rows run_memory_ablation(const ExperimentConfig& cfg) {
  const std::string ex = "memory-ablation";
  return flatten(parallel_map<Rows>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const MemoryAblation m = memory_ablation_values(dilation_instance(cfg, i, cfg.coupling));
    Rows rows{row_report(ex, s, "avg_r.dephased", m.dephased), row_report(ex, s, "avg_r.undephased", m.undephased),
              row_report(ex, s, "avg_r.refreshed", m.refreshed)};
    const double spread = std::max({m.dephased, m.undephased, m.refreshed}) -
                          std::min({m.dephased, m.undephased, m.refreshed});
    rows.push_back(row_report(ex, s, "spread", spread));
    if (is_markovian(cfg.coupling))
      rows.push_back(row_at_most(ex, s, "refresh_gap", std::abs(m.dephased - m.refreshed), 0.0, 1e-10));
    return rows;
  }));
}

Rows run_kolmogorov(const ExperimentConfig& cfg) {
  const std::string ex = "kolmogorov";
  return flatten(parallel_map<Rows>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const ClosedProcess proc = closed_instance(cfg, i);
    const ClosedEngine engine(proc);
    const std::size_t n = proc.n();
    double chain = 0.0;
    for_each_path(proc.dim(), n, [&](const OutcomePath& x) {
      if (engine.forward_joint(x) <= 1e-14 || engine.backward_joint(x) <= 1e-14) return;
      try {
        const double r = engine.ep_full(x);
        const double r1 = engine.ep_marginal_last(OutcomePath(x.begin(), x.end() - 1));
        const double r2 = engine.ep_marginal_first(OutcomePath(x.end() - 2, x.end()));
        chain = std::max(chain, std::abs(r1 + r2 - r));
      } catch (const SupportViolation&) {
      }
    });
    const double kc = kolmogorov_check(proc);
    const IntegralFT ig = engine.integral_ft_and_rate();
    const double avg_gap = std::abs(ig.avg_r1 + ig.avg_r2 - ig.avg_r);
    if (!cfg.permutation)
      return Rows{row_report(ex, s, "kolmogorov_check", kc), row_report(ex, s, "chain.r1_r2", chain),
                  row_report(ex, s, "chain.avg", avg_gap)};
    return Rows{row_at_most(ex, s, "kolmogorov_check", kc, 0.0, 1e-12),
                row_at_most(ex, s, "chain.r1_r2", chain, 0.0, 1e-12),
                row_at_most(ex, s, "chain.avg", avg_gap, 0.0, 1e-10)};
  }));
}

Rows run_oracle_check(const ExperimentConfig& cfg) {
  const std::string ex = "oracle-check";
  const std::size_t markov_count = (cfg.ensemble + 1) / 2;
  return flatten(parallel_map<Rows>(cfg.ensemble, cfg.threads, [&](std::size_t i) {
    const std::uint64_t s = cfg.instance_seed(i);
    const ClosedProcess cp = closed_instance(cfg, i);
    const ClosedEngine ce(cp);
    Rows rows{row_at_most(ex, s, "born_oracle",
                          max_abs_diff_paths(cp.dim(), cp.n(), [&](const OutcomePath& x) { return ce.forward_joint(x); },
                                             [&](const OutcomePath& x) { return oracle_closed_prob(cp, x); }),
                          0.0, 1e-10)};
    if (i < markov_count) {
      const MarkovProcess mp = markov_instance(cfg, i);
      const MarkovEngine me(mp);
      rows.push_back(row_at_most(
          ex, s, "kraus_oracle",
          max_abs_diff_paths(mp.dim(), mp.n(), [&](const OutcomePath& x) { return me.forward_joint(x); },
                             [&](const OutcomePath& x) { return oracle_markov_prob(mp, x); }),
          0.0, 1e-11));
    }
    return rows;
  }));
}

Rows run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string& e = cfg.experiment;
  if (e == "closed-ft") return run_closed_ft(cfg);
  if (e == "markov-ft") return run_markov_ft(cfg);
  if (e == "nonmarkov-ft") return run_nonmarkov_ft(cfg);
  if (e == "ep-rate-scan") return run_ep_rate_scan(cfg);
  if (e == "memory-ablation") return run_memory_ablation(cfg);
  if (e == "kolmogorov") return run_kolmogorov(cfg);
  if (e == "oracle-check") return run_oracle_check(cfg);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace qfluct::harness
