#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qfluct/harness.hpp"

using namespace qfluct;
using namespace qfluct::harness;

namespace {

struct Summary {
  bool pass = true;
  std::size_t rows = 0;
  std::size_t failed = 0;
  double worst = 0.0;  // largest value among the selected rows
};

Summary summarize(const std::vector<ReportRow>& rows, const std::function<bool(const std::string&)>& select) {
  Summary s;
  bool first = true;
  for (const auto& r : rows) {
    if (!select(r.quantity)) continue;
    ++s.rows;
    if (!r.pass) {
      s.pass = false;
      ++s.failed;
    }
    s.worst = first ? r.value : std::max(s.worst, r.value);
    first = false;
  }
  if (s.rows == 0) s.pass = false;
  return s;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

struct Timed {
  std::vector<ReportRow> rows;
  double seconds;
};

Timed timed_run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rows = run_experiment(cfg);
  return {std::move(rows), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

int failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string detail(const Summary& s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu rows, %zu failed, max %.3g", s.rows, s.failed, s.worst);
  return buf;
}

ExperimentConfig config(const std::string& name, const std::string& text) { return parse_config(name, text); }

}  // namespace

int main() {
  const Timed closed = timed_run(config("closed-ft", "seed = 1\nensemble = 200\nd = 2,3\nn = 2,3,4\n"));
  const Timed markov = timed_run(config("markov-ft", "seed = 1\nensemble = 100\nd = 2\nn = 3\n"));
  const Timed markov_rg = timed_run(config("markov-ft", "seed = 1001\nensemble = 100\nd = 2\nn = 3\ngamma = random\n"));

  {
    const Summary s = summarize(closed.rows, [](const std::string& q) { return q == "detailed_ft.full"; });
    char t[64];
    std::snprintf(t, sizeof t, ", %.2fs", closed.seconds);
    report(1, "closed detailed FT on 200 instances", s.pass && closed.seconds <= 60.0, detail(s) + t);
  }
  {
    const Summary s = summarize(closed.rows, [](const std::string& q) { return q == "detailed_ft.r1" || q == "detailed_ft.r2"; });
    report(2, "closed marginal FTs for R1 and R2", s.pass, detail(s));
  }
  {
    Summary s = summarize(closed.rows, [](const std::string& q) { return starts_with(q, "integral."); });
    const Summary m = summarize(markov.rows, [](const std::string& q) { return starts_with(q, "integral."); });
    s.pass = s.pass && m.pass;
    s.rows += m.rows;
    s.failed += m.failed;
    report(3, "integral identities <e^-R> = <e^-(R-R1)> = 1", s.pass, detail(s));
  }
  {
    const auto is_rate = [](const std::string& q) { return q == "rate"; };
    const Summary a = summarize(closed.rows, is_rate), b = summarize(markov.rows, is_rate),
                  c = summarize(markov_rg.rows, is_rate);
    const bool pass = a.pass && b.pass && c.pass;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu closed + %zu Markov instances, failed %zu", a.rows, b.rows + c.rows,
                  a.failed + b.failed + c.failed);
    report(4, "rate nonnegativity on closed and Markovian instances", pass, buf);
  }
  {
    const Timed k = timed_run(config("kolmogorov", "seed = 1\nensemble = 100\nconstruction = permutation\n"));
    const Summary s = summarize(k.rows, [](const std::string&) { return true; });
    report(5, "Kolmogorov construction and pointwise R1 + R2 = R", s.pass, detail(s));
  }
  {
    Summary s = summarize(markov.rows, [](const std::string& q) { return starts_with(q, "petz."); });
    report(6, "Petz recovery, CPTP and transpose relation on 100 pairs", s.pass, detail(s));
  }
  {
    const Summary s = summarize(markov.rows, [](const std::string& q) {
      return starts_with(q, "normalization.") || starts_with(q, "marginalization.") || q == "quasi_ft.pointwise" ||
             starts_with(q, "chain.");
    });
    report(7, "Markovian quasiprobability identities on 100 instances", s.pass, detail(s));
  }

  const Timed nm = timed_run(config("nonmarkov-ft", "seed = 1\nensemble = 50\nd_s = 2\nd_e = 2\nn = 3\ncoupling = random\n"));
  {
    const Summary s = summarize(nm.rows, [](const std::string& q) {
      return q == "normalization.backward" || q == "avg_r.formula_gap" || q == "control.avg_r";
    });
    report(8, "non-Markovian backward normalization and average EP", s.pass, detail(s));
  }
  {
    const Timed p = timed_run(config("nonmarkov-ft", "seed = 1\nensemble = 50\ncoupling = product\n"));
    const Summary s = summarize(p.rows, [](const std::string& q) { return starts_with(q, "reduction."); });
    report(9, "Markovian reduction of product dilations", s.pass, detail(s));
  }
  {
    const Timed scan = timed_run(config("ep-rate-scan", "seed = 0\nensemble = 1000\ncoupling = swap\n"));
    const Summary s = summarize(scan.rows, [](const std::string& q) { return q.find("negative_count") != std::string::npos; });
    const Summary low = summarize(scan.rows, [](const std::string& q) { return q == "coupled.negative_count"; });
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu coupled negative, controls %s, %.1fs", static_cast<std::size_t>(low.worst),
                  s.failed == 0 ? "clean" : "violated", scan.seconds);
    report(10, "negative EP rate witness with clean controls", s.pass && scan.seconds <= 600.0, buf);
  }
  {
    const Summary w = summarize(nm.rows, [](const std::string& q) { return q == "marginal_ft.max"; });
    bool pass = w.pass;
    std::size_t control_rows = 0;
    for (const char* c : {"product", "collision", "closed"}) {
      const Timed ctl = timed_run(config("nonmarkov-ft", std::string("seed = 1\nensemble = 50\ncoupling = ") + c + "\n"));
      const Summary s = summarize(ctl.rows, [](const std::string& q) { return starts_with(q, "marginal_ft"); });
      pass = pass && s.pass;
      control_rows += s.rows;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "witness %.3g, %zu Markovian control rows", w.worst, control_rows);
    report(11, "marginal FT failure witness", pass, buf);
  }
  {
    const Timed o = timed_run(config("oracle-check", "seed = 1\nensemble = 100\nd = 2,3\nn = 2,3,4\n"));
    const Summary b = summarize(o.rows, [](const std::string& q) { return q == "born_oracle"; });
    const Summary k = summarize(o.rows, [](const std::string& q) { return q == "kraus_oracle"; });
    report(12, "Born-rule and Kraus-trajectory oracle equivalence", b.pass && k.pass && b.rows >= 100 && k.rows >= 50,
           detail(b) + "; " + detail(k));
  }
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
