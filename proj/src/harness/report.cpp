#include <cmath>

#include <fmt/format.h>

#include "qfluct/harness.hpp"

namespace qfluct::harness {
namespace {

ReportRow make(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
               double tol, Check check, bool pass) {
  if (!std::isfinite(value) && check != Check::report)
    pass = false;
  return ReportRow{exp, seed, q, value, target, tol, check, pass};
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

ReportRow row_equal(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                    double tol) {
  return make(exp, seed, q, value, target, tol, Check::equal, std::abs(value - target) <= tol);
}

ReportRow row_at_most(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                      double tol) {
  return make(exp, seed, q, value, target, tol, Check::at_most, value <= target + tol);
}

ReportRow row_at_least(const std::string& exp, std::uint64_t seed, const std::string& q, double value, double target,
                       double tol) {
  return make(exp, seed, q, value, target, tol, Check::at_least, value >= target - tol);
}

ReportRow row_report(const std::string& exp, std::uint64_t seed, const std::string& q, double value) {
  return make(exp, seed, q, value, 0.0, 0.0, Check::report, true);
}

std::string csv_header() { return "experiment,seed,quantity,value,target,tolerance,pass"; }

std::string format_row(const ReportRow& r) {
  if (r.check == Check::report)
    return fmt::format("{},{},{},{},,,{}", r.experiment, r.seed, r.quantity, num(r.value), r.pass ? "true" : "false");
  const char* prefix = r.check == Check::at_most ? "<=" : r.check == Check::at_least ? ">=" : "";
  return fmt::format("{},{},{},{},{}{},{},{}", r.experiment, r.seed, r.quantity, num(r.value), prefix, num(r.target),
                     num(r.tolerance), r.pass ? "true" : "false");
}

std::string format_csv(const std::vector<ReportRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) {
    out += format_row(r);
    out += '\n';
  }
  return out;
}

bool all_pass(const std::vector<ReportRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

}  // namespace qfluct::harness
