#include "pdmpis/numeric.hpp"

#include <algorithm>

#include <boost/math/distributions/normal.hpp>

#include "pdmpis/error.hpp"

namespace pdmpis {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::majorant_violation: return "majorant-violation";
    case ErrorKind::model_definition: return "model-definition";
    case ErrorKind::runaway_simulation: return "runaway-simulation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::decomposition: return "decomposition";
    case ErrorKind::objective_undefined: return "objective-undefined";
    case ErrorKind::invalid_start: return "invalid-start";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return -kInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == -kInf) return -kInf;
  if (m == kInf) return kInf;
  CompensatedSum s;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s.value());
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "normal quantile needs 0 < p < 1");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace pdmpis
