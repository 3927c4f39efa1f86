#include "stratsurv/numeric.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace stratsurv {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2 pi)
constexpr double kSqrt2 = 1.4142135623730951;

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace

double log_sum_exp(std::span<const double> log_terms) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_terms) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw)) return max_lw;  // all -inf (or empty)
  double s = 0.0;
  for (double lw : log_terms) s += std::exp(lw - max_lw);
  return max_lw + std::log(s);
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(sd);
}

double normal_log_sf(double z) {
  if (z < 30.0) {
    return std::log(0.5 * std::erfc(z / kSqrt2));
  }
  // Mills-ratio asymptotic series; erfc underflows past z ~ 37.5 and loses
  // precision in the subnormal range before that.
  const double z2 = z * z;
  const double series =
      1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) +
      105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - kLogSqrt2Pi - std::log(z) + std::log(series);
}

double inv_gamma_log_pdf(double x, double shape, double scale) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = simpson(a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

double integrate_halfline(const std::function<double(double)>& f,
                          double rel_tol) {
  auto g = [&f](double v) {
    if (v >= 1.0) return 0.0;
    const double u = v / (1.0 - v);
    if (!std::isfinite(u)) return 0.0;
    const double w = 1.0 / ((1.0 - v) * (1.0 - v));
    const double fu = f(u);
    return std::isfinite(fu) ? fu * w : 0.0;
  };
  // coarse pass to scale the absolute tolerance
  double coarse = 0.0;
  const int grid = 64;
  for (int i = 0; i < grid; ++i) {
    coarse += g((i + 0.5) / grid) / grid;
  }
  const double tol = rel_tol * std::max(std::abs(coarse), 1e-300);
  return integrate(g, 0.0, 1.0, tol);
}

double mean_of(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean_of: empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double batch_means_se(std::span<const double> x) {
  const int len = static_cast<int>(x.size());
  if (len < 4) throw std::invalid_argument("batch_means_se: series too short");
  const int batch = std::max(2, static_cast<int>(std::sqrt(len)));
  const int nbatch = len / batch;
  std::vector<double> means(nbatch);
  for (int b = 0; b < nbatch; ++b) {
    means[b] = mean_of(x.subspan(b * batch, batch));
  }
  const double var_bm = variance_of(means);
  // variance of the grand mean ~ var(batch means) / nbatch
  return std::sqrt(var_bm / nbatch);
}

double quantile_of(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile_of: empty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(x.begin(), x.end());
  const double pos = q * (x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

}  // namespace stratsurv
