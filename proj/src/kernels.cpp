#include "stratsurv/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stratsurv/numeric.hpp"

namespace stratsurv {

namespace {

constexpr double kSqrt6 = 2.449489742783178;
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double dot(std::span<const double> theta, std::span<const double> x) {
  if (theta.empty()) return 0.0;
  if (theta.size() != x.size()) {
    throw std::invalid_argument("kernel: theta/x length mismatch");
  }
  double s = 0.0;
  for (std::size_t l = 0; l < theta.size(); ++l) s += theta[l] * x[l];
  return s;
}

void check_inputs(double y, const ClusterParams& params) {
  if (!std::isfinite(y) || !std::isfinite(params.mu) ||
      !std::isfinite(params.zeta) || params.zeta <= 0.0) {
    throw std::invalid_argument("kernel: non-finite input or zeta <= 0");
  }
  for (double t : params.theta) {
    if (!std::isfinite(t)) {
      throw std::invalid_argument("kernel: non-finite theta");
    }
  }
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::TypeIMinimum: return "type1min";
    case KernelFamily::Logistic: return "logistic";
    case KernelFamily::Normal: return "normal";
  }
  return "?";
}

KernelFamily kernel_from_string(const std::string& name) {
  if (name == "type1min" || name == "weibull") return KernelFamily::TypeIMinimum;
  if (name == "logistic" || name == "loglogistic") return KernelFamily::Logistic;
  if (name == "normal" || name == "lognormal") return KernelFamily::Normal;
  throw std::invalid_argument("unknown kernel family: " + name);
}

void Dataset::validate() const {
  if (static_cast<int>(y.size()) != n || static_cast<int>(delta.size()) != n ||
      static_cast<int>(x.size()) != n) {
    throw std::invalid_argument("dataset: field lengths disagree with n");
  }
  if (!time.empty() && static_cast<int>(time.size()) != n) {
    throw std::invalid_argument("dataset: time cache length disagrees with n");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) {
      throw std::invalid_argument("dataset: non-finite y");
    }
    if (delta[i] != 0 && delta[i] != 1) {
      throw std::invalid_argument("dataset: delta outside {0,1}");
    }
    if (static_cast<int>(x[i].size()) != p) {
      throw std::invalid_argument("dataset: covariate row width != p");
    }
  }
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset out;
  out.n = static_cast<int>(rows.size());
  out.p = p;
  out.y.reserve(rows.size());
  out.delta.reserve(rows.size());
  out.x.reserve(rows.size());
  for (int r : rows) {
    out.y.push_back(y.at(r));
    out.delta.push_back(delta.at(r));
    out.x.push_back(x.at(r));
    if (!time.empty()) out.time.push_back(time.at(r));
  }
  return out;
}

double log_density(KernelFamily family, double y, std::span<const double> x,
                   const ClusterParams& params) {
  check_inputs(y, params);
  const double shift = y - params.mu + dot(params.theta, x);
  switch (family) {
    case KernelFamily::TypeIMinimum: {
      const double z = M_PI * shift / (params.zeta * kSqrt6) - kEulerMascheroni;
      return -std::exp(z) + z + std::log(M_PI) - std::log(params.zeta * kSqrt6);
    }
    case KernelFamily::Logistic: {
      const double z = M_PI * shift / (params.zeta * kSqrt3);
      // e^{-z}/(1+e^{-z})^2 is symmetric in z; keep the exponent negative
      const double a = -std::abs(z);
      return std::log(M_PI) - std::log(params.zeta * kSqrt3) + a -
             2.0 * std::log1p(std::exp(a));
    }
    case KernelFamily::Normal: {
      const double z = shift / params.zeta;
      return -0.5 * z * z - kLogSqrt2Pi - std::log(params.zeta);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

double log_survival(KernelFamily family, double y, std::span<const double> x,
                    const ClusterParams& params) {
  check_inputs(y, params);
  const double shift = y - params.mu + dot(params.theta, x);
  switch (family) {
    case KernelFamily::TypeIMinimum: {
      const double z = M_PI * shift / (params.zeta * kSqrt6) - kEulerMascheroni;
      return -std::exp(z);
    }
    case KernelFamily::Logistic: {
      const double z = M_PI * shift / (params.zeta * kSqrt3);
      // log S = -log(1 + e^z)
      return z > 0.0 ? -z - std::log1p(std::exp(-z)) : -std::log1p(std::exp(z));
    }
    case KernelFamily::Normal:
      return normal_log_sf(shift / params.zeta);
  }
  return -std::numeric_limits<double>::infinity();
}

double sample(KernelFamily family, const ClusterParams& params,
              std::span<const double> x, Rng& rng) {
  check_inputs(0.0, params);
  const double loc = params.mu - dot(params.theta, x);
  switch (family) {
    case KernelFamily::TypeIMinimum: {
      // standardized minimum, Y0 = (gumbel_min + EM) * sqrt(6)/pi
      const double v = std::log(-std::log(rng.uniform_pos()));
      return loc + params.zeta * (v + kEulerMascheroni) * kSqrt6 / M_PI;
    }
    case KernelFamily::Logistic: {
      const double u = rng.uniform_pos();
      return loc + params.zeta * std::log(u / (1.0 - u)) * kSqrt3 / M_PI;
    }
    case KernelFamily::Normal:
      return loc + params.zeta * rng.normal();
  }
  return 0.0;
}

double censored_log_lik(KernelFamily family, double y, int delta,
                        std::span<const double> x,
                        const ClusterParams& params) {
  return delta == 1 ? log_density(family, y, x, params)
                    : log_survival(family, y, x, params);
}

}  // namespace stratsurv
