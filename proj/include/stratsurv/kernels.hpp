#ifndef STRATSURV_KERNELS_HPP
#define STRATSURV_KERNELS_HPP

#include <span>
#include <string>
#include <vector>

#include "stratsurv/rng.hpp"

namespace stratsurv {

// Euler-Mascheroni constant, full double precision.
inline constexpr double kEulerMascheroni = 0.57721566490153286060651209008;

// Log-location-scale families for the log survival times. Each family is the
// law of mu - theta'x + zeta * Y0 with Y0 standardized to mean 0, variance 1:
//   TypeIMinimum -> Weibull survival times
//   Logistic     -> log-logistic survival times
//   Normal       -> log-normal survival times
enum class KernelFamily { TypeIMinimum, Logistic, Normal };

std::string to_string(KernelFamily family);
KernelFamily kernel_from_string(const std::string& name);

struct ClusterParams {
  double mu = 0.0;
  double zeta = 1.0;
  std::vector<double> theta;  // empty when the model carries no per-cluster effect
};

struct Dataset {
  std::vector<double> y;       // log survival times
  std::vector<int> delta;      // 1 = exact, 0 = right-censored
  std::vector<std::vector<double>> x;  // n rows, p columns
  std::vector<double> time;    // recorded times; kept exact for serialization
  int n = 0;
  int p = 0;

  void validate() const;  // throws std::invalid_argument on broken invariants
  Dataset subset(std::span<const int> rows) const;
};

// log f*(y | mu, theta, zeta, x); theta may be empty (then theta'x := 0).
double log_density(KernelFamily family, double y, std::span<const double> x,
                   const ClusterParams& params);

// log S*(y | mu, theta, zeta, x), in (-inf, 0].
double log_survival(KernelFamily family, double y, std::span<const double> x,
                    const ClusterParams& params);

// One draw of Y = mu - theta'x + zeta * Y0.
double sample(KernelFamily family, const ClusterParams& params,
              std::span<const double> x, Rng& rng);

// Censored per-observation contribution:
// delta * log f* + (1 - delta) * log S*.
double censored_log_lik(KernelFamily family, double y, int delta,
                        std::span<const double> x, const ClusterParams& params);

}  // namespace stratsurv

#endif
