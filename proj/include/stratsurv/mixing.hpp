#ifndef STRATSURV_MIXING_HPP
#define STRATSURV_MIXING_HPP

#include <span>
#include <string>
#include <vector>

#include "stratsurv/kernels.hpp"
#include "stratsurv/rng.hpp"

namespace stratsurv {

// Mixing random probability measure. NIG is the normalized inverse-Gaussian
// process with Levy density rho(s) = s^{-3/2} e^{-tau s} / (2 sqrt(pi)); DP
// and PY are kept behind the same predictive interface for comparisons.
struct MixingMeasure {
  enum class Kind { NIG, DP, PY };
  Kind kind = Kind::NIG;

  // NIG
  double alpha = 1.0;
  double tau = 1.0;
  // DP
  double mass = 1.0;
  // PY
  double theta_py = 1.0;
  double sigma_py = 0.0;

  static MixingMeasure nig(double alpha, double tau);
  static MixingMeasure dp(double mass);
  static MixingMeasure py(double theta, double sigma);
};

std::string to_string(MixingMeasure::Kind kind);

// Centering measure G0: independent normals on the m-1 location/regression
// coordinates and an inverse-Gamma on the scale zeta.
struct BaseMeasure {
  std::vector<double> mu0;      // length m-1
  std::vector<double> tau0sq;   // length m-1
  double q0_gamma = 5.0;        // inverse-Gamma shape for zeta
  double q1_gamma = 1.0;        // inverse-Gamma scale for zeta

  void validate() const;
  // Fresh cluster parameters; n_theta = number of regression coordinates
  // carried by the cluster (0 for models without per-cluster effects).
  ClusterParams draw(int n_theta, Rng& rng) const;
  double log_pdf(const ClusterParams& params) const;
};

// Laplace exponent psi(u) = sqrt(u + tau) - sqrt(tau). NIG only.
double psi(const MixingMeasure& measure, double u);

// kappa_n(u) = Gamma(n - 1/2) / (2 sqrt(pi)) * (u + tau)^{1/2 - n}. NIG only.
double kappa(const MixingMeasure& measure, int nj, double u);

// Unnormalized prior factors of the allocation full conditional. The sampler
// multiplies in the likelihood factors itself.
struct PredictiveWeights {
  std::vector<double> existing;  // one per occupied cluster
  double new_per_aux = 0.0;      // each of the r auxiliary slots
};
PredictiveWeights predictive_weights(const MixingMeasure& measure,
                                     std::span<const int> cluster_sizes,
                                     double u, int r);

// Prior probability of one labelled set partition with the given block sizes.
// NIG goes through the Proposition-style quadrature over the auxiliary
// variable; DP and PY are closed-form. Guarded to n <= 12.
double eppf(const MixingMeasure& measure, std::span<const int> composition);

struct EkEstimate {
  double value = 0.0;
  double se = 0.0;  // 0 for the exact DP formula
};

// Prior expected number of clusters among n observations. DP is exact; NIG
// runs the allocation scheme with unit likelihood (Gibbs over partition and
// u); PY simulates its exchangeable sequential construction.
EkEstimate prior_expected_clusters(const MixingMeasure& measure, int n,
                                   Rng& rng);

// DP total mass giving prior expected cluster count target_ek among n
// observations, solved by bisection.
double dp_mass_matching(double target_ek, int n);

}  // namespace stratsurv

#endif
