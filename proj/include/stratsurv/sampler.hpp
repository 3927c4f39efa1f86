#ifndef STRATSURV_SAMPLER_HPP
#define STRATSURV_SAMPLER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stratsurv/kernels.hpp"
#include "stratsurv/mixing.hpp"
#include "stratsurv/partitions.hpp"
#include "stratsurv/rng.hpp"

namespace stratsurv {

// M0: no covariate effect; M1: one common coefficient vector; M2: cluster
// specific coefficient vectors inside each ClusterParams.
enum class ModelVariant { M0, M1, M2 };

std::string to_string(ModelVariant variant);
ModelVariant variant_from_string(const std::string& name);

struct SamplerState {
  std::vector<int> alloc;               // cluster labels, compact 0..k-1
  std::vector<ClusterParams> clusters;  // one entry per occupied cluster
  std::vector<int> sizes;               // occupancy counts, sum = n
  double u = 1.0;
  double tau = 1.0;
  double alpha = 1.0;
  std::vector<double> theta_common;     // M1 only, length p

  int k() const { return static_cast<int>(clusters.size()); }
  int n() const { return static_cast<int>(alloc.size()); }
  void check_invariants() const;  // throws std::logic_error when broken
};

struct AlphaMode {
  enum class Kind { Fixed, GammaPrior };
  Kind kind = Kind::Fixed;
  double value = 1.0;  // Fixed
  double q0 = 1.0;     // GammaPrior shape
  double q1 = 1.0;     // GammaPrior rate
  static AlphaMode fixed(double value);
  static AlphaMode gamma_prior(double q0, double q1);
};

struct SamplerConfig {
  int iters = 5000;
  int burnin = 3000;
  int thin = 1;
  int r_aux = 3;

  // random-walk proposal scales; u, tau, zeta move on the log axis
  double step_u = 1.0;
  double step_tau = 1.0;
  double step_reshuffle = 0.5;
  double step_theta = 0.5;
  bool adapt_steps = true;   // tune toward ~0.3 acceptance during burn-in,
                             // frozen afterwards

  AlphaMode alpha_mode = AlphaMode::fixed(1.0);
  double q0_tau = 1.0;
  double q1_tau = 1.0;
  double theta_prior_var = 20.0;  // tau_theta^2, M1 only

  BaseMeasure base;
  std::uint64_t seed = 42;

  double u_init = 1.0;
  double tau_init = 1.0;

  // Forces every likelihood factor to one; used to check the induced prior
  // partition law against the EPPF.
  bool unit_likelihood = false;

  void validate() const;
};

struct ChainDraw {
  int iter = 0;  // sweep index within the run
  std::vector<int> alloc;
  std::vector<ClusterParams> clusters;
  double u = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  std::vector<double> theta_common;
  std::vector<double> loglik;  // per-observation censored log-likelihood
};

struct Chain {
  ModelVariant variant = ModelVariant::M0;
  KernelFamily family = KernelFamily::TypeIMinimum;
  int n = 0;
  int p = 0;
  std::vector<ChainDraw> draws;
  std::map<std::string, double> accept_rates;  // post-burn-in, frozen steps

  std::vector<Partition> partitions() const;
  std::vector<double> k_series() const;
};

// --- single Gibbs moves (exposed for targeted tests) ---------------------

// (c'): reallocate observation i among existing clusters and r_aux fresh
// components; a singleton's old value occupies the first auxiliary slot.
void update_allocation(SamplerState& state, int i, const Dataset& data,
                       ModelVariant variant, KernelFamily family,
                       const MixingMeasure& measure, const BaseMeasure& base,
                       int r_aux, bool unit_likelihood, Rng& rng,
                       bool* accepted_new = nullptr);

// (b): random-walk MH on log u. Returns acceptance.
bool update_u(SamplerState& state, const MixingMeasure& measure, double step_u,
              Rng& rng);

// (d): random-walk MH on log tau with Gamma(q0, q1) prior.
bool update_tau(SamplerState& state, const MixingMeasure& measure,
                double q0_tau, double q1_tau, double step_tau, Rng& rng);

// (a): exact conjugate Gamma draw, or no-op when alpha is fixed.
void update_alpha(SamplerState& state, const AlphaMode& mode, Rng& rng);

// (f): per-coordinate random-walk MH for the common coefficients (M1).
// Returns the number of accepted coordinates.
int update_theta_common(SamplerState& state, const Dataset& data,
                        KernelFamily family, double theta_prior_var,
                        double step_theta, bool unit_likelihood, Rng& rng);

// Reshuffling move: per occupied cluster, a joint proposal on all cluster
// parameters (log axis for zeta) against base density times likelihood.
// Returns the number of accepted clusters.
int reshuffle_clusters(SamplerState& state, const Dataset& data,
                       ModelVariant variant, KernelFamily family,
                       const BaseMeasure& base, double step_reshuffle,
                       bool unit_likelihood, Rng& rng);

// --- log target kernels for the MH moves (antisymmetry-checkable) --------
namespace detail {
// target of log(u) given (n, k, alpha, tau), Jacobian included
double log_target_logu(double v, int n, int k, double alpha, double tau);
// target of log(tau) given (u, n, k, alpha, prior), Jacobian included
double log_target_logtau(double t, double u, int n, int k, double alpha,
                         double q0_tau, double q1_tau);
// reshuffle target of cluster j's parameters: base density in the
// (mu, theta, log zeta) coordinates times the cluster's likelihood factors
double log_target_cluster(const ClusterParams& params, const SamplerState& state,
                          int j, const Dataset& data, ModelVariant variant,
                          KernelFamily family, const BaseMeasure& base,
                          bool unit_likelihood);
// target of the l-th common coefficient (M1)
double log_target_theta(double value, int l, const SamplerState& state,
                        const Dataset& data, KernelFamily family,
                        double theta_prior_var, bool unit_likelihood);
}  // namespace detail

// Full run: per-iteration sweep is allocations, reshuffle, u, tau, alpha,
// theta-common (M1); retains thinned post-burn-in draws.
Chain run(const Dataset& data, ModelVariant variant, KernelFamily family,
          const MixingMeasure& measure, const SamplerConfig& config);

}  // namespace stratsurv

#endif
