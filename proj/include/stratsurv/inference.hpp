#ifndef STRATSURV_INFERENCE_HPP
#define STRATSURV_INFERENCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratsurv/sampler.hpp"

namespace stratsurv {

struct SurvivalCurve {
  std::vector<double> t_grid;  // time scale
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct FitScores {
  double lpml = 0.0;
  double waic = 0.0;
};

// Posterior predictive survival on t_grid at covariate profile x0; bands are
// pointwise across-draw quantiles at (a/2, 1-a/2) with level = 1 - a. The
// new-cluster term averages survival over new_cluster_draws fresh base draws
// per retained iteration.
SurvivalCurve predictive_survival(const Chain& chain,
                                  const MixingMeasure& measure,
                                  KernelFamily family, const BaseMeasure& base,
                                  const std::vector<double>& t_grid,
                                  const std::vector<double>& x0, double level,
                                  Rng& rng, int new_cluster_draws = 25);

struct SummaryRow {
  std::string param;  // "mu", "zeta", "theta_1", ...
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct StratumRefit {
  int label = 0;
  int size = 0;
  std::vector<int> rows;  // dataset rows in this stratum
  Chain chain;
  std::vector<SummaryRow> summary;  // mu, zeta, theta_1..p at level ci_level
};

struct RefitResult {
  std::vector<StratumRefit> strata;      // blocks of size >= 2
  std::vector<int> skipped_singletons;   // stratum labels left out
};

// Independent re-run of the mixture per stratum of size >= 2; per-stratum
// seeds are derive_seed(config.seed, "refit-<label>").
RefitResult stratum_refit(const Dataset& data, const Partition& partition,
                          ModelVariant variant, KernelFamily family,
                          const MixingMeasure& measure,
                          const SamplerConfig& config, double ci_level = 0.95);

// Sum of log conditional predictive ordinates (harmonic-mean CPO per
// observation, computed in log space). Draws with -inf log-likelihood are
// skipped for that observation; *flagged counts such observations.
double lpml(const Chain& chain, int* flagged = nullptr);

// -2 (lppd - p_waic); the variance term uses the population convention.
double waic(const Chain& chain);

struct KaplanMeier {
  std::vector<double> times;     // distinct exact event times, ascending
  std::vector<double> survival;  // value on [times[i], times[i+1])
  double at(double t) const;     // right-continuous step evaluation
};

// Product-limit estimator on the time scale.
KaplanMeier kaplan_meier(const std::vector<double>& times,
                         const std::vector<int>& delta);

// Censored type-I-minimum maximum likelihood in (mu, zeta) on log times,
// theta = 0. Throws std::runtime_error on non-convergence or a degenerate
// zeta -> 0 boundary.
ClusterParams weibull_mle(const std::vector<double>& y,
                          const std::vector<int>& delta);

struct DiagResult {
  double geweke_z = 0.0;
  bool degenerate = false;  // constant series and friends
  std::vector<double> acf;  // lags 0..max_lag
};

// Geweke z (first 10% vs last 50%, batch-means spectral variance) and the
// autocorrelation function of a scalar chain.
DiagResult diagnostics(const std::vector<double>& series, int max_lag = 40);

}  // namespace stratsurv

#endif
