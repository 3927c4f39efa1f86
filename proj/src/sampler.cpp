#include "stratsurv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stratsurv/numeric.hpp"

namespace stratsurv {

namespace {

// number of theta coordinates carried inside each cluster
int cluster_theta_dim(ModelVariant variant, int p) {
  return variant == ModelVariant::M2 ? p : 0;
}

// censored likelihood factor of observation i at the given cluster params,
// with the model variant deciding where the regression effect lives
double obs_log_lik(const SamplerState& state, const Dataset& data,
                   ModelVariant variant, KernelFamily family, int i,
                   const ClusterParams& params, bool unit_likelihood) {
  if (unit_likelihood) return 0.0;
  if (variant == ModelVariant::M1) {
    ClusterParams with_common = params;
    with_common.theta = state.theta_common;
    return censored_log_lik(family, data.y[i], data.delta[i], data.x[i],
                            with_common);
  }
  return censored_log_lik(family, data.y[i], data.delta[i], data.x[i], params);
}

struct StepTuner {
  double* step;
  bool adapting = true;  // burn-in only; frozen afterwards
  long long proposed = 0;
  long long accepted = 0;
  long long proposed_kept = 0;  // post-burn-in
  long long accepted_kept = 0;

  void record(bool acc, bool post_burnin) {
    if (post_burnin) {
      ++proposed_kept;
      accepted_kept += acc;
      return;
    }
    if (!adapting) return;
    ++proposed;
    accepted += acc;
    if (proposed >= 50) {
      const double rate = static_cast<double>(accepted) / proposed;
      *step *= std::exp(0.8 * (rate - 0.3));
      proposed = 0;
      accepted = 0;
    }
  }
  double kept_rate() const {
    return proposed_kept > 0
               ? static_cast<double>(accepted_kept) / proposed_kept
               : 0.0;
  }
};

}  // namespace

std::string to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::M0: return "M0";
    case ModelVariant::M1: return "M1";
    case ModelVariant::M2: return "M2";
  }
  return "?";
}

ModelVariant variant_from_string(const std::string& name) {
  if (name == "M0" || name == "m0") return ModelVariant::M0;
  if (name == "M1" || name == "m1") return ModelVariant::M1;
  if (name == "M2" || name == "m2") return ModelVariant::M2;
  throw std::invalid_argument("unknown model variant: " + name);
}

void SamplerState::check_invariants() const {
  if (clusters.size() != sizes.size()) {
    throw std::logic_error("sampler state: clusters/sizes length mismatch");
  }
  std::vector<int> counts(clusters.size(), 0);
  for (int lab : alloc) {
    if (lab < 0 || lab >= k()) {
      throw std::logic_error("sampler state: allocation label out of range");
    }
    ++counts[lab];
  }
  for (int j = 0; j < k(); ++j) {
    if (counts[j] == 0) throw std::logic_error("sampler state: empty cluster");
    if (counts[j] != sizes[j]) {
      throw std::logic_error("sampler state: size table out of sync");
    }
  }
  if (!(u > 0.0) || !(tau > 0.0) || !(alpha > 0.0)) {
    throw std::logic_error("sampler state: u, tau, alpha must be positive");
  }
}

AlphaMode AlphaMode::fixed(double value) {
  AlphaMode m;
  m.kind = Kind::Fixed;
  m.value = value;
  return m;
}

AlphaMode AlphaMode::gamma_prior(double q0, double q1) {
  AlphaMode m;
  m.kind = Kind::GammaPrior;
  m.q0 = q0;
  m.q1 = q1;
  return m;
}

void SamplerConfig::validate() const {
  if (iters <= burnin || burnin < 0 || thin < 1) {
    throw std::invalid_argument("sampler config: need iters > burnin >= 0, thin >= 1");
  }
  if (r_aux < 1) throw std::invalid_argument("sampler config: r_aux >= 1");
  if (step_u < 0.0 || step_tau < 0.0 || step_reshuffle < 0.0 ||
      step_theta < 0.0) {
    throw std::invalid_argument("sampler config: negative step size");
  }
  if (!(theta_prior_var > 0.0)) {
    throw std::invalid_argument("sampler config: theta_prior_var > 0");
  }
  if (!(u_init > 0.0) || !(tau_init > 0.0)) {
    throw std::invalid_argument("sampler config: u_init, tau_init > 0");
  }
  base.validate();
}

std::vector<Partition> Chain::partitions() const {
  std::vector<Partition> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(Partition::from_labels(d.alloc));
  return out;
}

std::vector<double> Chain::k_series() const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) {
    out.push_back(static_cast<double>(d.clusters.size()));
  }
  return out;
}

// --------------------------------------------------------------------------
// allocation update (c')

void update_allocation(SamplerState& state, int i, const Dataset& data,
                       ModelVariant variant, KernelFamily family,
                       const MixingMeasure& measure, const BaseMeasure& base,
                       int r_aux, bool unit_likelihood, Rng& rng,
                       bool* accepted_new) {
  const int old_label = state.alloc[i];
  const bool was_singleton = state.sizes[old_label] == 1;
  ClusterParams old_params;

  // detach observation i; a vacated cluster moves into the auxiliary block
  if (was_singleton) {
    old_params = std::move(state.clusters[old_label]);
    state.clusters.erase(state.clusters.begin() + old_label);
    state.sizes.erase(state.sizes.begin() + old_label);
    for (int& lab : state.alloc) {
      if (lab > old_label) --lab;
    }
  } else {
    --state.sizes[old_label];
  }
  state.alloc[i] = -1;

  const int k = state.k();
  const auto weights =
      predictive_weights(measure, state.sizes, state.u, r_aux);

  std::vector<ClusterParams> aux(r_aux);
  const int n_theta = cluster_theta_dim(variant, data.p);
  for (int l = 0; l < r_aux; ++l) {
    if (l == 0 && was_singleton) {
      aux[0] = old_params;
    } else {
      aux[l] = base.draw(n_theta, rng);
    }
  }

  std::vector<double> lw(k + r_aux);
  for (int j = 0; j < k; ++j) {
    lw[j] = std::log(weights.existing[j]) +
            obs_log_lik(state, data, variant, family, i, state.clusters[j],
                        unit_likelihood);
  }
  const double log_new = std::log(weights.new_per_aux);
  for (int l = 0; l < r_aux; ++l) {
    lw[k + l] = log_new + obs_log_lik(state, data, variant, family, i, aux[l],
                                      unit_likelihood);
  }

  const int pick = rng.categorical_log(lw);
  if (pick < k) {
    state.alloc[i] = pick;
    ++state.sizes[pick];
    if (accepted_new) *accepted_new = false;
  } else {
    state.alloc[i] = k;
    state.clusters.push_back(std::move(aux[pick - k]));
    state.sizes.push_back(1);
    if (accepted_new) *accepted_new = true;
  }
}

// --------------------------------------------------------------------------
// u, tau, alpha

namespace detail {

double log_target_logu(double v, int n, int k, double alpha, double tau) {
  const double u = std::exp(v);
  // u^{n-1} e^{-alpha sqrt(u+tau)} (u+tau)^{k/2-n}, times the Jacobian u
  return n * v - alpha * std::sqrt(u + tau) +
         (0.5 * k - n) * std::log(u + tau);
}

double log_target_logtau(double t, double u, int n, int k, double alpha,
                         double q0_tau, double q1_tau) {
  const double tau = std::exp(t);
  return q0_tau * t - q1_tau * tau -
         alpha * (std::sqrt(u + tau) - std::sqrt(tau)) +
         (0.5 * k - n) * std::log(u + tau);
}

double log_target_cluster(const ClusterParams& params,
                          const SamplerState& state, int j,
                          const Dataset& data, ModelVariant variant,
                          KernelFamily family, const BaseMeasure& base,
                          bool unit_likelihood) {
  const double w = std::log(params.zeta);
  double lt = normal_log_pdf(params.mu, base.mu0[0], std::sqrt(base.tau0sq[0]));
  for (std::size_t l = 0; l < params.theta.size(); ++l) {
    lt += normal_log_pdf(params.theta[l], base.mu0[l + 1],
                         std::sqrt(base.tau0sq[l + 1]));
  }
  lt += -base.q0_gamma * w - base.q1_gamma * std::exp(-w);
  if (!unit_likelihood) {
    for (int i = 0; i < data.n; ++i) {
      if (state.alloc[i] != j) continue;
      lt += obs_log_lik(state, data, variant, family, i, params, false);
    }
  }
  return lt;
}

double log_target_theta(double value, int l, const SamplerState& state,
                        const Dataset& data, KernelFamily family,
                        double theta_prior_var, bool unit_likelihood) {
  double lt = normal_log_pdf(value, 0.0, std::sqrt(theta_prior_var));
  if (!unit_likelihood) {
    ClusterParams trial;
    for (int i = 0; i < data.n; ++i) {
      trial = state.clusters[state.alloc[i]];
      trial.theta = state.theta_common;
      trial.theta[l] = value;
      lt += censored_log_lik(family, data.y[i], data.delta[i], data.x[i],
                             trial);
    }
  }
  return lt;
}

}  // namespace detail

bool update_u(SamplerState& state, const MixingMeasure& measure, double step_u,
              Rng& rng) {
  if (measure.kind != MixingMeasure::Kind::NIG) return false;
  const int n = state.n();
  const int k = state.k();
  const double v_old = std::log(state.u);
  const double jump = rng.normal(0.0, step_u);
  const double v_new = v_old + jump;
  const double ratio =
      detail::log_target_logu(v_new, n, k, state.alpha, state.tau) -
      detail::log_target_logu(v_old, n, k, state.alpha, state.tau);
  if (std::log(rng.uniform_pos()) <= std::min(0.0, ratio)) {
    if (jump != 0.0) state.u = std::exp(v_new);
    return true;
  }
  return false;
}

bool update_tau(SamplerState& state, const MixingMeasure& measure,
                double q0_tau, double q1_tau, double step_tau, Rng& rng) {
  if (measure.kind != MixingMeasure::Kind::NIG) return false;
  const int n = state.n();
  const int k = state.k();
  const double t_old = std::log(state.tau);
  const double jump = rng.normal(0.0, step_tau);
  const double t_new = t_old + jump;
  const double ratio =
      detail::log_target_logtau(t_new, state.u, n, k, state.alpha, q0_tau,
                                q1_tau) -
      detail::log_target_logtau(t_old, state.u, n, k, state.alpha, q0_tau,
                                q1_tau);
  if (std::log(rng.uniform_pos()) <= std::min(0.0, ratio)) {
    if (jump != 0.0) state.tau = std::exp(t_new);
    return true;
  }
  return false;
}

void update_alpha(SamplerState& state, const AlphaMode& mode, Rng& rng) {
  if (mode.kind == AlphaMode::Kind::Fixed) {
    state.alpha = mode.value;
    return;
  }
  const double psi_u = std::sqrt(state.u + state.tau) - std::sqrt(state.tau);
  state.alpha = rng.gamma(mode.q0 + state.k(), mode.q1 + psi_u);
}

// --------------------------------------------------------------------------
// common regression coefficients (M1)

int update_theta_common(SamplerState& state, const Dataset& data,
                        KernelFamily family, double theta_prior_var,
                        double step_theta, bool unit_likelihood, Rng& rng) {
  int accepted = 0;
  for (std::size_t l = 0; l < state.theta_common.size(); ++l) {
    const double old_val = state.theta_common[l];
    const double new_val = old_val + rng.normal(0.0, step_theta);
    const int li = static_cast<int>(l);
    const double ratio =
        detail::log_target_theta(new_val, li, state, data, family,
                                 theta_prior_var, unit_likelihood) -
        detail::log_target_theta(old_val, li, state, data, family,
                                 theta_prior_var, unit_likelihood);
    if (std::log(rng.uniform_pos()) <= std::min(0.0, ratio)) {
      state.theta_common[l] = new_val;
      ++accepted;
    }
  }
  return accepted;
}

// --------------------------------------------------------------------------
// reshuffling move

int reshuffle_clusters(SamplerState& state, const Dataset& data,
                       ModelVariant variant, KernelFamily family,
                       const BaseMeasure& base, double step_reshuffle,
                       bool unit_likelihood, Rng& rng) {
  int accepted = 0;
  for (int j = 0; j < state.k(); ++j) {
    const ClusterParams& cur = state.clusters[j];
    ClusterParams prop = cur;
    prop.mu = cur.mu + rng.normal(0.0, step_reshuffle);
    for (double& t : prop.theta) t += rng.normal(0.0, step_reshuffle);
    const double zeta_jump = rng.normal(0.0, step_reshuffle);
    if (zeta_jump != 0.0) {
      prop.zeta = std::exp(std::log(cur.zeta) + zeta_jump);
    }

    const double ratio =
        detail::log_target_cluster(prop, state, j, data, variant, family, base,
                                   unit_likelihood) -
        detail::log_target_cluster(cur, state, j, data, variant, family, base,
                                   unit_likelihood);
    if (std::log(rng.uniform_pos()) <= std::min(0.0, ratio)) {
      state.clusters[j] = std::move(prop);
      ++accepted;
    }
  }
  return accepted;
}

// --------------------------------------------------------------------------
// full run

Chain run(const Dataset& data, ModelVariant variant, KernelFamily family,
          const MixingMeasure& measure, const SamplerConfig& config) {
  data.validate();
  config.validate();
  if (data.n < 1) throw std::invalid_argument("run: empty dataset");
  if (variant != ModelVariant::M0 && data.p < 1) {
    throw std::invalid_argument("run: M1/M2 need at least one covariate");
  }
  if (config.alpha_mode.kind == AlphaMode::Kind::GammaPrior &&
      measure.kind != MixingMeasure::Kind::NIG) {
    throw std::invalid_argument("run: random alpha needs the N-IG measure");
  }

  Rng rng(config.seed);
  const int n_theta = cluster_theta_dim(variant, data.p);

  SamplerState state;
  state.alloc.resize(data.n);
  state.u = config.u_init;
  state.tau =
      measure.kind == MixingMeasure::Kind::NIG ? config.tau_init : 1.0;
  state.alpha = config.alpha_mode.kind == AlphaMode::Kind::Fixed
                    ? config.alpha_mode.value
                    : 1.0;
  if (variant == ModelVariant::M1) state.theta_common.assign(data.p, 0.0);
  // all-singletons start, parameters fresh from the base
  for (int i = 0; i < data.n; ++i) {
    state.alloc[i] = i;
    state.clusters.push_back(config.base.draw(n_theta, rng));
    state.sizes.push_back(1);
  }

  MixingMeasure local = measure;  // tau lives in the state during the run

  SamplerConfig cfg = config;  // steps mutate under adaptation
  StepTuner tune_u{&cfg.step_u, cfg.adapt_steps};
  StepTuner tune_tau{&cfg.step_tau, cfg.adapt_steps};
  StepTuner tune_reshuffle{&cfg.step_reshuffle, cfg.adapt_steps};
  StepTuner tune_theta{&cfg.step_theta, cfg.adapt_steps};

  Chain chain;
  chain.variant = variant;
  chain.family = family;
  chain.n = data.n;
  chain.p = data.p;
  chain.draws.reserve((config.iters - config.burnin + config.thin - 1) /
                      config.thin);

  for (int iter = 0; iter < config.iters; ++iter) {
    const bool post_burnin = iter >= config.burnin;

    local.tau = state.tau;
    for (int i = 0; i < data.n; ++i) {
      update_allocation(state, i, data, variant, family, local, cfg.base,
                        cfg.r_aux, cfg.unit_likelihood, rng);
    }

    {
      const int moved =
          reshuffle_clusters(state, data, variant, family, cfg.base,
                             cfg.step_reshuffle, cfg.unit_likelihood, rng);
      // aggregate over clusters: treat the sweep as k proposals
      for (int j = 0; j < state.k(); ++j) {
        tune_reshuffle.record(j < moved, post_burnin);
      }
    }

    if (measure.kind == MixingMeasure::Kind::NIG) {
      local.tau = state.tau;
      tune_u.record(update_u(state, local, cfg.step_u, rng), post_burnin);
      tune_tau.record(update_tau(state, local, cfg.q0_tau, cfg.q1_tau,
                                 cfg.step_tau, rng),
                      post_burnin);
      update_alpha(state, cfg.alpha_mode, rng);
    }

    if (variant == ModelVariant::M1) {
      const int acc =
          update_theta_common(state, data, family, cfg.theta_prior_var,
                              cfg.step_theta, cfg.unit_likelihood, rng);
      for (int l = 0; l < data.p; ++l) tune_theta.record(l < acc, post_burnin);
    }

    if (iter >= config.burnin && (iter - config.burnin) % config.thin == 0) {
      ChainDraw draw;
      draw.iter = iter;
      draw.alloc = state.alloc;
      draw.clusters = state.clusters;
      draw.u = state.u;
      draw.tau = state.tau;
      draw.alpha = state.alpha;
      draw.theta_common = state.theta_common;
      draw.loglik.resize(data.n);
      for (int i = 0; i < data.n; ++i) {
        draw.loglik[i] =
            obs_log_lik(state, data, variant, family, i,
                        state.clusters[state.alloc[i]], cfg.unit_likelihood);
      }
      chain.draws.push_back(std::move(draw));
    }
  }

  chain.accept_rates["u"] = tune_u.kept_rate();
  chain.accept_rates["tau"] = tune_tau.kept_rate();
  chain.accept_rates["reshuffle"] = tune_reshuffle.kept_rate();
  if (variant == ModelVariant::M1) {
    chain.accept_rates["theta"] = tune_theta.kept_rate();
  }
  return chain;
}

}  // namespace stratsurv
