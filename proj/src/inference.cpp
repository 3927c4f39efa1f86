#include "stratsurv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "stratsurv/numeric.hpp"

namespace stratsurv {

namespace {
constexpr double kSqrt6 = 2.449489742783178;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

SurvivalCurve predictive_survival(const Chain& chain,
                                  const MixingMeasure& measure,
                                  KernelFamily family, const BaseMeasure& base,
                                  const std::vector<double>& t_grid,
                                  const std::vector<double>& x0, double level,
                                  Rng& rng, int new_cluster_draws) {
  if (chain.draws.empty()) {
    throw std::invalid_argument("predictive_survival: empty chain");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("predictive_survival: empty time grid");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("predictive_survival: level in (0,1)");
  }
  for (double t : t_grid) {
    if (!(t >= 0.0)) {
      throw std::invalid_argument("predictive_survival: negative time");
    }
  }

  const std::size_t grid_n = t_grid.size();
  const int n_theta =
      chain.variant == ModelVariant::M2 ? chain.p : 0;
  std::vector<std::vector<double>> per_draw(grid_n);
  for (auto& col : per_draw) col.reserve(chain.draws.size());

  MixingMeasure local = measure;
  std::vector<ClusterParams> fresh(new_cluster_draws);
  for (const auto& draw : chain.draws) {
    local.tau = draw.tau;
    std::vector<int> sizes(draw.clusters.size());
    {
      std::vector<int> counts(draw.clusters.size(), 0);
      for (int lab : draw.alloc) ++counts[lab];
      sizes = counts;
    }
    auto weights = predictive_weights(local, sizes, draw.u, 1);
    double total = weights.new_per_aux;
    for (double w : weights.existing) total += w;

    for (int l = 0; l < new_cluster_draws; ++l) {
      fresh[l] = base.draw(n_theta, rng);
      if (chain.variant == ModelVariant::M1) {
        fresh[l].theta = draw.theta_common;
      }
    }
    std::vector<ClusterParams> occupied = draw.clusters;
    if (chain.variant == ModelVariant::M1) {
      for (auto& c : occupied) c.theta = draw.theta_common;
    }

    for (std::size_t g = 0; g < grid_n; ++g) {
      const double t = t_grid[g];
      double value = 0.0;
      if (t <= 0.0) {
        value = 1.0;
      } else {
        const double y = std::log(t);
        for (std::size_t j = 0; j < occupied.size(); ++j) {
          value += weights.existing[j] / total *
                   std::exp(log_survival(family, y, x0, occupied[j]));
        }
        double s_new = 0.0;
        for (int l = 0; l < new_cluster_draws; ++l) {
          s_new += std::exp(log_survival(family, y, x0, fresh[l]));
        }
        value += weights.new_per_aux / total * (s_new / new_cluster_draws);
      }
      per_draw[g].push_back(value);
    }
  }

  SurvivalCurve curve;
  curve.t_grid = t_grid;
  curve.mean.resize(grid_n);
  curve.lo.resize(grid_n);
  curve.hi.resize(grid_n);
  const double a = 1.0 - level;
  for (std::size_t g = 0; g < grid_n; ++g) {
    curve.mean[g] = mean_of(per_draw[g]);
    curve.lo[g] = quantile_of(per_draw[g], a / 2.0);
    curve.hi[g] = quantile_of(per_draw[g], 1.0 - a / 2.0);
  }
  return curve;
}

RefitResult stratum_refit(const Dataset& data, const Partition& partition,
                          ModelVariant variant, KernelFamily family,
                          const MixingMeasure& measure,
                          const SamplerConfig& config, double ci_level) {
  if (partition.n() != data.n) {
    throw std::invalid_argument("stratum_refit: partition/dataset mismatch");
  }
  RefitResult result;
  const auto sizes = partition.block_sizes();
  for (int lab = 0; lab < partition.k; ++lab) {
    if (sizes[lab] < 2) {
      result.skipped_singletons.push_back(lab);
      continue;
    }
    StratumRefit refit;
    refit.label = lab;
    refit.size = sizes[lab];
    for (int i = 0; i < data.n; ++i) {
      if (partition.labels[i] == lab) refit.rows.push_back(i);
    }
    Dataset sub = data.subset(refit.rows);

    SamplerConfig cfg = config;
    cfg.seed = derive_seed(config.seed, "refit-" + std::to_string(lab));
    refit.chain = run(sub, variant, family, measure, cfg);

    // pool parameter draws over (retained draw x observation); clusters are
    // weighted by their within-stratum occupancy
    const int p_theta = variant == ModelVariant::M2 ? data.p : 0;
    std::vector<double> mu_pool, zeta_pool;
    std::vector<std::vector<double>> theta_pool(
        variant == ModelVariant::M0 ? 0 : data.p);
    for (const auto& draw : refit.chain.draws) {
      for (int i = 0; i < sub.n; ++i) {
        const auto& c = draw.clusters[draw.alloc[i]];
        mu_pool.push_back(c.mu);
        zeta_pool.push_back(c.zeta);
        for (int l = 0; l < p_theta; ++l) theta_pool[l].push_back(c.theta[l]);
      }
      if (variant == ModelVariant::M1) {
        for (int l = 0; l < data.p; ++l) {
          theta_pool[l].push_back(draw.theta_common[l]);
        }
      }
    }
    const double a = 1.0 - ci_level;
    auto summarize = [&](const std::string& name,
                         const std::vector<double>& pool) {
      refit.summary.push_back({name, quantile_of(pool, 0.5),
                               quantile_of(pool, a / 2.0),
                               quantile_of(pool, 1.0 - a / 2.0)});
    };
    summarize("mu", mu_pool);
    summarize("zeta", zeta_pool);
    for (std::size_t l = 0; l < theta_pool.size(); ++l) {
      summarize("theta_" + std::to_string(l + 1), theta_pool[l]);
    }
    result.strata.push_back(std::move(refit));
  }
  return result;
}

double lpml(const Chain& chain, int* flagged) {
  if (chain.draws.empty()) throw std::invalid_argument("lpml: empty chain");
  const int n = chain.n;
  int flagged_count = 0;
  double total = 0.0;
  std::vector<double> neg_ll;
  neg_ll.reserve(chain.draws.size());
  for (int i = 0; i < n; ++i) {
    neg_ll.clear();
    bool saw_inf = false;
    for (const auto& draw : chain.draws) {
      const double ll = draw.loglik.at(i);
      if (ll == -kInf) {
        saw_inf = true;
        continue;
      }
      neg_ll.push_back(-ll);
    }
    if (saw_inf) ++flagged_count;
    if (neg_ll.empty()) {
      total += -kInf;  // every draw degenerate for this observation
      continue;
    }
    // log CPO_i = log M_fin - logsumexp(-ll)
    total += std::log(static_cast<double>(neg_ll.size())) -
             log_sum_exp(neg_ll);
  }
  if (flagged) *flagged = flagged_count;
  return total;
}

double waic(const Chain& chain) {
  const int m = static_cast<int>(chain.draws.size());
  if (m < 2) {
    throw std::invalid_argument("waic: needs at least two draws");
  }
  const int n = chain.n;
  double lppd = 0.0;
  double p_waic = 0.0;
  std::vector<double> ll(m);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < m; ++d) ll[d] = chain.draws[d].loglik.at(i);
    lppd += log_sum_exp(ll) - std::log(static_cast<double>(m));
    p_waic += variance_of(ll);  // population convention
  }
  return -2.0 * (lppd - p_waic);
}

double KaplanMeier::at(double t) const {
  double s = 1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (t < times[i]) break;
    s = survival[i];
  }
  return s;
}

KaplanMeier kaplan_meier(const std::vector<double>& times,
                         const std::vector<int>& delta) {
  if (times.size() != delta.size()) {
    throw std::invalid_argument("kaplan_meier: length mismatch");
  }
  for (double t : times) {
    if (!(t > 0.0)) {
      throw std::invalid_argument("kaplan_meier: times must be positive");
    }
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  KaplanMeier km;
  double s = 1.0;
  std::size_t idx = 0;
  const std::size_t n = times.size();
  while (idx < n) {
    const double t = times[order[idx]];
    const long long at_risk = static_cast<long long>(n - idx);
    long long events = 0;
    while (idx < n && times[order[idx]] == t) {
      events += delta[order[idx]];
      ++idx;
    }
    if (events > 0) {
      s *= 1.0 - static_cast<double>(events) / at_risk;
      km.times.push_back(t);
      km.survival.push_back(s);
    }
  }
  return km;
}

ClusterParams weibull_mle(const std::vector<double>& y,
                          const std::vector<int>& delta) {
  if (y.size() != delta.size()) {
    throw std::invalid_argument("weibull_mle: length mismatch");
  }
  const int n = static_cast<int>(y.size());
  long long n_events = 0;
  double sum_log_events = 0.0;
  for (int i = 0; i < n; ++i) {
    if (delta[i] == 1) {
      ++n_events;
      sum_log_events += y[i];
    }
  }
  if (n_events < 2) {
    throw std::invalid_argument("weibull_mle: needs >= 2 exact observations");
  }

  // profile score in the Weibull shape c; y already lives on the log scale
  auto weighted_mean = [&](double c) {
    double max_w = -kInf;
    for (int i = 0; i < n; ++i) max_w = std::max(max_w, c * y[i]);
    double denom = 0.0, numer = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = std::exp(c * y[i] - max_w);
      denom += w;
      numer += w * y[i];
    }
    return numer / denom;
  };
  auto score = [&](double c) {
    return static_cast<double>(n_events) / c + sum_log_events -
           static_cast<double>(n_events) * weighted_mean(c);
  };

  double lo = 1e-8;
  double hi = 1.0;
  int iters = 0;
  while (score(hi) > 0.0) {
    hi *= 2.0;
    if (++iters > 60 || hi > 1e9) {
      throw std::runtime_error(
          "weibull_mle: shape diverging (zeta at the zero boundary)");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) > 0.0 ? lo : hi) = mid;
  }
  double c = 0.5 * (lo + hi);
  // few Newton polish steps on the score
  for (int it = 0; it < 8; ++it) {
    const double h = 1e-6 * c;
    const double g = score(c);
    const double dg = (score(c + h) - score(c - h)) / (2.0 * h);
    if (!(std::abs(dg) > 0.0)) break;
    const double next = c - g / dg;
    if (next > 0.0 && std::isfinite(next)) c = next;
    if (std::abs(score(c)) < 1e-13 * n_events) break;
  }

  // lambda^c = sum t_i^c / n_events, then back to (mu, zeta)
  double max_w = -kInf;
  for (int i = 0; i < n; ++i) max_w = std::max(max_w, c * y[i]);
  double sum_tc = 0.0;
  for (int i = 0; i < n; ++i) sum_tc += std::exp(c * y[i] - max_w);
  const double log_lambda =
      (max_w + std::log(sum_tc) - std::log(static_cast<double>(n_events))) / c;

  ClusterParams params;
  params.mu = log_lambda - kEulerMascheroni / c;
  params.zeta = M_PI / (c * kSqrt6);
  return params;
}

DiagResult diagnostics(const std::vector<double>& series, int max_lag) {
  const int n = static_cast<int>(series.size());
  if (n < 100) {
    throw std::invalid_argument("diagnostics: series shorter than 100");
  }
  DiagResult out;

  const double mean = mean_of(series);
  const double var = variance_of(series);
  max_lag = std::min(max_lag, n - 1);
  out.acf.assign(max_lag + 1, 0.0);
  out.acf[0] = 1.0;
  if (var <= 0.0) {
    out.degenerate = true;
    out.geweke_z = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  for (int lag = 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (int t = 0; t + lag < n; ++t) {
      s += (series[t] - mean) * (series[t + lag] - mean);
    }
    out.acf[lag] = s / (n * var);
  }

  const int n_a = std::max(2, n / 10);
  const int n_b = n / 2;
  std::span<const double> a(series.data(), n_a);
  std::span<const double> b(series.data() + (n - n_b), n_b);
  const double se_a = batch_means_se(a);
  const double se_b = batch_means_se(b);
  out.geweke_z =
      (mean_of(a) - mean_of(b)) / std::sqrt(se_a * se_a + se_b * se_b);
  return out;
}

}  // namespace stratsurv
