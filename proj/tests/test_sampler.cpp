#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "stratsurv/numeric.hpp"
#include "stratsurv/sampler.hpp"

using namespace stratsurv;

namespace {

BaseMeasure default_base(int n_theta) {
  BaseMeasure base;
  base.mu0.assign(1 + n_theta, 0.0);
  base.tau0sq.assign(1 + n_theta, 20.0);
  base.q0_gamma = 5.0;
  base.q1_gamma = 1.0;
  return base;
}

Dataset flat_dataset(std::vector<double> y, int p = 0) {
  Dataset data;
  data.n = static_cast<int>(y.size());
  data.p = p;
  data.y = std::move(y);
  data.delta.assign(data.n, 1);
  data.x.assign(data.n, std::vector<double>(p, 0.0));
  return data;
}

SamplerState make_state(std::vector<int> alloc,
                        std::vector<ClusterParams> clusters) {
  SamplerState state;
  state.alloc = std::move(alloc);
  state.clusters = std::move(clusters);
  state.sizes.assign(state.clusters.size(), 0);
  for (int lab : state.alloc) ++state.sizes[lab];
  return state;
}

void check_draw_consistency(const ChainDraw& draw, int n) {
  REQUIRE(static_cast<int>(draw.alloc.size()) == n);
  const int k = static_cast<int>(draw.clusters.size());
  std::vector<int> counts(k, 0);
  for (int lab : draw.alloc) {
    REQUIRE(lab >= 0);
    REQUIRE(lab < k);
    ++counts[lab];
  }
  for (int c : counts) REQUIRE(c > 0);
}

}  // namespace

TEST_SUITE_BEGIN("sampler");

TEST_CASE("allocation with a single observation always lands somewhere") {
  const auto data = flat_dataset({0.4});
  const auto measure = MixingMeasure::nig(1.0, 1.0);
  const auto base = default_base(0);
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto state = make_state({0}, {{0.0, 1.0, {}}});
    state.u = 1.0;
    update_allocation(state, 0, data, ModelVariant::M0,
                      KernelFamily::TypeIMinimum, measure, base, 3, false, rng);
    state.check_invariants();
    CHECK(state.k() == 1);
  }
}

TEST_CASE("unit-likelihood allocation frequencies match the prior weights") {
  // clusters of sizes (2, 1) after removing the updated singleton; with
  // u = 3, tau = 1, alpha = 1 the unnormalized weights are 1.5, 0.5 and 1.0
  const auto data = flat_dataset({0.0, 0.0, 0.0, 0.0});
  const auto measure = MixingMeasure::nig(1.0, 1.0);
  const auto base = default_base(0);
  Rng rng(17);
  const int trials = 100000;
  std::map<int, int> counts;  // 0 = cluster A, 1 = cluster B, 2 = fresh
  for (int t = 0; t < trials; ++t) {
    auto state = make_state({0, 0, 1, 2},
                            {{-1.0, 1.0, {}}, {1.0, 1.0, {}}, {5.0, 1.0, {}}});
    state.u = 3.0;
    state.tau = 1.0;
    state.alpha = 1.0;
    update_allocation(state, 3, data, ModelVariant::M0, KernelFamily::Normal,
                      measure, base, 3, true, rng);
    state.check_invariants();
    ++counts[state.alloc[3]];
  }
  const double total = 1.5 + 0.5 + 1.0;
  const std::map<int, double> expected{
      {0, 1.5 / total}, {1, 0.5 / total}, {2, 1.0 / total}};
  for (const auto& [label, prob] : expected) {
    const double freq = static_cast<double>(counts[label]) / trials;
    const double se = std::sqrt(prob * (1.0 - prob) / trials);
    CHECK(std::abs(freq - prob) < 3.0 * se);
  }
}

TEST_CASE("likelihood dominance with well-separated clusters") {
  Dataset data = flat_dataset({-10.0, -10.0, 10.0, 10.0, 10.0});
  const auto measure = MixingMeasure::nig(1.0, 1.0);
  // base centered at zero: fresh components cannot compete at y = 10
  auto base = default_base(0);
  base.tau0sq[0] = 1.0;
  Rng rng(29);
  int to_far = 0;
  const int trials = 5000;
  for (int t = 0; t < trials; ++t) {
    auto state = make_state({0, 0, 1, 1, 0},
                            {{-10.0, 0.1, {}}, {10.0, 0.1, {}}});
    update_allocation(state, 4, data, ModelVariant::M0, KernelFamily::Normal,
                      measure, base, 3, false, rng);
    to_far += state.alloc[4] == 1;
  }
  CHECK(static_cast<double>(to_far) / trials >= 0.999);
}

TEST_CASE("update_u long-run mean matches the quadrature oracle") {
  const int n = 5, k = 2;
  const double alpha = 1.0, tau = 1.0;
  auto density = [&](double u) {
    return std::pow(u, n - 1) * std::exp(-alpha * std::sqrt(u + tau)) *
           std::pow(u + tau, 0.5 * k - n);
  };
  const double mass = oracles::simpson_halfline(density, 100000);
  const double mean_ref =
      oracles::simpson_halfline([&](double u) { return u * density(u); },
                                100000) /
      mass;

  const auto measure = MixingMeasure::nig(alpha, tau);
  auto state = make_state({0, 0, 0, 1, 1},
                          {{0.0, 1.0, {}}, {0.0, 1.0, {}}});
  state.alpha = alpha;
  state.tau = tau;
  Rng rng(41);
  std::vector<double> samples;
  samples.reserve(200000);
  for (int it = 0; it < 201000; ++it) {
    update_u(state, measure, 1.6, rng);
    if (it >= 1000) samples.push_back(state.u);
  }
  const double se = batch_means_se(samples);
  CHECK(std::abs(mean_of(samples) - mean_ref) < 3.0 * se);
}

TEST_CASE("update_tau long-run mean matches the quadrature oracle") {
  const int n = 5, k = 2;
  const double alpha = 1.0, u = 1.0, q0 = 1.0, q1 = 1.0;
  auto density = [&](double tau) {
    return std::pow(tau, q0 - 1.0) * std::exp(-q1 * tau) *
           std::exp(-alpha * (std::sqrt(u + tau) - std::sqrt(tau))) *
           std::pow(u + tau, 0.5 * k - n);
  };
  const double mass = oracles::simpson_halfline(density, 100000);
  const double mean_ref =
      oracles::simpson_halfline([&](double t) { return t * density(t); },
                                100000) /
      mass;

  const auto measure = MixingMeasure::nig(alpha, 1.0);
  auto state = make_state({0, 0, 0, 1, 1},
                          {{0.0, 1.0, {}}, {0.0, 1.0, {}}});
  state.alpha = alpha;
  state.u = u;
  Rng rng(43);
  std::vector<double> samples;
  samples.reserve(200000);
  for (int it = 0; it < 201000; ++it) {
    update_tau(state, measure, q0, q1, 1.6, rng);
    if (it >= 1000) samples.push_back(state.tau);
  }
  const double se = batch_means_se(samples);
  CHECK(std::abs(mean_of(samples) - mean_ref) < 3.0 * se);
}

TEST_CASE("tau concentrates below the prior when n >> k") {
  const auto measure = MixingMeasure::nig(1.0, 1.0);
  auto state = make_state(std::vector<int>(40, 0), {{0.0, 1.0, {}}});
  state.u = 1.0;
  Rng rng(47);
  std::vector<double> tau_draws, prior_draws;
  for (int it = 0; it < 40000; ++it) {
    update_tau(state, measure, 1.0, 1.0, 1.8, rng);
    if (it >= 1000) {
      tau_draws.push_back(state.tau);
      prior_draws.push_back(rng.gamma(1.0, 1.0));
    }
  }
  CHECK(mean_of(tau_draws) < mean_of(prior_draws) - 0.2);
}

TEST_CASE("zero-step proposals are always accepted") {
  const auto measure = MixingMeasure::nig(1.0, 1.0);
  auto data = flat_dataset({0.1, -0.2, 0.3}, 1);
  data.x = {{0.5}, {-0.5}, {1.0}};
  Rng rng(53);
  auto state = make_state({0, 0, 1}, {{0.0, 1.0, {1.0}}, {1.0, 0.5, {0.0}}});
  state.theta_common = {0.7};
  const auto snapshot_u = state.u;
  const auto snapshot_tau = state.tau;
  for (int rep = 0; rep < 100; ++rep) {
    CHECK(update_u(state, measure, 0.0, rng));
    CHECK(update_tau(state, measure, 1.0, 1.0, 0.0, rng));
    CHECK(reshuffle_clusters(state, data, ModelVariant::M2,
                             KernelFamily::Logistic, default_base(1), 0.0,
                             false, rng) == state.k());
    CHECK(update_theta_common(state, data, KernelFamily::Logistic, 4.0, 0.0,
                              false, rng) == 1);
  }
  CHECK(state.u == snapshot_u);
  CHECK(state.tau == snapshot_tau);
}

TEST_CASE("update_alpha: conjugate draw and fixed mode") {
  Rng rng(59);
  // psi(u) = 1 at u = 3, tau = 1: Gamma(1 + 2, 1 + 1) has mean 1.5
  auto state = make_state({0, 0, 1}, {{0.0, 1.0, {}}, {0.0, 1.0, {}}});
  state.u = 3.0;
  state.tau = 1.0;
  std::vector<double> draws(200000);
  const auto mode = AlphaMode::gamma_prior(1.0, 1.0);
  for (auto& d : draws) {
    update_alpha(state, mode, rng);
    d = state.alpha;
  }
  const double se = std::sqrt(variance_of(draws) / draws.size());
  CHECK(std::abs(mean_of(draws) - 1.5) < 3.0 * se);

  update_alpha(state, AlphaMode::fixed(1.0), rng);
  CHECK(state.alpha == 1.0);

  // k = 1, psi(u) = 0: exact Gamma(q0 + 1, q1) with mean 2
  auto single = make_state({0, 0, 0}, {{0.0, 1.0, {}}});
  single.u = 0.0;
  single.tau = 1.0;
  std::vector<double> boundary(200000);
  for (auto& d : boundary) {
    update_alpha(single, mode, rng);
    d = single.alpha;
  }
  const double se2 = std::sqrt(variance_of(boundary) / boundary.size());
  CHECK(std::abs(mean_of(boundary) - 2.0) < 3.0 * se2);
}

TEST_CASE("MH log ratios are antisymmetric (Hastings identity)") {
  Rng rng(61);
  for (int rep = 0; rep < 200; ++rep) {
    const double v1 = rng.normal(0.0, 2.0);
    const double v2 = rng.normal(0.0, 2.0);
    const int n = 3 + rng.uniform_int(40);
    const int k = 1 + rng.uniform_int(4);
    const double alpha = std::exp(rng.normal(0.0, 0.5));
    const double tau = std::exp(rng.normal(0.0, 0.5));
    const double fwd = detail::log_target_logu(v2, n, k, alpha, tau) -
                       detail::log_target_logu(v1, n, k, alpha, tau);
    const double bwd = detail::log_target_logu(v1, n, k, alpha, tau) -
                       detail::log_target_logu(v2, n, k, alpha, tau);
    CHECK(fwd + bwd == 0.0);

    const double u = std::exp(rng.normal(0.0, 1.0));
    const double f2 = detail::log_target_logtau(v2, u, n, k, alpha, 1.0, 1.0) -
                      detail::log_target_logtau(v1, u, n, k, alpha, 1.0, 1.0);
    const double b2 = detail::log_target_logtau(v1, u, n, k, alpha, 1.0, 1.0) -
                      detail::log_target_logtau(v2, u, n, k, alpha, 1.0, 1.0);
    CHECK(f2 + b2 == 0.0);
  }

  // cluster and theta targets through the same identity
  auto data = flat_dataset({0.4, -0.7, 1.2, 0.1}, 1);
  data.x = {{0.2}, {-1.0}, {0.7}, {0.0}};
  data.delta = {1, 0, 1, 1};
  auto state = make_state({0, 0, 1, 1}, {{0.0, 0.8, {0.3}}, {1.0, 0.4, {-0.2}}});
  state.theta_common = {0.1};
  const auto base = default_base(1);
  for (int rep = 0; rep < 100; ++rep) {
    ClusterParams a{rng.normal(), std::exp(rng.normal()), {rng.normal()}};
    ClusterParams b{rng.normal(), std::exp(rng.normal()), {rng.normal()}};
    const double f = detail::log_target_cluster(a, state, 0, data,
                                                ModelVariant::M2,
                                                KernelFamily::TypeIMinimum,
                                                base, false) -
                     detail::log_target_cluster(b, state, 0, data,
                                                ModelVariant::M2,
                                                KernelFamily::TypeIMinimum,
                                                base, false);
    const double bk = detail::log_target_cluster(b, state, 0, data,
                                                 ModelVariant::M2,
                                                 KernelFamily::TypeIMinimum,
                                                 base, false) -
                      detail::log_target_cluster(a, state, 0, data,
                                                 ModelVariant::M2,
                                                 KernelFamily::TypeIMinimum,
                                                 base, false);
    CHECK(f + bk == 0.0);

    const double t1 = rng.normal(), t2 = rng.normal();
    const double ft = detail::log_target_theta(t1, 0, state, data,
                                               KernelFamily::Normal, 4.0,
                                               false) -
                      detail::log_target_theta(t2, 0, state, data,
                                               KernelFamily::Normal, 4.0,
                                               false);
    const double bt = detail::log_target_theta(t2, 0, state, data,
                                               KernelFamily::Normal, 4.0,
                                               false) -
                      detail::log_target_theta(t1, 0, state, data,
                                               KernelFamily::Normal, 4.0,
                                               false);
    CHECK(ft + bt == 0.0);
  }
}

TEST_CASE("theta prior recovery under forced-constant likelihood") {
  auto data = flat_dataset({0.0, 0.0, 0.0}, 1);
  data.x = {{1.0}, {2.0}, {3.0}};
  auto state = make_state({0, 1, 2},
                          {{0.0, 1.0, {}}, {0.0, 1.0, {}}, {0.0, 1.0, {}}});
  state.theta_common = {0.0};
  const double prior_var = 4.0;
  Rng rng(67);
  std::vector<double> draws;
  for (int it = 0; it < 200000; ++it) {
    update_theta_common(state, data, KernelFamily::Normal, prior_var, 3.0,
                        true, rng);
    if (it >= 2000 && it % 50 == 0) draws.push_back(state.theta_common[0]);
  }
  auto cdf = [&](double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * prior_var));
  };
  // KS at the 1% level on near-independent thinned draws
  const double crit = 1.628 / std::sqrt(static_cast<double>(draws.size()));
  CHECK(oracles::ks_distance(draws, cdf) < crit);
}

TEST_CASE("reshuffle near-conjugate check against the sample mean") {
  Rng data_rng(71);
  std::vector<double> y(30);
  for (auto& v : y) v = data_rng.normal(2.0, 0.5);
  const auto data = flat_dataset(y);
  BaseMeasure base = default_base(0);
  base.tau0sq[0] = 1e6;  // flat-ish location prior

  auto state = make_state(std::vector<int>(30, 0), {{1.0, 0.5, {}}});
  Rng rng(73);
  std::vector<double> mus;
  for (int it = 0; it < 120000; ++it) {
    reshuffle_clusters(state, data, ModelVariant::M0, KernelFamily::Normal,
                       base, 0.25, false, rng);
    if (it >= 5000) mus.push_back(state.clusters[0].mu);
  }
  const double se = batch_means_se(mus);
  CHECK(std::abs(mean_of(mus) - mean_of(y)) < 3.0 * se + 1e-4);
}

TEST_CASE("run bookkeeping: draw count, determinism, invariants") {
  Rng gen_rng(79);
  std::vector<double> y(12);
  for (auto& v : y) v = gen_rng.normal(1.0, 0.4);
  const auto data = flat_dataset(y);
  const auto measure = MixingMeasure::nig(1.0, 1.0);

  SamplerConfig config;
  config.iters = 31;
  config.burnin = 30;
  config.thin = 1;
  config.base = default_base(0);
  config.seed = 99;
  const auto one = run(data, ModelVariant::M0, KernelFamily::TypeIMinimum,
                       measure, config);
  CHECK(one.draws.size() == 1);

  config.iters = 250;
  config.burnin = 100;
  config.thin = 3;
  const auto a = run(data, ModelVariant::M0, KernelFamily::TypeIMinimum,
                     measure, config);
  const auto b = run(data, ModelVariant::M0, KernelFamily::TypeIMinimum,
                     measure, config);
  CHECK(a.draws.size() == 50);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t m = 0; m < a.draws.size(); ++m) {
    CHECK(a.draws[m].alloc == b.draws[m].alloc);
    CHECK(a.draws[m].u == b.draws[m].u);
    CHECK(a.draws[m].tau == b.draws[m].tau);
    CHECK(a.draws[m].alpha == b.draws[m].alpha);
    CHECK(a.draws[m].loglik == b.draws[m].loglik);
    check_draw_consistency(a.draws[m], data.n);
  }
}

TEST_CASE("common theta concentrates near the truth on strong data") {
  // one stratum, strong signal: theta = -1.5
  Rng gen_rng(83);
  Dataset data;
  data.n = 500;
  data.p = 1;
  ClusterParams truth{1.0, 0.15, {-1.5}};
  for (int i = 0; i < data.n; ++i) {
    std::vector<double> x{gen_rng.normal(0.0, 0.5)};
    data.y.push_back(
        sample(KernelFamily::TypeIMinimum, truth, x, gen_rng));
    data.x.push_back(x);
    data.delta.push_back(1);
  }

  SamplerConfig config;
  config.iters = 2500;
  config.burnin = 1000;
  config.base = default_base(1);
  config.base.mu0[0] = mean_of(data.y);
  config.base.tau0sq[0] =
      variance_of(data.y) * data.n / (data.n - 1.0);
  config.seed = 4242;
  const auto chain = run(data, ModelVariant::M1, KernelFamily::TypeIMinimum,
                         MixingMeasure::nig(1.0, 1.0), config);
  std::vector<double> theta;
  for (const auto& d : chain.draws) theta.push_back(d.theta_common[0]);
  CHECK(std::abs(mean_of(theta) + 1.5) < 0.1);
}

TEST_CASE("unit-likelihood partition law matches the EPPF oracle (n=3)") {
  const auto data = flat_dataset({0.0, 0.0, 0.0});
  const auto measure = MixingMeasure::nig(1.0, 1.0);

  SamplerConfig config;
  config.iters = 102000;
  config.burnin = 2000;
  config.base = default_base(0);
  config.seed = 31337;
  config.unit_likelihood = true;
  config.step_tau = 0.0;  // tau fixed at tau_init = 1
  config.tau_init = 1.0;
  const auto chain = run(data, ModelVariant::M0, KernelFamily::Normal, measure,
                         config);

  std::map<std::vector<int>, int> counts;
  for (const auto& p : chain.partitions()) ++counts[p.labels];

  double tv = 0.0;
  const auto all = oracles::set_partitions(3);
  const double total = static_cast<double>(chain.draws.size());
  for (const auto& labels : all) {
    const double expected = eppf(measure, oracles::block_sizes(labels));
    const double observed = counts.count(labels) ? counts[labels] / total : 0.0;
    tv += 0.5 * std::abs(expected - observed);
  }
  CHECK(tv < 0.02);
  // tau stayed fixed throughout
  for (const auto& d : chain.draws) CHECK(d.tau == 1.0);
}

TEST_SUITE_END();
