#include "stratsurv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "stratsurv/numeric.hpp"
#include "stratsurv/partitions.hpp"

namespace stratsurv {

void DgpSpec::validate() const {
  if (strata.empty() || strata.size() != sizes.size()) {
    throw std::invalid_argument("dgp: strata/sizes mismatch");
  }
  const std::size_t p = strata.front().theta.size();
  for (const auto& s : strata) {
    if (!(s.zeta > 0.0) || !std::isfinite(s.mu)) {
      throw std::invalid_argument("dgp: bad stratum parameters");
    }
    if (s.theta.size() != p) {
      throw std::invalid_argument("dgp: theta dimensions differ across strata");
    }
  }
  for (int c : sizes) {
    if (c < 1) throw std::invalid_argument("dgp: stratum sizes >= 1");
  }
  if (!(covariate_var > 0.0)) {
    throw std::invalid_argument("dgp: covariate variance > 0");
  }
  if (censor_fraction < 0.0 || censor_fraction >= 1.0) {
    throw std::invalid_argument("dgp: censor fraction in [0, 1)");
  }
}

int DgpSpec::total_n() const {
  int n = 0;
  for (int c : sizes) n += c;
  return n;
}

int DgpSpec::n_covariates() const {
  return static_cast<int>(strata.front().theta.size());
}

DgpSpec dgp_preset(const std::string& name, int n) {
  if (n < 3) throw std::invalid_argument("dgp_preset: n >= 3");
  DgpSpec spec;
  const int third = n / 3;
  spec.sizes = {third, third, n - 2 * third};
  std::vector<double> thetas;
  if (name == "D0") {
    thetas = {0.0, 0.0, 0.0};
  } else if (name == "D1") {
    thetas = {-1.5, -1.5, -1.5};
  } else if (name == "D2") {
    thetas = {-1.5, 1.6, -0.1};
  } else {
    throw std::invalid_argument("dgp_preset: unknown preset " + name);
  }
  spec.strata = {{1.0, 0.15, {thetas[0]}},
                 {3.0, 0.10, {thetas[1]}},
                 {2.0, 0.12, {thetas[2]}}};
  return spec;
}

Generated generate(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  Generated out;
  out.data.n = spec.total_n();
  out.data.p = spec.n_covariates();
  out.data.y.reserve(out.data.n);
  out.data.delta.assign(out.data.n, 1);
  out.data.x.reserve(out.data.n);
  std::vector<int> labels;
  labels.reserve(out.data.n);

  const double cov_sd = std::sqrt(spec.covariate_var);
  for (std::size_t j = 0; j < spec.strata.size(); ++j) {
    const auto& stratum = spec.strata[j];
    ClusterParams params{stratum.mu, stratum.zeta, stratum.theta};
    for (int c = 0; c < spec.sizes[j]; ++c) {
      std::vector<double> x(out.data.p);
      for (double& v : x) v = rng.normal(0.0, cov_sd);
      out.data.y.push_back(sample(spec.family, params, x, rng));
      out.data.time.push_back(std::exp(out.data.y.back()));
      out.data.x.push_back(std::move(x));
      labels.push_back(static_cast<int>(j));
    }
  }
  out.truth = Partition::from_labels(labels);
  return out;
}

Dataset apply_censoring(const Dataset& data, double target_fraction,
                        Rng& rng) {
  if (target_fraction < 0.0 || target_fraction > 0.9) {
    throw std::invalid_argument("apply_censoring: target in [0, 0.9]");
  }
  for (int d : data.delta) {
    if (d != 1) {
      throw std::invalid_argument("apply_censoring: input must be all exact");
    }
  }
  if (target_fraction == 0.0) return data;

  // expected censored fraction on the realized times:
  // g(lambda) = mean_i P(C < t_i) = mean_i (1 - e^{-lambda t_i})
  std::vector<double> times = data.time;
  if (times.empty()) {
    times.resize(data.n);
    for (int i = 0; i < data.n; ++i) times[i] = std::exp(data.y[i]);
  }
  auto expected_fraction = [&](double lambda) {
    double s = 0.0;
    for (double t : times) s += 1.0 - std::exp(-lambda * t);
    return s / data.n;
  };
  double lo = 1e-12, hi = 1.0;
  int guard = 0;
  while (expected_fraction(hi) < target_fraction) {
    hi *= 2.0;
    if (++guard > 200) {
      throw std::invalid_argument("apply_censoring: infeasible target");
    }
  }
  while (expected_fraction(lo) > target_fraction) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_fraction(mid) < target_fraction ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);

  Dataset out = data;
  if (out.time.empty()) out.time = times;
  for (int i = 0; i < out.n; ++i) {
    const double censor_time = rng.exponential(lambda);
    if (censor_time < times[i]) {
      out.y[i] = std::log(censor_time);
      out.time[i] = censor_time;
      out.delta[i] = 0;
    }
  }
  return out;
}

namespace {

struct StudyTask {
  StudyRow row;          // filled except rand/k/runtime
  DgpSpec dgp;
  std::size_t index = 0;
};

void run_task(const StudyConfig& config, StudyTask& task) {
  const auto started = std::chrono::steady_clock::now();
  try {
    Rng rng(task.row.seed);
    Generated gen = generate(task.dgp, rng);
    Dataset data = task.row.censor_level > 0.0
                       ? apply_censoring(gen.data, task.row.censor_level, rng)
                       : gen.data;

    SamplerConfig cfg = config.sampler;
    cfg.seed = derive_seed(task.row.seed, "fit");
    // data-driven base measure location, per-cluster effects vague around 0
    cfg.base.mu0.assign(1 + data.p, 0.0);
    cfg.base.tau0sq.assign(1 + data.p, 20.0);
    cfg.base.mu0[0] = mean_of(data.y);
    cfg.base.tau0sq[0] = std::max(1e-8, variance_of(data.y) *
                                            data.n / (data.n - 1.0));
    Chain chain =
        run(data, task.row.variant, task.row.kernel, config.measure, cfg);

    const auto partitions = chain.partitions();
    const auto opt = optimal_partition(partitions);
    task.row.rand_index = rand_index(opt.partition, gen.truth);
    task.row.k_hat = opt.partition.k;
  } catch (const std::exception& ex) {
    task.row.error = ex.what();
    task.row.rand_index = std::numeric_limits<double>::quiet_NaN();
    task.row.k_hat = -1;
  }
  task.row.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
}

}  // namespace

std::vector<StudyRow> replicate_study(const StudyConfig& config) {
  if (config.replicates < 1) {
    throw std::invalid_argument("study: replicates >= 1");
  }
  std::vector<StudyTask> tasks;
  std::size_t index = 0;
  for (const auto& dgp_name : config.dgps) {
    for (const auto variant : config.variants) {
      for (const auto kernel : config.kernels) {
        for (const int n : config.sizes) {
          for (const double censor : config.censor_levels) {
            for (int rep = 0; rep < config.replicates; ++rep) {
              StudyTask task;
              task.dgp = dgp_preset(dgp_name, n);
              task.row.dgp = dgp_name;
              task.row.variant = variant;
              task.row.kernel = kernel;
              task.row.n = n;
              task.row.censor_level = censor;
              task.row.replicate = rep;
              const std::string tag = dgp_name + "/" + to_string(variant) +
                                      "/" + to_string(kernel) + "/" +
                                      std::to_string(n) + "/" +
                                      std::to_string(censor) + "/" +
                                      std::to_string(rep);
              task.row.seed = derive_seed(config.seed, tag);
              task.index = index++;
              tasks.push_back(std::move(task));
            }
          }
        }
      }
    }
  }

  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) break;
      run_task(config, tasks[idx]);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<StudyRow> rows;
  rows.reserve(tasks.size());
  for (auto& task : tasks) rows.push_back(std::move(task.row));
  return rows;  // tasks were laid out in (cell, replicate) order
}

}  // namespace stratsurv
