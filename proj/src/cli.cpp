#include "stratsurv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "stratsurv/inference.hpp"
#include "stratsurv/io.hpp"
#include "stratsurv/numeric.hpp"
#include "stratsurv/simulation.hpp"

namespace stratsurv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// resolved run configuration: file values < flag values, echoed to outdir

struct RunConfig {
  std::string variant = "M2";
  std::string family = "type1min";

  std::string measure_kind = "nig";
  double alpha = 1.0;
  double tau = 1.0;
  double mass = 1.0;
  double theta_py = 1.0;
  double sigma_py = 0.25;

  int iters = 5000;
  int burnin = 3000;
  int thin = 1;
  int r_aux = 3;
  double step_u = 1.0;
  double step_tau = 1.0;
  double step_reshuffle = 0.5;
  double step_theta = 0.5;
  bool adapt_steps = true;
  std::string alpha_prior;  // empty = fixed at `alpha`; else "q0,q1"
  double q0_tau = 1.0;
  double q1_tau = 1.0;
  double theta_prior_var = 20.0;
  double q0_gamma = 5.0;
  double q1_gamma = 1.0;
  std::vector<double> base_mu0;     // empty = data-driven default
  std::vector<double> base_tau0sq;
  std::uint64_t seed = 42;
  bool center = false;
  std::string data;
  std::string outdir;

  json to_json() const {
    json j;
    j["variant"] = variant;
    j["family"] = family;
    j["measure"] = {{"kind", measure_kind}, {"alpha", alpha},   {"tau", tau},
                    {"mass", mass},         {"theta_py", theta_py},
                    {"sigma_py", sigma_py}};
    j["iters"] = iters;
    j["burnin"] = burnin;
    j["thin"] = thin;
    j["r_aux"] = r_aux;
    j["step_u"] = step_u;
    j["step_tau"] = step_tau;
    j["step_reshuffle"] = step_reshuffle;
    j["step_theta"] = step_theta;
    j["adapt_steps"] = adapt_steps;
    j["alpha_prior"] = alpha_prior;
    j["q0_tau"] = q0_tau;
    j["q1_tau"] = q1_tau;
    j["theta_prior_var"] = theta_prior_var;
    j["q0_gamma"] = q0_gamma;
    j["q1_gamma"] = q1_gamma;
    j["base_mu0"] = base_mu0;
    j["base_tau0sq"] = base_tau0sq;
    j["seed"] = seed;
    j["center"] = center;
    j["data"] = data;
    j["outdir"] = outdir;
    return j;
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    auto get = [&j](const char* key, auto& into) {
      if (j.contains(key)) into = j.at(key).get<std::decay_t<decltype(into)>>();
    };
    get("variant", c.variant);
    get("family", c.family);
    if (j.contains("measure")) {
      const auto& m = j.at("measure");
      auto getm = [&m](const char* key, auto& into) {
        if (m.contains(key)) {
          into = m.at(key).get<std::decay_t<decltype(into)>>();
        }
      };
      getm("kind", c.measure_kind);
      getm("alpha", c.alpha);
      getm("tau", c.tau);
      getm("mass", c.mass);
      getm("theta_py", c.theta_py);
      getm("sigma_py", c.sigma_py);
    }
    get("iters", c.iters);
    get("burnin", c.burnin);
    get("thin", c.thin);
    get("r_aux", c.r_aux);
    get("step_u", c.step_u);
    get("step_tau", c.step_tau);
    get("step_reshuffle", c.step_reshuffle);
    get("step_theta", c.step_theta);
    get("adapt_steps", c.adapt_steps);
    get("alpha_prior", c.alpha_prior);
    get("q0_tau", c.q0_tau);
    get("q1_tau", c.q1_tau);
    get("theta_prior_var", c.theta_prior_var);
    get("q0_gamma", c.q0_gamma);
    get("q1_gamma", c.q1_gamma);
    get("base_mu0", c.base_mu0);
    get("base_tau0sq", c.base_tau0sq);
    get("seed", c.seed);
    get("center", c.center);
    get("data", c.data);
    get("outdir", c.outdir);
    return c;
  }

  MixingMeasure measure() const {
    if (measure_kind == "nig") return MixingMeasure::nig(alpha, tau);
    if (measure_kind == "dp") return MixingMeasure::dp(mass);
    if (measure_kind == "py") return MixingMeasure::py(theta_py, sigma_py);
    throw std::invalid_argument("unknown measure kind: " + measure_kind);
  }

  SamplerConfig sampler_config(const Dataset& dataset) const {
    SamplerConfig cfg;
    cfg.iters = iters;
    cfg.burnin = burnin;
    cfg.thin = thin;
    cfg.r_aux = r_aux;
    cfg.step_u = step_u;
    cfg.step_tau = step_tau;
    cfg.step_reshuffle = step_reshuffle;
    cfg.step_theta = step_theta;
    cfg.adapt_steps = adapt_steps;
    if (alpha_prior.empty()) {
      cfg.alpha_mode = AlphaMode::fixed(alpha);
    } else {
      const auto comma = alpha_prior.find(',');
      if (comma == std::string::npos) {
        throw std::invalid_argument("alpha_prior must look like \"q0,q1\"");
      }
      cfg.alpha_mode =
          AlphaMode::gamma_prior(std::stod(alpha_prior.substr(0, comma)),
                                 std::stod(alpha_prior.substr(comma + 1)));
    }
    cfg.q0_tau = q0_tau;
    cfg.q1_tau = q1_tau;
    cfg.theta_prior_var = theta_prior_var;
    cfg.tau_init = tau;
    cfg.seed = seed;
    cfg.base.q0_gamma = q0_gamma;
    cfg.base.q1_gamma = q1_gamma;
    if (!base_mu0.empty()) {
      cfg.base.mu0 = base_mu0;
      cfg.base.tau0sq = base_tau0sq;
    } else {
      // location centered at the sample; vague zero-centered coefficients
      cfg.base.mu0.assign(1 + dataset.p, 0.0);
      cfg.base.tau0sq.assign(1 + dataset.p, 20.0);
      cfg.base.mu0[0] = mean_of(dataset.y);
      cfg.base.tau0sq[0] =
          dataset.n > 1 ? variance_of(dataset.y) * dataset.n / (dataset.n - 1.0)
                        : 1.0;
    }
    cfg.base.validate();
    return cfg;
  }
};

RunConfig load_config(const std::string& config_path, const json& overrides) {
  json merged = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config: " + config_path);
    in >> merged;
  }
  for (const auto& [key, value] : overrides.items()) merged[key] = value;
  return RunConfig::from_json(merged);
}

void echo_config(const RunConfig& config) {
  fs::create_directories(config.outdir);
  std::ofstream out(fs::path(config.outdir) / "config.echo");
  out << config.to_json().dump(2) << "\n";
}

RunConfig read_echo(const std::string& outdir) {
  std::ifstream in(fs::path(outdir) / "config.echo");
  if (!in) {
    throw std::runtime_error("missing config.echo under " + outdir +
                             " (run fit first)");
  }
  json j;
  in >> j;
  return RunConfig::from_json(j);
}

Dataset load_run_dataset(const RunConfig& config) {
  Dataset data = read_dataset(config.data);
  if (config.center && data.p > 0) {
    for (int l = 0; l < data.p; ++l) {
      double m = 0.0;
      for (int i = 0; i < data.n; ++i) m += data.x[i][l];
      m /= data.n;
      for (int i = 0; i < data.n; ++i) data.x[i][l] -= m;
    }
  }
  return data;
}

void write_fit_diagnostics(const fs::path& dir, const Chain& chain) {
  json j;
  j["accept_rates"] = chain.accept_rates;
  if (chain.draws.size() >= 100) {
    const auto diag = diagnostics(chain.k_series());
    j["geweke_z_k"] = diag.degenerate ? json() : json(diag.geweke_z);
    j["degenerate_k_series"] = diag.degenerate;
  } else {
    j["geweke_z_k"] = nullptr;
    j["note"] = "fewer than 100 retained draws; Geweke skipped";
  }
  std::ofstream out(dir / "diagnostics.json");
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// subcommand bodies

int cmd_simulate(const std::string& dgp, int n, double censor,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& truth_path) {
  Rng rng(seed);
  Generated gen = generate(dgp_preset(dgp, n), rng);
  Dataset data =
      censor > 0.0 ? apply_censoring(gen.data, censor, rng) : gen.data;
  write_dataset(out_path, data);
  if (!truth_path.empty()) write_partition(truth_path, gen.truth);
  int censored = 0;
  for (int d : data.delta) censored += d == 0;
  std::cout << "wrote " << data.n << " rows (" << censored << " censored) to "
            << out_path << "\n";
  return 0;
}

int cmd_fit(RunConfig config) {
  Dataset data = load_run_dataset(config);
  SamplerConfig cfg = config.sampler_config(data);
  // persist the resolved data-driven base so later stages reuse it
  config.base_mu0 = cfg.base.mu0;
  config.base_tau0sq = cfg.base.tau0sq;
  echo_config(config);

  Chain chain = run(data, variant_from_string(config.variant),
                    kernel_from_string(config.family), config.measure(), cfg);
  const fs::path chain_dir = fs::path(config.outdir) / "chain";
  write_chain(chain_dir, chain);
  write_fit_diagnostics(chain_dir, chain);
  std::cout << "retained " << chain.draws.size() << " draws; artifacts in "
            << chain_dir.string() << "\n";
  return 0;
}

int cmd_stratify(const std::string& outdir) {
  const RunConfig config = read_echo(outdir);
  Dataset data = load_run_dataset(config);
  Chain chain = read_chain(fs::path(outdir) / "chain");
  const auto partitions = chain.partitions();
  const auto opt = optimal_partition(partitions);

  const fs::path dir = fs::path(outdir) / "partition";
  write_partition(dir / "partition.csv", opt.partition);
  {
    json meta;
    meta["expected_vi_loss"] = opt.expected_loss;
    meta["k"] = opt.partition.k;
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "summary.csv");
    out << "stratum,total,exact,censored,singleton\n";
    const auto sizes = opt.partition.block_sizes();
    for (int lab = 0; lab < opt.partition.k; ++lab) {
      int exact = 0, censored = 0;
      for (int i = 0; i < data.n; ++i) {
        if (opt.partition.labels[i] != lab) continue;
        data.delta[i] == 1 ? ++exact : ++censored;
      }
      out << lab << "," << sizes[lab] << "," << exact << "," << censored << ","
          << (sizes[lab] == 1 ? 1 : 0) << "\n";
    }
  }
  std::cout << "optimal partition has " << opt.partition.k
            << " blocks (expected VI loss " << opt.expected_loss << ")\n";
  return 0;
}

int cmd_refit(const std::string& outdir, double ci_level) {
  const RunConfig config = read_echo(outdir);
  Dataset data = load_run_dataset(config);
  const Partition partition =
      read_partition(fs::path(outdir) / "partition" / "partition.csv");

  SamplerConfig cfg = config.sampler_config(data);
  const RefitResult result =
      stratum_refit(data, partition, variant_from_string(config.variant),
                    kernel_from_string(config.family), config.measure(), cfg,
                    ci_level);

  const fs::path dir = fs::path(outdir) / "refit";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "summaries.csv");
    out << "stratum,size,param,median,lo,hi\n";
    for (const auto& stratum : result.strata) {
      for (const auto& row : stratum.summary) {
        out << stratum.label << "," << stratum.size << "," << row.param << ","
            << format_double(row.median) << "," << format_double(row.lo) << ","
            << format_double(row.hi) << "\n";
      }
    }
  }
  for (const auto& stratum : result.strata) {
    write_chain(dir / ("stratum_" + std::to_string(stratum.label)) / "chain",
                stratum.chain);
  }
  if (!result.skipped_singletons.empty()) {
    std::ofstream out(dir / "skipped_singletons.txt");
    for (int lab : result.skipped_singletons) out << lab << "\n";
    std::cout << "skipped " << result.skipped_singletons.size()
              << " singleton strata\n";
  }
  std::cout << "refit " << result.strata.size() << " strata\n";
  return 0;
}

// curve bundle: predictive curves, Kaplan-Meier, parametric MLE overlays and
// the coefficient table; missing upstream artifacts become listed gaps
int cmd_curves(const std::string& outdir, int grid_points, double level) {
  const RunConfig config = read_echo(outdir);
  Dataset data = load_run_dataset(config);
  const fs::path report = fs::path(outdir) / "report";
  fs::create_directories(report);
  std::vector<std::string> gaps;

  std::vector<double> times = data.time;
  if (times.empty()) {
    times.resize(data.n);
    for (int i = 0; i < data.n; ++i) times[i] = std::exp(data.y[i]);
  }

  {
    const auto km = kaplan_meier(times, data.delta);
    std::ofstream out(report / "km_overall.csv");
    out << "t,survival\n";
    for (std::size_t i = 0; i < km.times.size(); ++i) {
      out << format_double(km.times[i]) << "," << format_double(km.survival[i])
          << "\n";
    }
  }

  const fs::path part_path = fs::path(outdir) / "partition" / "partition.csv";
  if (!fs::exists(part_path)) {
    gaps.push_back("partition/partition.csv missing: per-stratum outputs skipped");
  } else {
    const Partition partition = read_partition(part_path);
    const double t_max = *std::max_element(times.begin(), times.end());
    std::vector<double> t_grid(grid_points);
    for (int g = 0; g < grid_points; ++g) {
      t_grid[g] = 1.05 * t_max * (g + 1) / grid_points;
    }
    const std::vector<double> x0(data.p, 0.0);
    const auto sizes = partition.block_sizes();

    for (int lab = 0; lab < partition.k; ++lab) {
      if (sizes[lab] < 2) continue;
      std::vector<double> st;
      std::vector<int> sd;
      std::vector<double> sy;
      std::vector<int> rows;
      for (int i = 0; i < data.n; ++i) {
        if (partition.labels[i] != lab) continue;
        st.push_back(times[i]);
        sd.push_back(data.delta[i]);
        sy.push_back(data.y[i]);
      }
      {
        const auto km = kaplan_meier(st, sd);
        std::ofstream out(report /
                          ("km_stratum_" + std::to_string(lab) + ".csv"));
        out << "t,survival\n";
        for (std::size_t i = 0; i < km.times.size(); ++i) {
          out << format_double(km.times[i]) << ","
              << format_double(km.survival[i]) << "\n";
        }
      }

      const fs::path chain_dir = fs::path(outdir) / "refit" /
                                 ("stratum_" + std::to_string(lab)) / "chain";
      if (!fs::exists(chain_dir / "params.json")) {
        gaps.push_back("refit chain missing for stratum " +
                       std::to_string(lab));
        continue;
      }
      Chain chain = read_chain(chain_dir);
      SamplerConfig cfg = config.sampler_config(data);
      Rng rng(derive_seed(config.seed, "curves-" + std::to_string(lab)));
      const auto curve = predictive_survival(chain, config.measure(),
                                             kernel_from_string(config.family),
                                             cfg.base, t_grid, x0, level, rng);
      std::ofstream out(report /
                        ("curve_stratum_" + std::to_string(lab) + ".csv"));
      out << "t,mean,lo,hi\n";
      for (std::size_t g = 0; g < curve.t_grid.size(); ++g) {
        out << format_double(curve.t_grid[g]) << ","
            << format_double(curve.mean[g]) << "," << format_double(curve.lo[g])
            << "," << format_double(curve.hi[g]) << "\n";
      }
    }

    // type-I minimum MLE per stratum (the dashed overlays)
    {
      std::ofstream out(report / "mle.csv");
      out << "stratum,mu,zeta,status\n";
      for (int lab = 0; lab < partition.k; ++lab) {
        if (sizes[lab] < 2) continue;
        std::vector<double> sy;
        std::vector<int> sd;
        for (int i = 0; i < data.n; ++i) {
          if (partition.labels[i] != lab) continue;
          sy.push_back(data.y[i]);
          sd.push_back(data.delta[i]);
        }
        try {
          const auto mle = weibull_mle(sy, sd);
          out << lab << "," << format_double(mle.mu) << ","
              << format_double(mle.zeta) << ",ok\n";
        } catch (const std::exception& ex) {
          out << lab << ",nan,nan," << ex.what() << "\n";
        }
      }
    }

    // Table-3 style coefficient table from the refit summaries
    const fs::path summaries = fs::path(outdir) / "refit" / "summaries.csv";
    if (!fs::exists(summaries)) {
      gaps.push_back("refit/summaries.csv missing: coefficient table skipped");
    } else {
      std::ifstream in(summaries);
      std::ofstream out(report / "coefficients.csv");
      out << "stratum,param,median,lo,hi,excludes_zero\n";
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string stratum, size, param, median, lo, hi;
        std::getline(ss, stratum, ',');
        std::getline(ss, size, ',');
        std::getline(ss, param, ',');
        std::getline(ss, median, ',');
        std::getline(ss, lo, ',');
        std::getline(ss, hi, ',');
        if (param == "zeta") continue;  // location and coefficients only
        const double lo_v = std::stod(lo);
        const double hi_v = std::stod(hi);
        const bool excludes = lo_v > 0.0 || hi_v < 0.0;
        out << stratum << "," << param << "," << median << "," << lo << ","
            << hi << "," << (excludes ? 1 : 0) << "\n";
      }
    }
  }

  if (!gaps.empty()) {
    std::ofstream out(report / "gaps.txt");
    for (const auto& g : gaps) out << g << "\n";
    std::cout << "report written with " << gaps.size() << " gaps listed\n";
  } else {
    std::cout << "report bundle written to " << report.string() << "\n";
  }
  return 0;
}

int cmd_compare(RunConfig config) {
  Dataset data = load_run_dataset(config);
  const fs::path report = fs::path(config.outdir) / "report";
  fs::create_directories(report);
  echo_config(config);

  std::ofstream out(report / "scores.csv");
  out << "kernel,lpml,waic\n";
  for (const std::string name : {"type1min", "logistic", "normal"}) {
    SamplerConfig cfg = config.sampler_config(data);
    cfg.seed = derive_seed(config.seed, "compare-" + name);
    Chain chain = run(data, variant_from_string(config.variant),
                      kernel_from_string(name), config.measure(), cfg);
    int flagged = 0;
    const double lp = lpml(chain, &flagged);
    const double wa = waic(chain);
    out << name << "," << format_double(lp) << "," << format_double(wa)
        << "\n";
    std::cout << name << ": lpml " << lp << ", waic " << wa
              << (flagged ? " (flagged " + std::to_string(flagged) +
                                " observations in CPO)"
                          : "")
              << "\n";
  }
  return 0;
}

int cmd_diag(const std::string& outdir, int max_lag) {
  Chain chain = read_chain(fs::path(outdir) / "chain");
  const fs::path report = fs::path(outdir) / "report";
  fs::create_directories(report);
  const auto diag = diagnostics(chain.k_series(), max_lag);
  {
    std::ofstream out(report / "acf.csv");
    out << "lag,acf\n";
    for (std::size_t lag = 0; lag < diag.acf.size(); ++lag) {
      out << lag << "," << format_double(diag.acf[lag]) << "\n";
    }
  }
  {
    json j;
    j["geweke_z_k"] = diag.degenerate ? json() : json(diag.geweke_z);
    j["degenerate"] = diag.degenerate;
    j["accept_rates"] = chain.accept_rates;
    std::ofstream out(report / "diagnostics.json");
    out << j.dump(2) << "\n";
  }
  std::cout << "geweke z on k: " << diag.geweke_z << "\n";
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_path) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config: " + config_path);
  json j;
  in >> j;

  StudyConfig study;
  study.dgps = j.value("dgps", std::vector<std::string>{"D0"});
  for (const auto& v :
       j.value("variants", std::vector<std::string>{"M0"})) {
    study.variants.push_back(variant_from_string(v));
  }
  for (const auto& k :
       j.value("kernels", std::vector<std::string>{"type1min"})) {
    study.kernels.push_back(kernel_from_string(k));
  }
  study.sizes = j.value("sizes", std::vector<int>{90});
  study.censor_levels = j.value("censor_levels", std::vector<double>{0.0});
  study.replicates = j.value("replicates", 10);
  study.seed = j.value("seed", 42);
  study.workers = j.value("workers", 0);
  study.sampler.iters = j.value("iters", 5000);
  study.sampler.burnin = j.value("burnin", 3000);
  study.sampler.thin = j.value("thin", 1);
  study.sampler.r_aux = j.value("r_aux", 3);
  study.sampler.alpha_mode = AlphaMode::fixed(j.value("alpha", 1.0));
  study.sampler.tau_init = j.value("tau", 1.0);
  study.measure = MixingMeasure::nig(j.value("alpha", 1.0), j.value("tau", 1.0));
  if (j.value("measure_kind", std::string("nig")) == "dp") {
    study.measure = MixingMeasure::dp(j.value("mass", 1.0));
  } else if (j.value("measure_kind", std::string("nig")) == "py") {
    study.measure =
        MixingMeasure::py(j.value("theta_py", 1.0), j.value("sigma_py", 0.25));
  }

  const auto rows = replicate_study(study);
  write_study_rows(out_path, rows);
  int failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  std::cout << "study finished: " << rows.size() << " rows, " << failed
            << " flagged failures -> " << out_path << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Stratified survival analysis via nonparametric mixtures"};
  app.require_subcommand(1);

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string sim_dgp = "D0";
  int sim_n = 150;
  double sim_censor = 0.0;
  std::uint64_t sim_seed = 42;
  std::string sim_out = "data.csv";
  std::string sim_truth;
  sim->add_option("--dgp", sim_dgp, "D0, D1 or D2");
  sim->add_option("--n", sim_n, "sample size");
  sim->add_option("--censor", sim_censor, "target censored fraction");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output CSV");
  sim->add_option("--truth-out", sim_truth, "true partition CSV");

  // shared fit-style options -----------------------------------------------
  auto add_run_options = [](CLI::App* cmd, std::string& config_path,
                            json& overrides) {
    cmd->add_option("--config", config_path, "JSON config file");
    auto opt = [cmd, &overrides](const std::string& flag,
                                 const std::string& key,
                                 const std::string& help) {
      cmd->add_option_function<std::string>(
          flag,
          [&overrides, key](const std::string& v) {
            overrides[key] = json::parse(v, nullptr, false).is_discarded()
                                 ? json(v)
                                 : json::parse(v);
          },
          help);
    };
    opt("--data", "data", "input CSV (time,status,x1..xp)");
    opt("--outdir", "outdir", "output directory");
    opt("--variant", "variant", "M0, M1 or M2");
    opt("--family", "family", "type1min, logistic or normal");
    opt("--measure", "measure_kind", "nig, dp or py");
    opt("--iters", "iters", "total iterations");
    opt("--burnin", "burnin", "burn-in iterations");
    opt("--thin", "thin", "thinning interval");
    opt("--seed", "seed", "rng seed");
    opt("--alpha", "alpha", "N-IG total mass (fixed)");
    opt("--tau", "tau", "N-IG tau (initial value)");
    opt("--center", "center", "center covariates (true/false)");
    opt("--r-aux", "r_aux", "auxiliary components");
  };

  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler");
  std::string fit_config;
  json fit_overrides = json::object();
  add_run_options(fit, fit_config, fit_overrides);

  auto* strat = app.add_subcommand("stratify", "optimal VI partition");
  std::string strat_outdir;
  strat->add_option("--outdir", strat_outdir, "fit output directory")
      ->required();

  auto* refit = app.add_subcommand("refit", "independent per-stratum refits");
  std::string refit_outdir;
  double refit_ci = 0.95;
  refit->add_option("--outdir", refit_outdir, "fit output directory")
      ->required();
  refit->add_option("--ci-level", refit_ci, "credible interval level");

  auto* curves = app.add_subcommand(
      "curves", "survival curves, Kaplan-Meier, MLE and coefficient tables");
  std::string curves_outdir;
  int curves_points = 100;
  double curves_level = 0.95;
  curves->add_option("--outdir", curves_outdir, "fit output directory")
      ->required();
  curves->add_option("--points", curves_points, "time grid size");
  curves->add_option("--level", curves_level, "credible band level");

  auto* compare =
      app.add_subcommand("compare", "LPML/WAIC across the three kernels");
  std::string compare_config;
  json compare_overrides = json::object();
  add_run_options(compare, compare_config, compare_overrides);

  auto* diag = app.add_subcommand("diag", "chain diagnostics on k");
  std::string diag_outdir;
  int diag_lag = 40;
  diag->add_option("--outdir", diag_outdir, "fit output directory")->required();
  diag->add_option("--max-lag", diag_lag, "ACF maximum lag");

  auto* study = app.add_subcommand("study", "replicated simulation study");
  std::string study_config;
  std::string study_out = "study_results.csv";
  study->add_option("--config", study_config, "study JSON config")->required();
  study->add_option("--out", study_out, "results CSV");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) {
      return cmd_simulate(sim_dgp, sim_n, sim_censor, sim_seed, sim_out,
                          sim_truth);
    }
    if (fit->parsed()) {
      RunConfig config = load_config(fit_config, fit_overrides);
      if (config.data.empty() || config.outdir.empty()) {
        throw std::invalid_argument("fit needs --data and --outdir");
      }
      return cmd_fit(std::move(config));
    }
    if (strat->parsed()) return cmd_stratify(strat_outdir);
    if (refit->parsed()) return cmd_refit(refit_outdir, refit_ci);
    if (curves->parsed()) {
      return cmd_curves(curves_outdir, curves_points, curves_level);
    }
    if (compare->parsed()) {
      RunConfig config = load_config(compare_config, compare_overrides);
      if (config.data.empty() || config.outdir.empty()) {
        throw std::invalid_argument("compare needs --data and --outdir");
      }
      return cmd_compare(std::move(config));
    }
    if (diag->parsed()) return cmd_diag(diag_outdir, diag_lag);
    if (study->parsed()) return cmd_study(study_config, study_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace stratsurv
