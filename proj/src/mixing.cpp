#include "stratsurv/mixing.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stratsurv/numeric.hpp"

namespace stratsurv {

namespace {
constexpr double kLog2SqrtPi = 1.2655121234846454;  // log(2 sqrt(pi))

void require_nig(const MixingMeasure& m, const char* op) {
  if (m.kind != MixingMeasure::Kind::NIG) {
    throw std::invalid_argument(std::string(op) +
                                ": supported for the N-IG measure only");
  }
}

double rising_log(double a, int m) {  // log (a)_m
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += std::log(a + i);
  return s;
}
}  // namespace

MixingMeasure MixingMeasure::nig(double alpha, double tau) {
  if (alpha <= 0.0 || tau <= 0.0) {
    throw std::invalid_argument("nig: alpha and tau must be positive");
  }
  MixingMeasure m;
  m.kind = Kind::NIG;
  m.alpha = alpha;
  m.tau = tau;
  return m;
}

MixingMeasure MixingMeasure::dp(double mass) {
  if (mass <= 0.0) throw std::invalid_argument("dp: mass must be positive");
  MixingMeasure m;
  m.kind = Kind::DP;
  m.mass = mass;
  return m;
}

MixingMeasure MixingMeasure::py(double theta, double sigma) {
  if (sigma < 0.0 || sigma >= 1.0 || theta <= -sigma) {
    throw std::invalid_argument("py: need sigma in [0,1) and theta > -sigma");
  }
  MixingMeasure m;
  m.kind = Kind::PY;
  m.theta_py = theta;
  m.sigma_py = sigma;
  return m;
}

std::string to_string(MixingMeasure::Kind kind) {
  switch (kind) {
    case MixingMeasure::Kind::NIG: return "nig";
    case MixingMeasure::Kind::DP: return "dp";
    case MixingMeasure::Kind::PY: return "py";
  }
  return "?";
}

void BaseMeasure::validate() const {
  if (mu0.size() != tau0sq.size()) {
    throw std::invalid_argument("base measure: mu0/tau0sq length mismatch");
  }
  if (mu0.empty()) {
    throw std::invalid_argument("base measure: needs at least the location");
  }
  for (double v : tau0sq) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("base measure: tau0sq must be positive");
    }
  }
  if (!(q0_gamma > 0.0) || !(q1_gamma > 0.0)) {
    throw std::invalid_argument("base measure: inverse-Gamma hyperparameters");
  }
}

ClusterParams BaseMeasure::draw(int n_theta, Rng& rng) const {
  if (n_theta + 1 > static_cast<int>(mu0.size())) {
    throw std::invalid_argument("base measure: too few components for model");
  }
  ClusterParams params;
  params.mu = rng.normal(mu0[0], std::sqrt(tau0sq[0]));
  params.theta.resize(n_theta);
  for (int l = 0; l < n_theta; ++l) {
    params.theta[l] = rng.normal(mu0[l + 1], std::sqrt(tau0sq[l + 1]));
  }
  params.zeta = rng.inv_gamma(q0_gamma, q1_gamma);
  return params;
}

double BaseMeasure::log_pdf(const ClusterParams& params) const {
  double lp = normal_log_pdf(params.mu, mu0[0], std::sqrt(tau0sq[0]));
  for (std::size_t l = 0; l < params.theta.size(); ++l) {
    lp += normal_log_pdf(params.theta[l], mu0[l + 1], std::sqrt(tau0sq[l + 1]));
  }
  lp += inv_gamma_log_pdf(params.zeta, q0_gamma, q1_gamma);
  return lp;
}

double psi(const MixingMeasure& measure, double u) {
  require_nig(measure, "psi");
  if (u < 0.0) throw std::invalid_argument("psi: u must be non-negative");
  return std::sqrt(u + measure.tau) - std::sqrt(measure.tau);
}

double kappa(const MixingMeasure& measure, int nj, double u) {
  require_nig(measure, "kappa");
  if (nj < 1) throw std::invalid_argument("kappa: nj must be >= 1");
  if (u < 0.0) throw std::invalid_argument("kappa: u must be non-negative");
  return std::exp(std::lgamma(nj - 0.5) - kLog2SqrtPi +
                  (0.5 - nj) * std::log(u + measure.tau));
}

PredictiveWeights predictive_weights(const MixingMeasure& measure,
                                     std::span<const int> cluster_sizes,
                                     double u, int r) {
  if (r < 1) throw std::invalid_argument("predictive_weights: r must be >= 1");
  for (int nj : cluster_sizes) {
    if (nj < 1) {
      throw std::invalid_argument("predictive_weights: cluster sizes >= 1");
    }
  }
  PredictiveWeights w;
  w.existing.reserve(cluster_sizes.size());
  switch (measure.kind) {
    case MixingMeasure::Kind::NIG: {
      if (u < 0.0) {
        throw std::invalid_argument("predictive_weights: u must be >= 0");
      }
      for (int nj : cluster_sizes) w.existing.push_back(nj - 0.5);
      w.new_per_aux = measure.alpha * std::sqrt(u + measure.tau) / (2.0 * r);
      break;
    }
    case MixingMeasure::Kind::DP: {
      for (int nj : cluster_sizes) w.existing.push_back(nj);
      w.new_per_aux = measure.mass / r;
      break;
    }
    case MixingMeasure::Kind::PY: {
      const int k = static_cast<int>(cluster_sizes.size());
      for (int nj : cluster_sizes) {
        w.existing.push_back(nj - measure.sigma_py);
      }
      w.new_per_aux = (measure.theta_py + k * measure.sigma_py) / r;
      break;
    }
  }
  return w;
}

double eppf(const MixingMeasure& measure, std::span<const int> composition) {
  int n = 0;
  for (int nj : composition) {
    if (nj < 1) throw std::invalid_argument("eppf: block sizes must be >= 1");
    n += nj;
  }
  if (n < 1) throw std::invalid_argument("eppf: empty composition");
  if (n > 12) throw std::runtime_error("eppf: n too large for the oracle");
  const int k = static_cast<int>(composition.size());

  if (measure.kind == MixingMeasure::Kind::PY ||
      measure.kind == MixingMeasure::Kind::DP) {
    const double sigma =
        measure.kind == MixingMeasure::Kind::PY ? measure.sigma_py : 0.0;
    const double theta =
        measure.kind == MixingMeasure::Kind::PY ? measure.theta_py
                                                : measure.mass;
    double lp = -rising_log(theta + 1.0, n - 1);
    for (int j = 1; j < k; ++j) lp += std::log(theta + j * sigma);
    for (int nj : composition) lp += rising_log(1.0 - sigma, nj - 1);
    return std::exp(lp);
  }

  // N-IG: alpha^k / Gamma(n) * int u^{n-1} e^{-alpha psi(u)} prod kappa du
  const double alpha = measure.alpha;
  const double tau = measure.tau;
  double log_const = k * std::log(alpha) - std::lgamma(n);
  double kappa_exponent = 0.0;  // prod kappa = C * (u+tau)^{k/2 - n}
  for (int nj : composition) {
    log_const += std::lgamma(nj - 0.5) - kLog2SqrtPi;
  }
  kappa_exponent = 0.5 * k - n;
  auto integrand = [&](double u) {
    const double lg = (n - 1) * std::log(u) -
                      alpha * (std::sqrt(u + tau) - std::sqrt(tau)) +
                      kappa_exponent * std::log(u + tau);
    return std::exp(lg);
  };
  const double integral = integrate_halfline(integrand, 1e-10);
  return std::exp(log_const) * integral;
}

EkEstimate prior_expected_clusters(const MixingMeasure& measure, int n,
                                   Rng& rng) {
  if (n < 1) throw std::invalid_argument("prior_expected_clusters: n >= 1");

  if (measure.kind == MixingMeasure::Kind::DP) {
    double ek = 0.0;
    for (int i = 1; i <= n; ++i) ek += measure.mass / (measure.mass + i - 1);
    return {ek, 0.0};
  }

  if (measure.kind == MixingMeasure::Kind::PY) {
    // exchangeable sequential construction; i.i.d. partitions
    const int reps = 20000;
    std::vector<double> ks(reps);
    std::vector<int> sizes;
    for (int rep = 0; rep < reps; ++rep) {
      sizes.clear();
      for (int i = 0; i < n; ++i) {
        const auto w = predictive_weights(measure, sizes, 0.0, 1);
        std::vector<double> lw(w.existing.size() + 1);
        for (std::size_t j = 0; j < w.existing.size(); ++j) {
          lw[j] = std::log(w.existing[j]);
        }
        lw.back() = std::log(w.new_per_aux);
        const int pick = rng.categorical_log(lw);
        if (pick == static_cast<int>(sizes.size())) {
          sizes.push_back(1);
        } else {
          ++sizes[pick];
        }
      }
      ks[rep] = static_cast<double>(sizes.size());
    }
    const double mean = mean_of(ks);
    const double se = std::sqrt(variance_of(ks) / reps);
    return {mean, se};
  }

  // N-IG: Gibbs over (allocation, u) with unit likelihood and fixed tau.
  const double alpha = measure.alpha;
  const double tau = measure.tau;
  std::vector<int> alloc(n, 0);
  std::vector<int> sizes{n};
  double u = 1.0;
  const int burnin = 2000;
  const int sweeps = 60000;
  std::vector<double> ks;
  ks.reserve(sweeps);
  for (int it = 0; it < burnin + sweeps; ++it) {
    for (int i = 0; i < n; ++i) {
      // remove i
      const int c = alloc[i];
      if (--sizes[c] == 0) {
        sizes.erase(sizes.begin() + c);
        for (int& a : alloc) {
          if (a > c) --a;
        }
      }
      const auto w = predictive_weights(measure, sizes, u, 1);
      std::vector<double> lw(w.existing.size() + 1);
      for (std::size_t j = 0; j < w.existing.size(); ++j) {
        lw[j] = std::log(w.existing[j]);
      }
      lw.back() = std::log(w.new_per_aux);
      const int pick = rng.categorical_log(lw);
      if (pick == static_cast<int>(sizes.size())) {
        alloc[i] = static_cast<int>(sizes.size());
        sizes.push_back(1);
      } else {
        alloc[i] = pick;
        ++sizes[pick];
      }
    }
    // MH on log u against u^{n-1} e^{-alpha sqrt(u+tau)} (u+tau)^{k/2-n}
    const int k = static_cast<int>(sizes.size());
    const double v_old = std::log(u);
    const double v_new = v_old + rng.normal(0.0, 1.5);
    const double u_new = std::exp(v_new);
    const double ratio =
        n * (v_new - v_old) -
        alpha * (std::sqrt(u_new + tau) - std::sqrt(u + tau)) +
        (0.5 * k - n) * (std::log(u_new + tau) - std::log(u + tau));
    if (std::log(rng.uniform_pos()) <= ratio) u = u_new;
    if (it >= burnin) ks.push_back(static_cast<double>(k));
  }
  return {mean_of(ks), batch_means_se(ks)};
}

double dp_mass_matching(double target_ek, int n) {
  if (!(target_ek > 1.0) || !(target_ek < n)) {
    throw std::invalid_argument("dp_mass_matching: target must lie in (1, n)");
  }
  auto expected_k = [n](double mass) {
    double ek = 0.0;
    for (int i = 1; i <= n; ++i) ek += mass / (mass + i - 1);
    return ek;
  };
  double lo = 1e-12, hi = 1.0;
  while (expected_k(hi) < target_ek) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-10 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_k(mid) < target_ek ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace stratsurv
