#ifndef STRATSURV_NUMERIC_HPP
#define STRATSURV_NUMERIC_HPP

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace stratsurv {

double log_sum_exp(std::span<const double> log_terms);

// log of N(x | mean, sd) density
double normal_log_pdf(double x, double mean, double sd);

// log of the standard normal upper tail P(Z > z), accurate in relative terms
// deep into the tail (asymptotic Mills-ratio series past the erfc range).
double normal_log_sf(double z);

// log inverse-Gamma(shape, scale) density at x > 0
double inv_gamma_log_pdf(double x, double shape, double scale);

// Adaptive Simpson on [a, b]; tol is an absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

// Integral over (0, inf) via the v = u/(1+u) substitution; rel_tol is
// relative to a coarse first pass.
double integrate_halfline(const std::function<double(double)>& f,
                          double rel_tol);

// sum_{t} (x_t - mean)^2 / len  and friends
double mean_of(std::span<const double> x);
double variance_of(std::span<const double> x);  // population convention

// Monte Carlo standard error of the mean of a correlated series, batch means.
double batch_means_se(std::span<const double> x);

double quantile_of(std::vector<double> x, double q);  // linear interpolation

}  // namespace stratsurv

#endif
