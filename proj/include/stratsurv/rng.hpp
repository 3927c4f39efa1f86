#ifndef STRATSURV_RNG_HPP
#define STRATSURV_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace stratsurv {

// All randomness flows from one root seed; per-task streams are derived by
// hashing (seed, task-tag) so concurrent workers never share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task_id);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  double uniform_pos() {  // strictly inside (0, 1)
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return u;
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    if (sd <= 0.0) return mean;  // degenerate proposal scales are identity moves
    return std::normal_distribution<double>(mean, sd)(gen_);
  }
  // shape/rate parameterization
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(gen_);
  }
  double inv_gamma(double shape, double scale) {
    return 1.0 / std::gamma_distribution<double>(shape, 1.0 / scale)(gen_);
  }
  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(gen_);
  }
  // index in [0, n)
  int uniform_int(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(gen_);
  }

  // Draw an index proportional to exp(log_weights), max-shifted for stability.
  int categorical_log(const std::vector<double>& log_weights);

  std::mt19937_64& engine() { return gen_; }

private:
  std::mt19937_64 gen_;
};

}  // namespace stratsurv

#endif
