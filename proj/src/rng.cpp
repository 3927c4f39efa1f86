#include "stratsurv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stratsurv {

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return mix(seed ^ mix(fnv1a(tag)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task_id) {
  return mix(seed ^ mix(task_id + 0x51ed270b4a6e1337ULL));
}

int Rng::categorical_log(const std::vector<double>& log_weights) {
  if (log_weights.empty()) {
    throw std::invalid_argument("categorical_log: no weights");
  }
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw)) {
    throw std::invalid_argument("categorical_log: all weights are zero");
  }
  double total = 0.0;
  std::vector<double> probs(log_weights.size());
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    probs[j] = std::exp(log_weights[j] - max_lw);
    total += probs[j];
  }
  const double target = uniform() * total;
  double cum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    cum += probs[j];
    if (target <= cum) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace stratsurv
