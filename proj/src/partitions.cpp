#include "stratsurv/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace stratsurv {

namespace {

void require_same_n(const Partition& a, const Partition& b) {
  if (a.labels.size() != b.labels.size() || a.labels.empty()) {
    throw std::invalid_argument("partitions over different n are incomparable");
  }
}

// contingency counts n_ij flattened to a.k x b.k
std::vector<long long> contingency(const Partition& a, const Partition& b) {
  std::vector<long long> table(static_cast<std::size_t>(a.k) * b.k, 0);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    ++table[static_cast<std::size_t>(a.labels[i]) * b.k + b.labels[i]];
  }
  return table;
}

}  // namespace

std::vector<int> Partition::block_sizes() const {
  std::vector<int> sizes(k, 0);
  for (int lab : labels) ++sizes[lab];
  return sizes;
}

Partition Partition::from_labels(std::span<const int> raw) {
  Partition p;
  p.labels.reserve(raw.size());
  std::unordered_map<int, int> remap;
  for (int lab : raw) {
    auto [it, inserted] = remap.emplace(lab, static_cast<int>(remap.size()));
    p.labels.push_back(it->second);
  }
  p.k = static_cast<int>(remap.size());
  return p;
}

bool operator==(const Partition& a, const Partition& b) {
  return a.k == b.k && a.labels == b.labels;
}

double vi_distance(const Partition& a, const Partition& b) {
  require_same_n(a, b);
  const double n = static_cast<double>(a.labels.size());
  const auto table = contingency(a, b);
  std::vector<long long> row(a.k, 0), col(b.k, 0);
  for (int i = 0; i < a.k; ++i) {
    for (int j = 0; j < b.k; ++j) {
      row[i] += table[static_cast<std::size_t>(i) * b.k + j];
      col[j] += table[static_cast<std::size_t>(i) * b.k + j];
    }
  }
  auto plogp = [n](long long c) {
    return c == 0 ? 0.0 : (c / n) * std::log(c / n);
  };
  // separate accumulators: a pure relabeling gives three identical sums and
  // the combination cancels exactly to zero
  double s_row = 0.0, s_col = 0.0, s_joint = 0.0;
  for (long long c : row) s_row += plogp(c);
  for (long long c : col) s_col += plogp(c);
  for (long long c : table) s_joint += plogp(c);
  const double loss = s_row + s_col - 2.0 * s_joint;
  return loss < 0.0 ? 0.0 : loss;
}

double rand_index(const Partition& a, const Partition& b) {
  require_same_n(a, b);
  const long long n = static_cast<long long>(a.labels.size());
  if (n < 2) throw std::invalid_argument("rand_index: needs n >= 2");
  auto choose2 = [](long long c) { return c * (c - 1) / 2; };
  const auto table = contingency(a, b);
  std::vector<long long> row(a.k, 0), col(b.k, 0);
  long long joint = 0;
  for (int i = 0; i < a.k; ++i) {
    for (int j = 0; j < b.k; ++j) {
      const long long c = table[static_cast<std::size_t>(i) * b.k + j];
      row[i] += c;
      col[j] += c;
      joint += choose2(c);
    }
  }
  long long in_a = 0, in_b = 0;
  for (long long c : row) in_a += choose2(c);
  for (long long c : col) in_b += choose2(c);
  const long long pairs = choose2(n);
  const long long agreements = pairs - in_a - in_b + 2 * joint;
  return static_cast<double>(agreements) / static_cast<double>(pairs);
}

OptimalPartition optimal_partition(std::span<const Partition> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("optimal_partition: empty sample");
  }
  const std::size_t n = samples.front().labels.size();
  for (const auto& s : samples) {
    if (s.labels.size() != n) {
      throw std::invalid_argument("optimal_partition: mixed n");
    }
  }

  // Chains revisit partitions; deduplicate and weight by multiplicity.
  struct Unique {
    const Partition* p;
    long long count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Unique> seen;
  std::vector<Unique*> uniq;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    std::string key(reinterpret_cast<const char*>(samples[m].labels.data()),
                    samples[m].labels.size() * sizeof(int));
    auto [it, inserted] = seen.try_emplace(key);
    if (inserted) {
      it->second = {&samples[m], 0, m};
      uniq.push_back(&it->second);
    }
    ++it->second.count;
  }

  const double total = static_cast<double>(samples.size());
  double best_loss = 0.0;
  const Unique* best = nullptr;
  for (const Unique* cand : uniq) {
    double loss = 0.0;
    for (const Unique* other : uniq) {
      if (other == cand) continue;
      loss += other->count * vi_distance(*cand->p, *other->p);
    }
    loss /= total;
    // losses equal up to summation rounding count as ties; candidates come in
    // first-occurrence order, so ties fall to smaller k only
    const double tol = 1e-12 * std::max(1.0, best == nullptr ? 0.0 : best_loss);
    const bool better = best == nullptr || loss < best_loss - tol ||
                        (loss <= best_loss + tol && cand->p->k < best->p->k);
    if (better) {
      best_loss = best == nullptr ? loss : std::min(loss, best_loss);
      best = cand;
    }
  }
  return {*best->p, best_loss};
}

}  // namespace stratsurv
