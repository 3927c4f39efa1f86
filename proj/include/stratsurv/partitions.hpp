#ifndef STRATSURV_PARTITIONS_HPP
#define STRATSURV_PARTITIONS_HPP

#include <span>
#include <vector>

namespace stratsurv {

// Partition of {0..n-1} with compact labels 0..k-1 (first-occurrence order).
struct Partition {
  std::vector<int> labels;
  int k = 0;

  int n() const { return static_cast<int>(labels.size()); }
  std::vector<int> block_sizes() const;

  // Relabel arbitrary integer labels into compact first-occurrence form.
  static Partition from_labels(std::span<const int> raw);
};

bool operator==(const Partition& a, const Partition& b);

// Variation of information between two partitions of the same n, natural log.
double vi_distance(const Partition& a, const Partition& b);

// Fraction of the n(n-1)/2 observation pairs on which the partitions agree.
double rand_index(const Partition& a, const Partition& b);

// Sample-restricted minimizer of the Monte Carlo expected VI loss. Ties go to
// the smallest block count, then to the earliest sample.
struct OptimalPartition {
  Partition partition;
  double expected_loss = 0.0;
};
OptimalPartition optimal_partition(std::span<const Partition> samples);

}  // namespace stratsurv

#endif
