#ifndef STRATSURV_IO_HPP
#define STRATSURV_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "stratsurv/sampler.hpp"
#include "stratsurv/simulation.hpp"

namespace stratsurv {

// Survival data CSV: header time,status,x1..xp with status 1 = exact. Times
// must be positive; y is stored as log time. Malformed rows raise a single
// error listing every offending line number.
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

// Chain artifacts inside a directory: chain.csv (iter, k, u, tau, alpha,
// theta_common_1..p, alloc_1..n), loglik.csv (iter, ll_1..n) and params.json
// (per-draw cluster parameter tables).
void write_chain(const std::filesystem::path& dir, const Chain& chain);
Chain read_chain(const std::filesystem::path& dir);

// Partition CSV: obs_id, stratum_label.
void write_partition(const std::filesystem::path& path, const Partition& p);
Partition read_partition(const std::filesystem::path& path);

void write_study_rows(const std::filesystem::path& path,
                      const std::vector<StudyRow>& rows);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace stratsurv

#endif
