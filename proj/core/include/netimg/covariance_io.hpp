#pragma once

#include <filesystem>

#include "netimg/signal.hpp"

namespace netimg {

/// Binary container: "NISC", u32 version, i64 rows, i64 cols, i32 frames,
/// i32 receiver, u64 seed, then row-major (re, im) float64 pairs.
void write_covariance(const std::filesystem::path& path, const SampleCovariance& cov);
SampleCovariance read_covariance(const std::filesystem::path& path);
/// One matrix row per line, entries written as re,im pairs.
void write_covariance_csv(const std::filesystem::path& path, const SampleCovariance& cov);

}  // namespace netimg
