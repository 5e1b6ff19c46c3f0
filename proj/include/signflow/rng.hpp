#pragma once

#include <cstdint>
#include <string_view>

#include "signflow/core.hpp"

namespace signflow {

/// SplitMix64 in counter form: the n-th output is mix(seed + n * 0x9E3779B97F4A7C15).
///
/// The stream is fully specified by (seed, counter), independent of the standard library, so
/// generated problem instances are bit-identical across builds. Normals use Box-Muller.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_zero();
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);  // filled row by row

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent seed for a named sub-stream (e.g. "validation").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace signflow
