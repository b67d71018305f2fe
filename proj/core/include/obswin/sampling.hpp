#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "obswin/system.hpp"

namespace obswin {

/// Scrambled Halton sequence on [0,1)^dim. The scramble is a random shift
/// (Cranley-Patterson rotation) drawn from `seed`, so equal seeds give equal
/// sequences on every platform.
class HaltonSequence {
 public:
  HaltonSequence(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return bases_.size(); }
  Vector next();
  /// Point number `index` (0-based) without advancing.
  Vector at(std::uint64_t index) const;

 private:
  std::vector<std::uint32_t> bases_;
  std::vector<double> shift_;
  std::uint64_t index_ = 0;
};

/// Maps a point of the unit cube onto `box`.
Vector map_to_box(const Box& box, const Vector& unit);

/// `count` evenly spaced values from lo to hi inclusive (midpoint when count == 1).
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct SamplingPlan {
  enum class Kind { Grid, LowDiscrepancy };

  Kind kind = Kind::Grid;
  std::size_t points_per_axis = 11;
  std::size_t count = 4096;
  std::uint64_t seed = 0;

  /// Uniform 11-per-axis grid for n <= 3, 4096 scrambled Halton points above.
  static SamplingPlan default_for(std::size_t n, std::uint64_t seed = 0);
};

/// Sample points of `box` under `plan`. Grid points are ordered with the
/// first axis varying slowest.
std::vector<Vector> sample_box(const Box& box, const SamplingPlan& plan);

}  // namespace obswin
