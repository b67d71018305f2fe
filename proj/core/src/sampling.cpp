#include "obswin/sampling.hpp"

#include <random>

#include "obswin/error.hpp"

namespace obswin {
namespace {

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t candidate = 2; primes.size() < count; ++candidate) {
    bool prime = true;
    for (std::uint32_t p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  const double inv_base = 1.0 / base;
  double scale = inv_base;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv_base;
  }
  return value;
}

}  // namespace

HaltonSequence::HaltonSequence(std::size_t dim, std::uint64_t seed)
    : bases_(first_primes(dim)), shift_(dim) {
  std::mt19937_64 rng(seed);
  // Top 53 bits -> [0, 1); avoids the implementation-defined distributions.
  for (double& s : shift_) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vector HaltonSequence::at(std::uint64_t index) const {
  Vector u(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = 0; d < dim(); ++d) {
    double v = radical_inverse(index + 1, bases_[d]) + shift_[d];
    if (v >= 1.0) v -= 1.0;
    u[static_cast<Eigen::Index>(d)] = v;
  }
  return u;
}

Vector HaltonSequence::next() { return at(index_++); }

Vector map_to_box(const Box& box, const Vector& unit) {
  Vector x(unit.size());
  for (Eigen::Index i = 0; i < unit.size(); ++i) {
    const Interval& iv = box[static_cast<std::size_t>(i)];
    x[i] = iv.lo + unit[i] * iv.width();
  }
  return x;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  values.back() = hi;
  return values;
}

SamplingPlan SamplingPlan::default_for(std::size_t n, std::uint64_t seed) {
  SamplingPlan plan;
  plan.seed = seed;
  plan.kind = n <= 3 ? Kind::Grid : Kind::LowDiscrepancy;
  return plan;
}

std::vector<Vector> sample_box(const Box& box, const SamplingPlan& plan) {
  const std::size_t n = box.dim();
  if (n == 0) throw PreconditionError("cannot sample an empty box");
  std::vector<Vector> points;

  if (plan.kind == SamplingPlan::Kind::LowDiscrepancy) {
    if (plan.count == 0) throw PreconditionError("sampling plan needs at least one point");
    HaltonSequence seq(n, plan.seed);
    points.reserve(plan.count);
    for (std::size_t i = 0; i < plan.count; ++i) points.push_back(map_to_box(box, seq.next()));
    return points;
  }

  if (plan.points_per_axis == 0) throw PreconditionError("grid needs at least one point per axis");
  std::vector<std::vector<double>> axes;
  for (std::size_t d = 0; d < n; ++d) {
    // A degenerate axis contributes a single coordinate.
    const Interval& iv = box[d];
    axes.push_back(iv.width() == 0.0 ? std::vector<double>{iv.lo}
                                     : linspace(iv.lo, iv.hi, plan.points_per_axis));
  }
  std::vector<std::size_t> digit(n, 0);
  for (;;) {
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t d = 0; d < n; ++d) x[static_cast<Eigen::Index>(d)] = axes[d][digit[d]];
    points.push_back(std::move(x));
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++digit[d] < axes[d].size()) break;
      digit[d] = 0;
      if (d == 0) return points;
    }
  }
}

}  // namespace obswin
