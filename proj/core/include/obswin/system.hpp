#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "obswin/expr.hpp"

namespace obswin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
};

/// Axis-aligned compact box, the set of admissible initial states.
class Box {
 public:
  Box() = default;
  /// Throws SpecError(InvalidBox) unless every bound is finite and lo <= hi.
  explicit Box(std::vector<Interval> intervals);

  std::size_t dim() const noexcept { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_.at(i); }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }

  bool contains(const Vector& x, double slack = 0.0) const;
  Vector clamp(const Vector& x) const;
  Vector lower() const;
  Vector upper() const;
  Vector center() const;
  /// Euclidean length of the main diagonal.
  double diameter() const;
  /// All 2^n corners in lexicographic (lo before hi, first axis slowest) order.
  std::vector<Vector> corners() const;

 private:
  std::vector<Interval> intervals_;
};

/// A complete autonomous system  x' = f(x), y = h(x), x0 in omega.
struct SystemSpec {
  std::string name;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<Expr> f;
  std::vector<Expr> h;
  Box omega;
  ParamEnv params;

  Vector eval_f(const Vector& x) const;
  Vector eval_h(const Vector& x) const;
};

/// Parses the line-oriented system description format. Throws SpecError.
SystemSpec parse_system(std::string_view text);

/// Reads and parses a file. Throws SpecError (Format) if it cannot be read.
SystemSpec load_system(const std::string& path);

/// Text form accepted by parse_system.
std::string to_string(const SystemSpec& spec);

struct SystemWarning {
  enum class Kind { ConditionalSeam, FiniteEscape };
  Kind kind;
  std::string message;
  /// Seam: a sample point where the predicate changes sign.
  /// Escape: the initial state of the escaping trial trajectory.
  Vector point;
  /// Escape time for FiniteEscape, 0 otherwise.
  double time = 0.0;
};

struct ValidationOptions {
  /// Horizon of trial integrations used to detect finite escape.
  double trial_horizon = 10.0;
  std::size_t points_per_axis = 11;
};

/// Smoothness and escape diagnostics for a parsed system.
std::vector<SystemWarning> validate_system(const SystemSpec& spec,
                                           const ValidationOptions& options = {});

}  // namespace obswin
