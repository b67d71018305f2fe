#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obswin/odeint.hpp"
#include "obswin/system.hpp"

namespace obswin {

using StatePair = std::pair<Vector, Vector>;

/// How pairs of initial states are drawn from omega x omega.
struct PairSamplingPlan {
  enum class Strategy { Grid, LowDiscrepancy, BoundaryBiased, Explicit };

  Strategy strategy = Strategy::BoundaryBiased;
  /// Upper bound on generated pairs (Grid keeps every qualifying grid pair).
  std::size_t count = 256;
  std::size_t points_per_axis = 11;
  /// Minimum separation |x1 - x2| of every pair; must be positive.
  double r_min = 0.01;
  std::uint64_t seed = 0;
  /// Separations at which BoundaryBiased anchors pairs (corner, corner + r e_i).
  std::vector<double> anchor_distances;
  /// Pairs used verbatim by the Explicit strategy.
  std::vector<StatePair> pairs;
};

const char* to_string(PairSamplingPlan::Strategy strategy);

/// Draws the pairs of a plan. Throws PreconditionError if an explicit pair
/// lies outside omega or is closer than r_min, or if r_min <= 0.
std::vector<StatePair> sample_pairs(const Box& omega, const PairSamplingPlan& plan);

enum class Distinction { Distinguished, NotDistinguished, Truncated };
const char* to_string(Distinction d);

struct DistinguishResult {
  Distinction verdict = Distinction::NotDistinguished;
  /// First time with |dy| >= eps_sep (Distinguished only).
  double time = 0.0;
  /// Last time both outputs were available (equals T_max unless truncated).
  double horizon = 0.0;
};

struct WindowOptions {
  double t_max = 10.0;
  double eps_sep = 1e-6;
  IntegratorConfig integrator;
  std::size_t jobs = 1;
};

/// Smallest t <= min(T_max, reached horizons) with |h(x1(t)) - h(x2(t))| >= eps,
/// located by a scan of the dense output followed by bisection. The result
/// does not depend on the order of x1 and x2.
DistinguishResult distinguishing_time(const SystemSpec& spec, const Vector& x1, const Vector& x2,
                                      double t_max, double eps_sep,
                                      const IntegratorConfig& cfg = {});

struct PairRecord {
  Vector x1;
  Vector x2;
  double distance = 0.0;
  DistinguishResult result;
};

struct WindowCurvePoint {
  double r = 0.0;
  double t_hat = 0.0;
  std::size_t pairs = 0;
  std::size_t undistinguished = 0;
  std::size_t truncated = 0;
  /// Undistinguished pairs exist at this separation, so t_hat only bounds the
  /// window from below.
  bool lower_bound = false;
};

struct WindowReport {
  std::string system;
  double r_min = 0.0;
  double eps_sep = 0.0;
  double t_max = 0.0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<PairRecord> pairs;
  /// Max distinguishing time over distinguished pairs (0 if none).
  double t_hat = 0.0;
  bool t_hat_lower_bound = false;
  /// Indices into `pairs`.
  std::vector<std::size_t> undistinguished;
  std::vector<std::size_t> truncated;
  /// T_hat(r) on a decreasing ladder of r values.
  std::vector<WindowCurvePoint> curve;

  /// "D-observable on samples" iff no sampled pair stayed undistinguished.
  bool d_observable_on_samples() const { return undistinguished.empty(); }
};

/// Runs distinguishing_time on every pair of the plan.
WindowReport probe_indistinguishable(const SystemSpec& spec, const PairSamplingPlan& plan,
                                     const WindowOptions& options);

/// probe_indistinguishable plus the curve T_hat(r) for each r in `r_ladder`
/// (sorted into decreasing order; r_min is always included). Throws
/// PreconditionError if r_min <= 0.
WindowReport estimate_window(const SystemSpec& spec, const PairSamplingPlan& plan,
                             const WindowOptions& options, std::vector<double> r_ladder);

}  // namespace obswin
