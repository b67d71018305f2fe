#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obswin/system.hpp"

namespace obswin {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  std::size_t max_steps = 1'000'000;
  /// A trajectory whose state norm exceeds this is reported as escaped.
  double escape_norm = 1e8;

  /// Throws PreconditionError unless every field is positive.
  void validate() const;
};

enum class TrajectoryStatus { Completed, Escaped, StepFailure };

const char* to_string(TrajectoryStatus status);

/// Dense solution of x' = f(x) from x(0) = x0 produced by the Dormand-Prince
/// 5(4) pair. Every accepted step stores the coefficients of the 4th-order
/// continuous extension, so the state can be queried at any reached time.
class Trajectory {
 public:
  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    Vector start;   // state at t0
    Vector end;     // state at t0 + h
    Vector coeff[5];
  };

  const Vector& initial_state() const noexcept { return x0_; }
  double requested_horizon() const noexcept { return t_requested_; }
  double reached() const noexcept { return t_reached_; }
  TrajectoryStatus status() const noexcept { return status_; }
  bool completed() const noexcept { return status_ == TrajectoryStatus::Completed; }
  /// Time at which an escape or a step failure was detected; equals reached().
  double status_time() const noexcept { return t_reached_; }
  /// Human-readable reason for a StepFailure.
  const std::string& failure_reason() const noexcept { return failure_reason_; }

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t step_count() const noexcept { return segments_.size(); }

  /// State at time t in [0, reached()]. Throws OutOfRangeError otherwise.
  Vector state_at(double t) const;

  /// Accepted step endpoints 0 = t_0 < t_1 < ... < t_k = reached().
  std::vector<double> step_times() const;

 private:
  friend Trajectory integrate(const SystemSpec&, const Vector&, double, const IntegratorConfig&);

  Vector x0_;
  double t_requested_ = 0.0;
  double t_reached_ = 0.0;
  TrajectoryStatus status_ = TrajectoryStatus::Completed;
  std::string failure_reason_;
  std::vector<Segment> segments_;
};

/// Integrates spec.f from x0 over [0, T]. Never throws for escapes or step
/// failures; those are recorded in the returned trajectory's status.
Trajectory integrate(const SystemSpec& spec, const Vector& x0, double T,
                     const IntegratorConfig& cfg = {});

/// h(x(t)) along `traj`.
Vector output_at(const SystemSpec& spec, const Trajectory& traj, double t);

/// Squared output distance |h(x1(t)) - h(x2(t))|^2.
double eta_at(const SystemSpec& spec, double t, const Trajectory& traj1, const Trajectory& traj2);

struct EtaIntegral {
  double value = 0.0;
  double error_estimate = 0.0;
  /// Upper limit actually integrated to.
  double horizon = 0.0;
  /// Set when either trajectory stopped before T; `horizon` is then the
  /// truncation time.
  bool truncated = false;
  std::size_t evaluations = 0;
};

/// Integral of eta over [0, T] for the trajectories starting at x1 and x2.
EtaIntegral integral_eta(const SystemSpec& spec, const Vector& x1, const Vector& x2, double T,
                         const IntegratorConfig& cfg = {});

/// Same, for trajectories that are already integrated.
EtaIntegral integral_eta(const SystemSpec& spec, const Trajectory& traj1, const Trajectory& traj2,
                         double T);

/// CSV with header t,x1..xn,y1..yp at `samples` uniform times over [0, reached()].
std::string trajectory_csv(const SystemSpec& spec, const Trajectory& traj, std::size_t samples);

}  // namespace obswin
