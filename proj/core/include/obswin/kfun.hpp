#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obswin/error.hpp"
#include "obswin/odeint.hpp"
#include "obswin/system.hpp"
#include "obswin/window.hpp"

namespace obswin {

/// No pair of omega x omega is at least r apart.
class InfeasibleError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

enum class MinimizerStatus { Converged, BudgetExhausted };
const char* to_string(MinimizerStatus status);

struct MinimizeOptions {
  /// Multi-start count: previous-level witness, boundary pairs, then
  /// low-discrepancy seeds.
  std::size_t starts = 32;
  /// Objective evaluations per start.
  std::size_t evaluations_per_start = 200;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  IntegratorConfig integrator;
  /// Extra start (typically the previous grid level's minimizer).
  std::optional<StatePair> warm_start;
};

struct PairMinimum {
  double value = 0.0;
  Vector x1;
  Vector x2;
  MinimizerStatus status = MinimizerStatus::BudgetExhausted;
  std::size_t evaluations = 0;
  std::size_t starts = 0;
  /// Starts that never produced a finite objective value.
  std::size_t failed_starts = 0;
};

/// Projects a pair onto {|x1 - x2| >= r} intersected with omega x omega by
/// moving the points apart along their difference and clamping to omega.
/// Returns nullopt when no such projection exists.
std::optional<StatePair> project_pair(const Box& omega, const Vector& x1, const Vector& x2,
                                      double r);

/// Best-found minimum of integral_eta(x1, x2, T) over pairs at distance >= r
/// by multi-start Nelder-Mead on the projected objective. Pairs whose
/// trajectories stop before T are rejected. Throws InfeasibleError when r
/// exceeds the diameter of omega and AnalysisError when every start failed.
PairMinimum minimize_pair(const SystemSpec& spec, double r, double T,
                          const MinimizeOptions& options = {});

struct Alpha0Level {
  double r = 0.0;
  /// Estimated infimum; empty when the level failed (see `error`).
  std::optional<double> beta;
  Vector x1;
  Vector x2;
  MinimizerStatus status = MinimizerStatus::BudgetExhausted;
  std::size_t evaluations = 0;
  std::string error;
};

struct Alpha0Table {
  std::string system;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::size_t starts = 0;
  std::vector<Alpha0Level> levels;
};

/// beta_i = minimize_pair at each r_i, warm-starting each level from the
/// previous level's witness. Throws PreconditionError unless the grid is
/// positive and strictly increasing; per-level failures are recorded.
Alpha0Table estimate_alpha0(const SystemSpec& spec, double T, const std::vector<double>& r_grid,
                            const MinimizeOptions& options = {});

/// Raised by build_k_function when some level has beta == 0 (or no beta).
class NotKObservableError : public Error {
 public:
  NotKObservableError(std::string message, std::vector<Alpha0Level> witnesses);

  /// The offending levels, with their minimizing pairs.
  const std::vector<Alpha0Level>& witnesses() const noexcept { return witnesses_; }

 private:
  std::vector<Alpha0Level> witnesses_;
};

/// Continuous, strictly increasing piecewise-linear function with alpha(0) = 0.
class KFunction {
 public:
  KFunction() = default;
  /// Anchors must start at (0, 0) and be strictly increasing in both
  /// coordinates; throws PreconditionError otherwise.
  explicit KFunction(std::vector<std::pair<double, double>> anchors);

  const std::vector<std::pair<double, double>>& anchors() const noexcept { return anchors_; }
  /// The minorant bound holds on [certified_lo, certified_hi] = [r_0, r_K].
  double certified_lo() const noexcept { return anchors_.size() > 1 ? anchors_[1].first : 0.0; }
  double certified_hi() const noexcept { return anchors_.empty() ? 0.0 : anchors_.back().first; }
  bool certified(double r) const noexcept { return r >= certified_lo() && r <= certified_hi(); }

 private:
  std::vector<std::pair<double, double>> anchors_;
};

/// Builds the minorant of the table: right-running minimum, strictified by
/// the factor r_i / r_K, lagged by one grid point and interpolated linearly.
/// Needs at least two levels, all with beta > 0.
KFunction build_k_function(const Alpha0Table& table);

/// Linear interpolation of the anchors on [0, r_K]; OutOfRangeError outside.
double eval_k(const KFunction& k, double r);

struct CertificateCheck {
  double r = 0.0;
  double distance = 0.0;
  double integral = 0.0;
  double alpha = 0.0;
  bool holds = false;
};

/// Replays each level's witness pair: integral_eta >= alpha(min(|x1-x2|, r_K)) - 1e-12.
std::vector<CertificateCheck> replay_certificate(const SystemSpec& spec, const Alpha0Table& table,
                                                 const KFunction& k,
                                                 const IntegratorConfig& cfg = {});

}  // namespace obswin
