#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obswin/sampling.hpp"
#include "obswin/system.hpp"

namespace obswin {

/// L_f e = sum_i (de/dx_i) f_i, simplified.
Expr lie_derivative(const SystemSpec& spec, const Expr& e);

/// Stacked map H(x) = (h, L_f h, ..., L_f^{N-1} h) together with its
/// symbolic Jacobian. Row k*p + j holds L_f^k h_j.
struct ObservabilityMap {
  std::size_t order = 0;  // N
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<Expr> rows;
  std::vector<std::vector<Expr>> jacobian;  // rows.size() x n
  ParamEnv params;

  std::size_t row_count() const noexcept { return rows.size(); }
  Vector eval_rows(const Vector& x, const EvalOptions& opts = {}) const;
  Matrix eval_jacobian(const Vector& x, const EvalOptions& opts = {}) const;
  /// Smallest predicate gap over every conditional in the Jacobian entries.
  double seam_gap(const Vector& x) const;
};

/// Throws PreconditionError if order == 0.
ObservabilityMap observability_map(const SystemSpec& spec, std::size_t order);

struct RankAtPoint {
  std::size_t rank = 0;
  /// n-th largest singular value; 0 when the Jacobian has fewer than n rows.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  Vector singular_values;
};

/// Numerical rank of the evaluated Jacobian of H at x: the number of singular
/// values above tol * max(sigma_max, 1). Throws DomainError if H is not
/// defined at x.
RankAtPoint jacobian_rank_at(const ObservabilityMap& map, const Vector& x, double tol);

/// Rank verdict for an already-evaluated Jacobian (n = columns).
RankAtPoint numerical_rank(const Matrix& jacobian, double tol);

struct RankOptions {
  double tol = 1e-8;
  /// Points this close to a conditional predicate boundary are evaluated on
  /// both branches.
  double seam_margin = 1e-9;
  std::size_t jobs = 1;
};

struct RankSample {
  Vector point;
  std::size_t rank = 0;
  double sigma_min = 0.0;
};

struct ExcludedPoint {
  Vector point;
  std::string reason;
};

enum class RankVerdict { FullRankOnSamples, DeficientAtWitnesses };
const char* to_string(RankVerdict verdict);

struct RankReport {
  std::string system;
  std::size_t order = 0;
  std::size_t n = 0;
  double tol = 0.0;
  double seam_margin = 0.0;
  std::string sampling;  // "grid" or "low-discrepancy"
  std::vector<RankSample> samples;
  double min_sigma = 0.0;
  Vector witness;
  RankVerdict verdict = RankVerdict::FullRankOnSamples;
  /// Every sample whose rank is below n.
  std::vector<RankSample> deficient;
  std::vector<ExcludedPoint> excluded;
};

/// Evaluates jacobian_rank_at on every sample of the plan. Samples where H is
/// undefined, or where the two sides of a seam disagree, are listed as
/// excluded. Throws AnalysisError if no sample could be evaluated.
RankReport rank_report(const SystemSpec& spec, std::size_t order, const SamplingPlan& plan,
                       const RankOptions& options = {});

}  // namespace obswin
