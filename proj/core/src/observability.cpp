#include "obswin/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SVD>

#include "obswin/error.hpp"
#include "obswin/parallel.hpp"

namespace obswin {

Expr lie_derivative(const SystemSpec& spec, const Expr& e) {
  Expr sum = Expr::constant(0.0);
  for (std::size_t i = 0; i < spec.n; ++i) sum = add(sum, mul(differentiate(e, i), spec.f[i]));
  return simplify(sum);
}

ObservabilityMap observability_map(const SystemSpec& spec, std::size_t order) {
  if (order == 0) throw PreconditionError("observability map order N must be at least 1");
  ObservabilityMap map;
  map.order = order;
  map.n = spec.n;
  map.p = spec.p;
  map.params = spec.params;
  map.rows.reserve(order * spec.p);
  for (const Expr& h : spec.h) map.rows.push_back(simplify(h));
  for (std::size_t k = 1; k < order; ++k) {
    const std::size_t prev = (k - 1) * spec.p;
    for (std::size_t j = 0; j < spec.p; ++j)
      map.rows.push_back(lie_derivative(spec, map.rows[prev + j]));
  }
  for (const Expr& row : map.rows) {
    std::vector<Expr> grad;
    grad.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) grad.push_back(differentiate(row, i));
    map.jacobian.push_back(std::move(grad));
  }
  return map;
}

Vector ObservabilityMap::eval_rows(const Vector& x, const EvalOptions& opts) const {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<Eigen::Index>(r)] = eval_expr(rows[r], as_span(x), params, opts);
  return out;
}

Matrix ObservabilityMap::eval_jacobian(const Vector& x, const EvalOptions& opts) const {
  Matrix jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < n; ++c)
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          eval_expr(jacobian[r][c], as_span(x), params, opts);
  return jac;
}

double ObservabilityMap::seam_gap(const Vector& x) const {
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& row : jacobian)
    for (const Expr& e : row) gap = std::min(gap, obswin::seam_gap(e, as_span(x), params));
  return gap;
}

RankAtPoint numerical_rank(const Matrix& jacobian, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("rank tolerance must be positive");
  RankAtPoint out;
  const auto n = jacobian.cols();
  Eigen::JacobiSVD<Matrix> svd(jacobian);
  out.singular_values = svd.singularValues();
  out.sigma_max = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  out.sigma_min = out.singular_values.size() >= n && n > 0 ? out.singular_values[n - 1] : 0.0;
  const double threshold = tol * std::max(out.sigma_max, 1.0);
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values[i] > threshold) ++out.rank;
  return out;
}

RankAtPoint jacobian_rank_at(const ObservabilityMap& map, const Vector& x, double tol) {
  return numerical_rank(map.eval_jacobian(x), tol);
}

const char* to_string(RankVerdict verdict) {
  switch (verdict) {
    case RankVerdict::FullRankOnSamples: return "full-rank-on-samples";
    case RankVerdict::DeficientAtWitnesses: return "deficient-at-witnesses";
  }
  return "?";
}

namespace {

struct PointOutcome {
  std::optional<RankSample> sample;
  std::optional<ExcludedPoint> excluded;
};

PointOutcome evaluate_point(const ObservabilityMap& map, const Vector& x, const RankOptions& opts) {
  PointOutcome out;
  Matrix jac;
  try {
    if (!map.eval_rows(x).allFinite()) {
      out.excluded = ExcludedPoint{x, "undefined: non-finite map value"};
      return out;
    }
    if (map.seam_gap(x) <= opts.seam_margin) {
      EvalOptions then_side{opts.seam_margin, SeamBranch::Then};
      EvalOptions else_side{opts.seam_margin, SeamBranch::Else};
      const Matrix a = map.eval_jacobian(x, then_side);
      const Matrix b = map.eval_jacobian(x, else_side);
      const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
      if (!a.allFinite() || !b.allFinite() || (a - b).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        out.excluded = ExcludedPoint{x, "non-smooth: Jacobian differs across conditional seam"};
        return out;
      }
      jac = a;
    } else {
      jac = map.eval_jacobian(x);
    }
  } catch (const DomainError& e) {
    out.excluded = ExcludedPoint{x, std::string("undefined: ") + e.what()};
    return out;
  }
  if (!jac.allFinite()) {
    out.excluded = ExcludedPoint{x, "undefined: non-finite Jacobian entry"};
    return out;
  }
  const RankAtPoint r = numerical_rank(jac, opts.tol);
  out.sample = RankSample{x, r.rank, r.sigma_min};
  return out;
}

}  // namespace

RankReport rank_report(const SystemSpec& spec, std::size_t order, const SamplingPlan& plan,
                       const RankOptions& options) {
  if (!(options.tol > 0.0)) throw PreconditionError("rank tolerance must be positive");
  const ObservabilityMap map = observability_map(spec, order);
  const std::vector<Vector> points = sample_box(spec.omega, plan);

  std::vector<PointOutcome> outcomes(points.size());
  parallel_for(points.size(), options.jobs,
               [&](std::size_t i) { outcomes[i] = evaluate_point(map, points[i], options); });

  RankReport report;
  report.system = spec.name;
  report.order = order;
  report.n = spec.n;
  report.tol = options.tol;
  report.seam_margin = options.seam_margin;
  report.sampling = plan.kind == SamplingPlan::Kind::Grid ? "grid" : "low-discrepancy";
  report.min_sigma = std::numeric_limits<double>::infinity();
  for (PointOutcome& o : outcomes) {
    if (o.excluded) {
      report.excluded.push_back(std::move(*o.excluded));
      continue;
    }
    const RankSample& s = *o.sample;
    if (s.sigma_min < report.min_sigma) {
      report.min_sigma = s.sigma_min;
      report.witness = s.point;
    }
    if (s.rank < spec.n) report.deficient.push_back(s);
    report.samples.push_back(std::move(*o.sample));
  }
  if (report.samples.empty())
    throw AnalysisError("rank analysis: every sample point was excluded (" +
                        std::to_string(report.excluded.size()) + " points)");
  report.verdict = report.deficient.empty() ? RankVerdict::FullRankOnSamples
                                            : RankVerdict::DeficientAtWitnesses;
  // The witness of a deficient verdict is a deficient point of smallest sigma.
  if (!report.deficient.empty()) {
    const auto worst = std::min_element(
        report.deficient.begin(), report.deficient.end(),
        [](const RankSample& a, const RankSample& b) { return a.sigma_min < b.sigma_min; });
    report.witness = worst->point;
    report.min_sigma = std::min(report.min_sigma, worst->sigma_min);
  }
  return report;
}

}  // namespace obswin
