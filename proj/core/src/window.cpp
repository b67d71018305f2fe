#include "obswin/window.hpp"

#include <algorithm>
#include <cmath>

#include "obswin/error.hpp"
#include "obswin/parallel.hpp"
#include "obswin/sampling.hpp"

namespace obswin {
namespace {

// Relative slack when comparing pair separations against r thresholds, so a
// pair built as (c, c + r e_i) counts as being at distance r.
constexpr double kDistanceSlack = 1e-12;

bool at_least(double distance, double r) { return distance >= r * (1.0 - kDistanceSlack); }

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool same_pair(const StatePair& a, const StatePair& b) {
  return (a.first == b.first && a.second == b.second) ||
         (a.first == b.second && a.second == b.first);
}

void push_unique(std::vector<StatePair>& pairs, StatePair candidate) {
  if (std::none_of(pairs.begin(), pairs.end(),
                   [&](const StatePair& p) { return same_pair(p, candidate); }))
    pairs.push_back(std::move(candidate));
}

void fill_low_discrepancy(const Box& omega, const PairSamplingPlan& plan,
                          std::vector<StatePair>& pairs) {
  const auto n = static_cast<Eigen::Index>(omega.dim());
  HaltonSequence seq(2 * omega.dim(), plan.seed);
  const std::size_t max_draws = 64 * std::max<std::size_t>(plan.count, 1) + 1024;
  for (std::size_t draw = 0; draw < max_draws && pairs.size() < plan.count; ++draw) {
    const Vector u = seq.next();
    Vector x1 = map_to_box(omega, u.head(n));
    Vector x2 = map_to_box(omega, u.tail(n));
    if (at_least((x1 - x2).norm(), plan.r_min)) push_unique(pairs, {std::move(x1), std::move(x2)});
  }
}

}  // namespace

const char* to_string(PairSamplingPlan::Strategy strategy) {
  switch (strategy) {
    case PairSamplingPlan::Strategy::Grid: return "grid";
    case PairSamplingPlan::Strategy::LowDiscrepancy: return "low-discrepancy";
    case PairSamplingPlan::Strategy::BoundaryBiased: return "boundary-biased";
    case PairSamplingPlan::Strategy::Explicit: return "explicit";
  }
  return "?";
}

const char* to_string(Distinction d) {
  switch (d) {
    case Distinction::Distinguished: return "distinguished";
    case Distinction::NotDistinguished: return "not-distinguished";
    case Distinction::Truncated: return "truncated";
  }
  return "?";
}

std::vector<StatePair> sample_pairs(const Box& omega, const PairSamplingPlan& plan) {
  if (!(plan.r_min > 0.0) || !std::isfinite(plan.r_min))
    throw PreconditionError("pair sampling needs a positive separation floor r_min");
  std::vector<StatePair> pairs;

  switch (plan.strategy) {
    case PairSamplingPlan::Strategy::Explicit:
      for (const auto& [x1, x2] : plan.pairs) {
        if (!omega.contains(x1) || !omega.contains(x2))
          throw PreconditionError("explicit pair lies outside omega");
        if (!at_least((x1 - x2).norm(), plan.r_min))
          throw PreconditionError("explicit pair is closer than r_min (x1 == x2 is never allowed)");
        pairs.emplace_back(x1, x2);
      }
      break;

    case PairSamplingPlan::Strategy::Grid: {
      SamplingPlan grid;
      grid.kind = SamplingPlan::Kind::Grid;
      grid.points_per_axis = plan.points_per_axis;
      const std::vector<Vector> points = sample_box(omega, grid);
      for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
          if (at_least((points[i] - points[j]).norm(), plan.r_min))
            pairs.emplace_back(points[i], points[j]);
      break;
    }

    case PairSamplingPlan::Strategy::LowDiscrepancy:
      fill_low_discrepancy(omega, plan, pairs);
      break;

    case PairSamplingPlan::Strategy::BoundaryBiased: {
      const std::vector<Vector> corners =
          omega.dim() <= 6 ? omega.corners() : std::vector<Vector>{omega.lower(), omega.upper()};
      for (std::size_t i = 0; i < corners.size(); ++i)
        for (std::size_t j = i + 1; j < corners.size(); ++j)
          if (at_least((corners[i] - corners[j]).norm(), plan.r_min))
            push_unique(pairs, {corners[i], corners[j]});
      for (double r : plan.anchor_distances) {
        if (!at_least(r, plan.r_min)) continue;
        for (const Vector& c : corners) {
          for (std::size_t axis = 0; axis < omega.dim(); ++axis) {
            const auto k = static_cast<Eigen::Index>(axis);
            Vector other = c;
            other[k] += c[k] == omega[axis].lo ? r : -r;
            if (omega.contains(other)) push_unique(pairs, {c, std::move(other)});
          }
        }
      }
      fill_low_discrepancy(omega, plan, pairs);
      break;
    }
  }
  return pairs;
}

DistinguishResult distinguishing_time(const SystemSpec& spec, const Vector& x1_in,
                                      const Vector& x2_in, double t_max, double eps_sep,
                                      const IntegratorConfig& cfg) {
  if (!(eps_sep > 0.0)) throw PreconditionError("separation threshold eps_sep must be positive");
  if (!(t_max > 0.0)) throw PreconditionError("T_max must be positive");
  if (x1_in == x2_in) throw PreconditionError("distinguishing_time needs x1 != x2");

  // Canonical order makes the result exactly symmetric in (x1, x2).
  const bool swap = lex_less(x2_in, x1_in);
  const Vector& x1 = swap ? x2_in : x1_in;
  const Vector& x2 = swap ? x1_in : x2_in;

  const Trajectory traj1 = integrate(spec, x1, t_max, cfg);
  const Trajectory traj2 = integrate(spec, x2, t_max, cfg);
  const double horizon = std::min(traj1.reached(), traj2.reached());

  auto gap = [&](double t) {
    return (output_at(spec, traj1, t) - output_at(spec, traj2, t)).norm();
  };

  DistinguishResult out;
  out.horizon = horizon;
  if (gap(0.0) >= eps_sep) {
    out.verdict = Distinction::Distinguished;
    out.time = 0.0;
    return out;
  }

  std::vector<double> nodes;
  for (const Trajectory* tr : {&traj1, &traj2})
    for (double s : tr->step_times())
      if (s <= horizon) nodes.push_back(s);
  nodes.push_back(horizon);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  constexpr int kSubdivisions = 8;
  double lo = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i - 1];
    const double b = nodes[i];
    for (int s = 1; s <= kSubdivisions; ++s) {
      const double t = s == kSubdivisions ? b : a + (b - a) * s / kSubdivisions;
      if (gap(t) < eps_sep) {
        lo = t;
        continue;
      }
      double hi = t;
      for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) >= eps_sep)
          hi = mid;
        else
          lo = mid;
      }
      out.verdict = Distinction::Distinguished;
      out.time = hi;
      return out;
    }
  }

  out.verdict = horizon < t_max ? Distinction::Truncated : Distinction::NotDistinguished;
  return out;
}

WindowReport probe_indistinguishable(const SystemSpec& spec, const PairSamplingPlan& plan,
                                     const WindowOptions& options) {
  const std::vector<StatePair> pairs = sample_pairs(spec.omega, plan);

  WindowReport report;
  report.system = spec.name;
  report.r_min = plan.r_min;
  report.eps_sep = options.eps_sep;
  report.t_max = options.t_max;
  report.strategy = to_string(plan.strategy);
  report.seed = plan.seed;
  report.pairs.resize(pairs.size());

  parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    const auto& [x1, x2] = pairs[i];
    PairRecord& rec = report.pairs[i];
    rec.x1 = x1;
    rec.x2 = x2;
    rec.distance = (x1 - x2).norm();
    rec.result = distinguishing_time(spec, x1, x2, options.t_max, options.eps_sep,
                                     options.integrator);
  });

  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const DistinguishResult& r = report.pairs[i].result;
    switch (r.verdict) {
      case Distinction::Distinguished: report.t_hat = std::max(report.t_hat, r.time); break;
      case Distinction::NotDistinguished: report.undistinguished.push_back(i); break;
      case Distinction::Truncated: report.truncated.push_back(i); break;
    }
  }
  report.t_hat_lower_bound = !report.undistinguished.empty();
  return report;
}

WindowReport estimate_window(const SystemSpec& spec, const PairSamplingPlan& plan,
                             const WindowOptions& options, std::vector<double> r_ladder) {
  if (!(plan.r_min > 0.0)) throw PreconditionError("window estimation needs r_min > 0");
  for (double r : r_ladder)
    if (!(r > 0.0)) throw PreconditionError("r ladder values must be positive");

  PairSamplingPlan anchored = plan;
  if (anchored.anchor_distances.empty()) anchored.anchor_distances = r_ladder;
  WindowReport report = probe_indistinguishable(spec, anchored, options);

  r_ladder.push_back(plan.r_min);
  std::sort(r_ladder.begin(), r_ladder.end(), std::greater<>());
  r_ladder.erase(std::unique(r_ladder.begin(), r_ladder.end()), r_ladder.end());
  r_ladder.erase(std::remove_if(r_ladder.begin(), r_ladder.end(),
                                [&](double r) { return r < plan.r_min; }),
                 r_ladder.end());

  for (double r : r_ladder) {
    WindowCurvePoint point;
    point.r = r;
    for (const PairRecord& rec : report.pairs) {
      if (!at_least(rec.distance, r)) continue;
      ++point.pairs;
      switch (rec.result.verdict) {
        case Distinction::Distinguished: point.t_hat = std::max(point.t_hat, rec.result.time); break;
        case Distinction::NotDistinguished: ++point.undistinguished; break;
        case Distinction::Truncated: ++point.truncated; break;
      }
    }
    point.lower_bound = point.undistinguished > 0;
    report.curve.push_back(point);
  }
  return report;
}

}  // namespace obswin
