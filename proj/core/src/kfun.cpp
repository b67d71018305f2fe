#include "obswin/kfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "obswin/parallel.hpp"
#include "obswin/sampling.hpp"

namespace obswin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDistanceSlack = 1e-12;

bool far_enough(const Vector& a, const Vector& b, double r) {
  return (a - b).norm() >= r * (1.0 - kDistanceSlack);
}

/// Objective on the stacked pair z = (x1, x2).
class PairObjective {
 public:
  PairObjective(const SystemSpec& spec, double r, double T, const IntegratorConfig& cfg)
      : spec_(spec), r_(r), T_(T), cfg_(cfg) {}

  std::size_t n() const { return spec_.n; }

  std::optional<StatePair> project(const Vector& z) const {
    const auto n = static_cast<Eigen::Index>(spec_.n);
    return project_pair(spec_.omega, z.head(n), z.tail(n), r_);
  }

  /// +inf for infeasible pairs and for pairs whose trajectories stop early.
  double operator()(const Vector& z) {
    ++evaluations_;
    const auto pair = project(z);
    if (!pair) return kInf;
    try {
      const EtaIntegral result = integral_eta(spec_, pair->first, pair->second, T_, cfg_);
      if (result.truncated || !std::isfinite(result.value)) return kInf;
      return result.value;
    } catch (const DomainError&) {
      return kInf;
    }
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const SystemSpec& spec_;
  double r_;
  double T_;
  const IntegratorConfig& cfg_;
  std::size_t evaluations_ = 0;
};

struct StartResult {
  double value = kInf;
  Vector z;
  bool converged = false;
  std::size_t evaluations = 0;
};

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han).
StartResult nelder_mead(PairObjective& fn, const Vector& start, const Vector& step,
                        std::size_t budget, double xtol) {
  const auto d = start.size();
  const double dd = static_cast<double>(d);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dd;
  const double contract = 0.75 - 1.0 / (2.0 * dd);
  const double shrink = 1.0 - 1.0 / dd;

  std::vector<Vector> simplex(static_cast<std::size_t>(d) + 1, start);
  for (Eigen::Index i = 0; i < d; ++i) simplex[static_cast<std::size_t>(i) + 1][i] += step[i];
  std::vector<double> values(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = fn(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  StartResult out;
  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double size = 0.0;
    for (const Vector& v : simplex) size = std::max(size, (v - simplex[best]).cwiseAbs().maxCoeff());
    const double spread = values[worst] - values[best];
    const bool flat = std::isfinite(values[worst]) &&
                      (spread == 0.0 || spread <= 1e-15 + 1e-10 * std::abs(values[best]));
    if (flat && (size <= xtol || spread == 0.0)) {
      out.converged = true;
      break;
    }
    if (fn.evaluations() >= budget) break;

    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= dd;

    const Vector xr = centroid + reflect * (centroid - simplex[worst]);
    const double fr = fn(xr);
    if (fr < values[best]) {
      const Vector xe = centroid + expand * (xr - centroid);
      const double fe = fn(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vector xc = outside ? Vector(centroid + contract * (xr - centroid))
                              : Vector(centroid + contract * (simplex[worst] - centroid));
    const double fc = fn(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
      values[i] = fn(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  out.value = *best_it;
  out.z = simplex[static_cast<std::size_t>(best_it - values.begin())];
  out.evaluations = fn.evaluations();
  return out;
}

Vector stack(const Vector& a, const Vector& b) {
  Vector z(a.size() + b.size());
  z << a, b;
  return z;
}

}  // namespace

const char* to_string(MinimizerStatus status) {
  return status == MinimizerStatus::Converged ? "converged" : "budget-exhausted";
}

std::optional<StatePair> project_pair(const Box& omega, const Vector& x1, const Vector& x2,
                                      double r) {
  const Vector a = omega.clamp(x1);
  const Vector b = omega.clamp(x2);
  if (far_enough(a, b, r)) return StatePair{a, b};

  Vector u = b - a;
  const double dist = u.norm();
  if (dist > 0.0) {
    u /= dist;
  } else {
    // Coincident points: separate along the widest axis.
    u = Vector::Zero(a.size());
    std::size_t widest = 0;
    for (std::size_t i = 1; i < omega.dim(); ++i)
      if (omega[i].width() > omega[widest].width()) widest = i;
    u[static_cast<Eigen::Index>(widest)] = 1.0;
  }
  const Vector mid = 0.5 * (a + b);
  const Vector lo = omega.clamp(mid - 0.5 * r * u);
  const Vector hi = omega.clamp(mid + 0.5 * r * u);
  if (far_enough(lo, hi, r)) return StatePair{lo, hi};
  // Anchor at whichever end was clamped and push the other one inward.
  const Vector hi_from_lo = omega.clamp(lo + r * u);
  if (far_enough(lo, hi_from_lo, r)) return StatePair{lo, hi_from_lo};
  const Vector lo_from_hi = omega.clamp(hi - r * u);
  if (far_enough(lo_from_hi, hi, r)) return StatePair{lo_from_hi, hi};
  return std::nullopt;
}

PairMinimum minimize_pair(const SystemSpec& spec, double r, double T,
                          const MinimizeOptions& options) {
  if (!(r > 0.0)) throw PreconditionError("minimize_pair needs r > 0");
  if (!(T > 0.0)) throw PreconditionError("minimize_pair needs T > 0");
  if (r > spec.omega.diameter() * (1.0 + kDistanceSlack))
    throw InfeasibleError("no pair of omega is " + std::to_string(r) +
                          " apart (diameter " + std::to_string(spec.omega.diameter()) + ")");
  if (options.starts == 0 || options.evaluations_per_start == 0)
    throw PreconditionError("minimize_pair needs at least one start and a positive budget");

  const std::size_t n = spec.n;
  std::vector<Vector> starts;
  if (options.warm_start) starts.push_back(stack(options.warm_start->first, options.warm_start->second));

  PairSamplingPlan boundary;
  boundary.strategy = PairSamplingPlan::Strategy::BoundaryBiased;
  boundary.r_min = std::min(r, spec.omega.diameter());
  boundary.count = 0;
  boundary.anchor_distances = {r};
  const std::size_t boundary_cap = std::max<std::size_t>(1, options.starts / 2);
  for (const auto& [a, b] : sample_pairs(spec.omega, boundary)) {
    if (starts.size() >= boundary_cap + (options.warm_start ? 1 : 0)) break;
    starts.push_back(stack(a, b));
  }
  HaltonSequence seq(2 * n, options.seed);
  while (starts.size() < options.starts) {
    const Vector u = seq.next();
    const auto k = static_cast<Eigen::Index>(n);
    starts.push_back(stack(map_to_box(spec.omega, u.head(k)), map_to_box(spec.omega, u.tail(k))));
  }
  if (starts.size() > options.starts) starts.resize(options.starts);

  Vector step(2 * n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = spec.omega[i].width();
    step[static_cast<Eigen::Index>(i)] = 0.1 * w;
    step[static_cast<Eigen::Index>(i + n)] = 0.1 * w;
    scale = std::max(scale, w);
  }
  const double xtol = 1e-8 * std::max(scale, 1e-300);

  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), options.jobs, [&](std::size_t i) {
    PairObjective fn(spec, r, T, options.integrator);
    const auto projected = fn.project(starts[i]);
    if (!projected) return;
    results[i] = nelder_mead(fn, stack(projected->first, projected->second), step,
                             options.evaluations_per_start, xtol);
  });

  PairMinimum out;
  out.starts = starts.size();
  out.value = kInf;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.evaluations += results[i].evaluations;
    if (!std::isfinite(results[i].value)) {
      ++out.failed_starts;
      continue;
    }
    if (!best || results[i].value < results[*best].value) best = i;
  }
  if (!best)
    throw AnalysisError("minimize_pair: all " + std::to_string(starts.size()) +
                        " starts failed (trajectories escape or leave the domain before T)");

  const PairObjective probe(spec, r, T, options.integrator);
  const auto pair = probe.project(results[*best].z);
  out.value = results[*best].value;
  out.x1 = pair->first;
  out.x2 = pair->second;
  out.status = results[*best].converged ? MinimizerStatus::Converged
                                        : MinimizerStatus::BudgetExhausted;
  return out;
}

Alpha0Table estimate_alpha0(const SystemSpec& spec, double T, const std::vector<double>& r_grid,
                            const MinimizeOptions& options) {
  if (r_grid.empty()) throw PreconditionError("alpha0 grid is empty");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0) || !std::isfinite(r_grid[i]))
      throw PreconditionError("alpha0 grid values must be positive and finite");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
      throw PreconditionError("alpha0 grid must be strictly increasing");
  }
  if (!(T > 0.0)) throw PreconditionError("alpha0 horizon T must be positive");

  Alpha0Table table;
  table.system = spec.name;
  table.horizon = T;
  table.seed = options.seed;
  table.starts = options.starts;

  MinimizeOptions level_options = options;
  for (double r : r_grid) {
    Alpha0Level level;
    level.r = r;
    try {
      const PairMinimum m = minimize_pair(spec, r, T, level_options);
      level.beta = m.value;
      level.x1 = m.x1;
      level.x2 = m.x2;
      level.status = m.status;
      level.evaluations = m.evaluations;
      level_options.warm_start = StatePair{m.x1, m.x2};
    } catch (const InfeasibleError& e) {
      level.error = std::string("infeasible: ") + e.what();
    } catch (const AnalysisError& e) {
      level.error = e.what();
    }
    table.levels.push_back(std::move(level));
  }
  return table;
}

NotKObservableError::NotKObservableError(std::string message, std::vector<Alpha0Level> witnesses)
    : Error(std::move(message)), witnesses_(std::move(witnesses)) {}

KFunction::KFunction(std::vector<std::pair<double, double>> anchors) : anchors_(std::move(anchors)) {
  if (anchors_.size() < 2 || anchors_.front() != std::pair<double, double>{0.0, 0.0})
    throw PreconditionError("K-function anchors must start at (0, 0) and have at least two points");
  for (std::size_t i = 1; i < anchors_.size(); ++i) {
    if (!(anchors_[i].first > anchors_[i - 1].first) || !(anchors_[i].second > anchors_[i - 1].second))
      throw PreconditionError("K-function anchors must be strictly increasing");
  }
}

KFunction build_k_function(const Alpha0Table& table) {
  const auto& levels = table.levels;
  std::vector<Alpha0Level> bad;
  for (const Alpha0Level& level : levels)
    if (!level.beta || !(*level.beta > 0.0)) bad.push_back(level);
  if (!bad.empty()) {
    std::string msg = "not K-observable on evidence: alpha0 estimate is zero (or missing) at r =";
    for (const Alpha0Level& level : bad) msg += " " + std::to_string(level.r);
    throw NotKObservableError(msg, std::move(bad));
  }
  if (levels.size() < 2) throw PreconditionError("a K-function needs at least two grid levels");

  const std::size_t last = levels.size() - 1;
  const double r_top = levels[last].r;

  // Right-running minimum: nondecreasing and below every beta at or after i.
  std::vector<double> running(levels.size());
  running[last] = *levels[last].beta;
  for (std::size_t i = last; i-- > 0;) running[i] = std::min(*levels[i].beta, running[i + 1]);

  // Strictify by the positive, strictly increasing factor r_i / r_K.
  std::vector<double> strict(levels.size());
  for (std::size_t i = 0; i <= last; ++i) strict[i] = running[i] * (levels[i].r / r_top);

  std::vector<std::pair<double, double>> anchors{{0.0, 0.0}};
  anchors.emplace_back(levels[0].r, strict[0] * (levels[0].r / levels[1].r));
  for (std::size_t i = 1; i <= last; ++i) anchors.emplace_back(levels[i].r, strict[i - 1]);
  return KFunction(std::move(anchors));
}

double eval_k(const KFunction& k, double r) {
  const auto& a = k.anchors();
  if (a.empty() || !(r >= 0.0) || r > a.back().first)
    throw OutOfRangeError("K-function evaluated at r = " + std::to_string(r) +
                          " outside its domain [0, " + std::to_string(k.certified_hi()) + "]");
  auto it = std::lower_bound(a.begin(), a.end(), r,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it->first == r) return it->second;
  const auto& [r1, v1] = *it;
  const auto& [r0, v0] = *std::prev(it);
  return v0 + (v1 - v0) * ((r - r0) / (r1 - r0));
}

std::vector<CertificateCheck> replay_certificate(const SystemSpec& spec, const Alpha0Table& table,
                                                 const KFunction& k, const IntegratorConfig& cfg) {
  std::vector<CertificateCheck> checks;
  for (const Alpha0Level& level : table.levels) {
    if (!level.beta) continue;
    CertificateCheck c;
    c.r = level.r;
    c.distance = (level.x1 - level.x2).norm();
    c.integral = integral_eta(spec, level.x1, level.x2, table.horizon, cfg).value;
    c.alpha = eval_k(k, std::min(c.distance, k.certified_hi()));
    c.holds = c.integral >= c.alpha - 1e-12;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace obswin
