#include "obswin/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "obswin/error.hpp"
#include "obswin/quadrature.hpp"

namespace obswin {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

class RightHandSide {
 public:
  explicit RightHandSide(const SystemSpec& spec) : spec_(spec) {}

  /// False when f is undefined or non-finite at x.
  bool operator()(const Vector& x, Vector& out) {
    try {
      out = spec_.eval_f(x);
    } catch (const DomainError& e) {
      last_error_ = e.what();
      return false;
    }
    return out.allFinite();
  }

  const std::string& last_error() const { return last_error_; }

 private:
  const SystemSpec& spec_;
  std::string last_error_;
};

double scaled_rms(const Vector& v, const Vector& scale) {
  return std::sqrt((v.array() / scale.array()).square().mean());
}

double initial_step(RightHandSide& rhs, const Vector& y, const Vector& f0, double T,
                    const IntegratorConfig& cfg) {
  const Vector scale = (cfg.abs_tol + cfg.rel_tol * y.array().abs()).matrix();
  const double d0 = scaled_rms(y, scale);
  const double d1n = scaled_rms(f0, scale);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, T);
  Vector f1;
  const Vector y1 = y + h0 * f0;
  double d2 = 0.0;
  if (rhs(y1, f1)) d2 = scaled_rms(f1 - f0, scale) / h0;
  const double dmax = std::max(d1n, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, T});
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_steps == 0 || !(escape_norm > 0.0))
    throw PreconditionError("integrator tolerances, step budget and escape norm must be positive");
}

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::Escaped: return "escaped";
    case TrajectoryStatus::StepFailure: return "step-failure";
  }
  return "?";
}

Vector Trajectory::state_at(double t) const {
  if (!(t >= 0.0 && t <= t_reached_)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "time %.17g outside trajectory range [0, %.17g]", t,
                  t_reached_);
    throw OutOfRangeError(buf);
  }
  if (segments_.empty()) return x0_;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const Segment& s) { return value < s.t0; });
  const Segment& seg = *(it == segments_.begin() ? it : std::prev(it));
  if (t == seg.t0) return seg.start;
  if (t >= seg.t0 + seg.h) return seg.end;
  const double theta = (t - seg.t0) / seg.h;
  const double theta1 = 1.0 - theta;
  return seg.coeff[0] +
         theta * (seg.coeff[1] +
                  theta1 * (seg.coeff[2] + theta * (seg.coeff[3] + theta1 * seg.coeff[4])));
}

std::vector<double> Trajectory::step_times() const {
  std::vector<double> times{0.0};
  for (const Segment& s : segments_) times.push_back(s.t0 + s.h);
  if (!segments_.empty()) times.back() = t_reached_;
  return times;
}

Trajectory integrate(const SystemSpec& spec, const Vector& x0, double T,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionError("integration horizon must be positive");
  if (static_cast<std::size_t>(x0.size()) != spec.n)
    throw PreconditionError("initial state has wrong dimension");

  Trajectory traj;
  traj.x0_ = x0;
  traj.t_requested_ = T;
  traj.t_reached_ = 0.0;

  RightHandSide rhs(spec);
  auto fail = [&](TrajectoryStatus status, std::string reason) {
    traj.status_ = status;
    traj.failure_reason_ = std::move(reason);
    return traj;
  };

  Vector y = x0;
  if (y.norm() > cfg.escape_norm) return fail(TrajectoryStatus::Escaped, "initial state beyond escape norm");
  Vector k1, k2, k3, k4, k5, k6, k7;
  if (!rhs(y, k1)) return fail(TrajectoryStatus::StepFailure, "vector field undefined at initial state: " + rhs.last_error());

  double t = 0.0;
  double h = initial_step(rhs, y, k1, T, cfg);
  bool rejected_last = false;
  bool blowup_seen = false;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  while (t < T) {
    if (traj.segments_.size() >= cfg.max_steps)
      return fail(TrajectoryStatus::StepFailure, "step budget exhausted");

    if (h < 16.0 * eps * std::max(1.0, std::abs(t))) {
      if (blowup_seen) return fail(TrajectoryStatus::Escaped, "state grows without bound");
      // The escape norm can lie beyond what the time grid resolves (x' = x^3
      // reaches 1e8 within 1e-16 of its blow-up time). A state that has grown
      // and changes on a time scale below the resolution is escaping too.
      const double growth_scale = y.norm() / k1.norm();
      if (y.norm() > std::max(1.0, x0.norm()) && growth_scale < 1e6 * eps * std::max(1.0, t))
        return fail(TrajectoryStatus::Escaped, "state grows without bound");
      return fail(TrajectoryStatus::StepFailure, "step size underflow");
    }
    const bool last = t + 1.01 * h >= T;
    if (last) h = T - t;

    Vector y1;
    double err = std::numeric_limits<double>::infinity();
    bool stages_ok = rhs(y + h * a21 * k1, k2) &&
                     rhs(y + h * (a31 * k1 + a32 * k2), k3) &&
                     rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4) &&
                     rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5) &&
                     rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    if (stages_ok) {
      y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      stages_ok = y1.allFinite() && rhs(y1, k7);
    }
    if (stages_ok) {
      const Vector err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Vector scale =
          (cfg.abs_tol + cfg.rel_tol * y.array().abs().max(y1.array().abs())).matrix();
      err = scaled_rms(err_vec, scale);
      if (!std::isfinite(err)) stages_ok = false;
      if (y1.norm() > cfg.escape_norm && err > 1.0) blowup_seen = true;
    } else {
      blowup_seen = true;
    }

    if (!stages_ok || err > 1.0) {
      const double factor = stages_ok ? std::max(kMinFactor, kSafety * std::pow(err, -0.2)) : 0.25;
      h *= std::min(factor, 0.9);
      rejected_last = true;
      continue;
    }

    Trajectory::Segment seg;
    seg.t0 = t;
    seg.h = h;
    seg.start = y;
    seg.end = y1;
    const Vector ydiff = y1 - y;
    const Vector bspl = h * k1 - ydiff;
    seg.coeff[0] = y;
    seg.coeff[1] = ydiff;
    seg.coeff[2] = bspl;
    seg.coeff[3] = ydiff - h * k7 - bspl;
    seg.coeff[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    traj.segments_.push_back(std::move(seg));

    t = last ? T : t + h;
    traj.t_reached_ = t;
    y = y1;
    k1 = k7;
    blowup_seen = false;

    if (y.norm() > cfg.escape_norm) return fail(TrajectoryStatus::Escaped, "state norm exceeded escape threshold");

    double factor = err == 0.0 ? kMaxFactor : kSafety * std::pow(err, -0.2);
    factor = std::clamp(factor, kMinFactor, kMaxFactor);
    if (rejected_last) factor = std::min(factor, 1.0);
    rejected_last = false;
    h *= factor;
  }

  traj.status_ = TrajectoryStatus::Completed;
  return traj;
}

Vector output_at(const SystemSpec& spec, const Trajectory& traj, double t) {
  return spec.eval_h(traj.state_at(t));
}

double eta_at(const SystemSpec& spec, double t, const Trajectory& traj1, const Trajectory& traj2) {
  return (output_at(spec, traj1, t) - output_at(spec, traj2, t)).squaredNorm();
}

EtaIntegral integral_eta(const SystemSpec& spec, const Vector& x1, const Vector& x2, double T,
                         const IntegratorConfig& cfg) {
  const Trajectory traj1 = integrate(spec, x1, T, cfg);
  if (x1 == x2) return integral_eta(spec, traj1, traj1, T);
  const Trajectory traj2 = integrate(spec, x2, T, cfg);
  return integral_eta(spec, traj1, traj2, T);
}

EtaIntegral integral_eta(const SystemSpec& spec, const Trajectory& traj1, const Trajectory& traj2,
                         double T) {
  EtaIntegral out;
  const double horizon = std::min({T, traj1.reached(), traj2.reached()});
  out.horizon = horizon;
  out.truncated = horizon < T;
  if (!(horizon > 0.0)) return out;

  // Merged grid of both trajectories' step endpoints.
  std::vector<double> grid;
  for (const Trajectory* tr : {&traj1, &traj2}) {
    for (double s : tr->step_times())
      if (s < horizon) grid.push_back(s);
  }
  grid.push_back(horizon);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto eta = [&](double t) { return eta_at(spec, t, traj1, traj2); };

  // Split base intervals where eta leaves (or returns to) exactly zero.
  std::vector<double> breaks{grid.front()};
  double prev_value = eta(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double value = eta(grid[i]);
    if ((prev_value == 0.0) != (value == 0.0)) {
      double lo = grid[i - 1];
      double hi = grid[i];
      const bool lo_zero = prev_value == 0.0;
      for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if ((eta(mid) == 0.0) == lo_zero)
          lo = mid;
        else
          hi = mid;
      }
      if (lo > breaks.back()) breaks.push_back(lo);
      if (hi > breaks.back() && hi < grid[i]) breaks.push_back(hi);
    }
    breaks.push_back(grid[i]);
    prev_value = value;
  }

  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-10;
  const QuadratureResult q = integrate_adaptive(eta, breaks, opts);
  out.value = q.value;
  out.error_estimate = q.error;
  out.evaluations = q.evaluations;
  return out;
}

std::string trajectory_csv(const SystemSpec& spec, const Trajectory& traj, std::size_t samples) {
  std::ostringstream out;
  out << 't';
  for (std::size_t i = 1; i <= spec.n; ++i) out << ",x" << i;
  for (std::size_t j = 1; j <= spec.p; ++j) out << ",y" << j;
  out << '\n';
  const std::size_t count = std::max<std::size_t>(samples, 2);
  char buf[32];
  for (std::size_t k = 0; k < count; ++k) {
    const double t =
        k + 1 == count ? traj.reached() : traj.reached() * static_cast<double>(k) / (count - 1);
    const Vector x = traj.state_at(t);
    const Vector y = spec.eval_h(x);
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out << buf;
    for (double v : x) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    for (double v : y) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace obswin
