// Acceptance criteria AC1-AC10. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "obswin/error.hpp"
#include "obswin/example_cases.hpp"
#include "obswin/kfun.hpp"
#include "obswin/observability.hpp"
#include "obswin/odeint.hpp"
#include "obswin/sampling.hpp"
#include "obswin/window.hpp"

namespace {

using namespace obswin;

constexpr double kContractionFactor = 0.4323324;  // (1 - e^-2) / 2, as stated in the criteria

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << what << "; ";
    }
  }
};

Vector v1(double x) { return Vector::Constant(1, x); }

SystemSpec with_omega(SystemSpec s, std::vector<Interval> omega) {
  s.omega = Box(std::move(omega));
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ac1(Check& c) {
  const SystemSpec s = load_example("example1").spec;
  const ObservabilityMap m = observability_map(s, 4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double x = u(rng);
    const Vector rows = m.eval_rows(v1(x));
    const double expected[] = {std::pow(x, 3), 3 * std::pow(x, 5), 15 * std::pow(x, 7),
                               105 * std::pow(x, 9)};
    for (int i = 0; i < 4; ++i) {
      const double rel = std::abs(rows[i] - expected[i]) / std::max(std::abs(expected[i]), 1e-300);
      worst = std::max(worst, expected[i] == 0.0 ? std::abs(rows[i]) : rel);
    }
  }
  c.expect(worst <= 1e-12, "max relative error " + fmt(worst));
  c.detail << "rows (x^3, 3x^5, 15x^7, 105x^9), max rel err " << fmt(worst);
}

void ac2(Check& c) {
  const SystemSpec s = load_example("example1").spec;
  SamplingPlan grid;
  grid.points_per_axis = 101;
  for (std::size_t N : {1, 2, 3}) {
    const RankReport r = rank_report(s, N, grid);
    c.expect(r.verdict == RankVerdict::DeficientAtWitnesses, "N=" + std::to_string(N) + " not deficient");
    c.expect(r.witness.size() == 1 && r.witness[0] == 0.0, "N=" + std::to_string(N) + " witness != 0");
    c.expect(r.min_sigma < 1e-14, "N=" + std::to_string(N) + " sigma " + fmt(r.min_sigma));
    const RankReport away = rank_report(with_omega(s, {{0.5, 1.0}}), N, grid);
    c.expect(away.verdict == RankVerdict::FullRankOnSamples,
             "N=" + std::to_string(N) + " on [0.5,1] not full rank");
    c.expect(away.min_sigma > 0.1, "N=" + std::to_string(N) + " sigma on [0.5,1] " + fmt(away.min_sigma));
    c.detail << "N=" << N << ": min sigma " << fmt(r.min_sigma) << " at 0, " << fmt(away.min_sigma)
             << " on [0.5,1]; ";
  }
}

void ac3(Check& c) {
  const SystemSpec s = load_example("example2-kink").spec;
  const double eps = 1e-3;
  const std::array<double, 3> rs{0.5, 0.1, 0.01};
  std::vector<double> times;
  for (double r : rs) {
    const DistinguishResult d = distinguishing_time(s, v1(0.0), v1(r), 5.0, eps);
    const double oracle = std::log((1 + eps) / r);
    c.expect(d.verdict == Distinction::Distinguished, "pair (0," + fmt(r) + ") undistinguished");
    c.expect(std::abs(d.time - oracle) <= 1e-3, "r=" + fmt(r) + " t=" + fmt(d.time));
    times.push_back(d.time);
    c.detail << "t*(" << r << ")=" << fmt(d.time) << " ";
  }
  PairSamplingPlan plan;
  plan.r_min = 0.01;
  plan.count = 128;
  WindowOptions opts;
  opts.t_max = 5.0;
  opts.eps_sep = eps;
  const WindowReport w = estimate_window(s, plan, opts, {rs.begin(), rs.end()});
  for (std::size_t i = 1; i < w.curve.size(); ++i)
    c.expect(w.curve[i].t_hat > w.curve[i - 1].t_hat,
             "T_hat not strictly decreasing in r at r=" + fmt(w.curve[i].r));
  c.detail << "| T_hat(r):";
  for (const auto& p : w.curve) c.detail << " " << fmt(p.t_hat);
}

void ac4(Check& c) {
  const Trajectory decay = integrate(load_example("linear-contraction").spec, v1(1.0), 1.0);
  const double x1 = decay.completed() ? decay.state_at(1.0)[0] : NAN;
  c.expect(std::abs(x1 - std::exp(-1.0)) <= 1e-7, "x(1) = " + fmt(x1));
  const Trajectory blow = integrate(load_example("example1").spec, v1(1.0), 1.0);
  c.expect(blow.status() == TrajectoryStatus::Escaped, std::string("status ") + to_string(blow.status()));
  c.expect(std::abs(blow.status_time() - 0.5) <= 1e-3, "escape at " + fmt(blow.status_time()));
  c.detail << "x(1)-1/e = " << fmt(x1 - std::exp(-1.0)) << ", escape " << to_string(blow.status())
           << " at t=" << fmt(blow.status_time());
}

void ac5(Check& c) {
  const EtaIntegral r = integral_eta(load_example("linear-contraction").spec, v1(1.0), v1(0.0), 1.0);
  const double exact = (1 - std::exp(-2.0)) / 2;
  c.expect(std::abs(r.value - exact) <= 1e-6, "integral " + fmt(r.value));
  c.detail << "integral " << fmt(r.value) << ", error " << fmt(r.value - exact);
}

Alpha0Table contraction_table() {
  return estimate_alpha0(load_example("linear-contraction").spec, 1.0, {0.2, 0.5, 1.0});
}

void ac6(Check& c, const Alpha0Table& t) {
  double previous = -1.0;
  for (const Alpha0Level& l : t.levels) {
    if (!l.beta) {
      c.expect(false, "level r=" + fmt(l.r) + " failed: " + l.error);
      continue;
    }
    const double oracle = l.r * l.r * kContractionFactor;
    c.expect(std::abs(*l.beta - oracle) <= 0.05 * oracle, "r=" + fmt(l.r) + " beta " + fmt(*l.beta));
    c.expect(*l.beta >= previous, "beta decreases at r=" + fmt(l.r));
    previous = *l.beta;
    c.detail << "beta(" << l.r << ")=" << fmt(*l.beta) << " ";
  }
}

void ac7(Check& c, const Alpha0Table& t) {
  KFunction k;
  try {
    k = build_k_function(t);
  } catch (const Error& e) {
    c.expect(false, std::string("build_k_function: ") + e.what());
    return;
  }
  const auto& anchors = k.anchors();
  c.expect(eval_k(k, 0.0) == 0.0, "alpha(0) != 0");
  for (const Alpha0Level& l : t.levels)
    c.expect(eval_k(k, l.r) <= *l.beta, "alpha(" + fmt(l.r) + ") > beta");
  // Continuity: interpolation agrees with every anchor and with both
  // neighbouring segments just around it.
  for (std::size_t i = 1; i + 1 < anchors.size(); ++i) {
    const auto [r, v] = anchors[i];
    const double h = 1e-9 * (anchors[i + 1].first - anchors[i - 1].first);
    const double left = eval_k(k, r - h), right = eval_k(k, r + h);
    c.expect(eval_k(k, r) == v, "anchor value mismatch at r=" + fmt(r));
    c.expect(std::abs(left - v) < 1e-6 * (1 + v) && std::abs(right - v) < 1e-6 * (1 + v),
             "jump at r=" + fmt(r));
  }
  const double lo = k.certified_lo(), hi = k.certified_hi();
  double prev = -1.0, worst_gap = INFINITY;
  for (int j = 0; j < 1000; ++j) {
    const double r = lo + (hi - lo) * j / 999.0;
    const double a = eval_k(k, r);
    c.expect(a > prev, "not strictly increasing at r=" + fmt(r));
    prev = a;
    const double bound = r * r * kContractionFactor;
    c.expect(a <= bound, "alpha(" + fmt(r) + ") above r^2*0.4323324");
    worst_gap = std::min(worst_gap, bound - a);
  }
  c.detail << anchors.size() << " anchors on [" << fmt(lo) << ", " << fmt(hi)
           << "], min margin to closed form " << fmt(worst_gap);
}

void ac8(Check& c) {
  const SystemSpec s = load_example("example2-kink").spec;
  const Alpha0Table t = estimate_alpha0(s, 2.0, {0.1, 0.3});
  for (const Alpha0Level& l : t.levels) {
    c.expect(l.beta && *l.beta == 0.0, "beta(" + fmt(l.r) + ") expected 0");
    c.detail << "beta(" << l.r << ")=" << (l.beta ? fmt(*l.beta) : "failed") << " ";
  }
  try {
    build_k_function(t);
    c.expect(false, "build_k_function did not raise");
  } catch (const NotKObservableError& e) {
    bool replayed_zero = false;
    for (const Alpha0Level& w : e.witnesses()) {
      if (!w.beta) continue;
      const double v = integral_eta(s, w.x1, w.x2, t.horizon).value;
      if (v == 0.0 && (w.x1 - w.x2).norm() >= w.r * (1 - 1e-12)) replayed_zero = true;
      c.detail << "| witness r=" << w.r << " (" << fmt(w.x1[0]) << ", " << fmt(w.x2[0])
               << ") replays to " << fmt(v) << " ";
    }
    c.expect(replayed_zero, "no witness replays to integral 0");
  }
}

void ac9(Check& c) {
  const ObservabilityMap m = observability_map(load_example("double-integrator").spec, 2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vector x = (Vector(2) << u(rng), u(rng)).finished();
    const Matrix J = m.eval_jacobian(x);
    worst = std::max(worst, (J - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff());
    c.expect(jacobian_rank_at(m, x, 1e-8).rank == 2, "rank != 2");
  }
  c.expect(worst <= 1e-14, "max deviation " + fmt(worst));
  c.detail << "max |J - I| = " << fmt(worst) << ", rank 2 at all 20 points";
}

std::string capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  status = pclose(pipe);
  return out;
}

void ac10(Check& c) {
  const std::string base = std::string("\"") + OBSWIN_CLI + "\" kfun \"" + OBSWIN_DATA_DIR +
                           "/systems/linear-contraction.sys\" --T 1 --rgrid 0.2,0.5,1.0 --seed 0";
  int s1 = 0, s2 = 0, s3 = 0;
  const std::string a = capture(base + " --jobs 1", s1);
  const std::string b = capture(base + " --jobs 1", s2);
  const std::string p = capture(base + " --jobs 4", s3);
  c.expect(s1 == 0 && s2 == 0 && s3 == 0, "kfun exited nonzero");
  c.expect(!a.empty() && a == b, "two runs differ");
  c.expect(a == p, "--jobs 4 differs from --jobs 1");
  c.detail << a.size() << " bytes, identical across 2 serial runs and a 4-thread run";
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<void(Check&)> run;
  };
  Alpha0Table table;
  bool table_ready = false;
  auto contraction = [&]() -> const Alpha0Table& {
    if (!table_ready) table = contraction_table();
    table_ready = true;
    return table;
  };
  const Criterion criteria[] = {
      {"AC1", "example1 Lie derivatives N=4", ac1},
      {"AC2", "example1 rank verdicts", ac2},
      {"AC3", "example2 window divergence", ac3},
      {"AC4", "integrator oracles", ac4},
      {"AC5", "integral_eta oracle", ac5},
      {"AC6", "alpha0 oracle (linear contraction)", [&](Check& c) { ac6(c, contraction()); }},
      {"AC7", "K-function contract", [&](Check& c) { ac7(c, contraction()); }},
      {"AC8", "K-observability failure detection", ac8},
      {"AC9", "double-integrator Jacobian identity", ac9},
      {"AC10", "CLI kfun determinism", ac10},
  };

  int failed = 0;
  for (const Criterion& cr : criteria) {
    Check c;
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%-4s %-5s %s: %s\n", c.ok ? "PASS" : "FAIL", cr.id, cr.name, c.detail.str().c_str());
    std::fflush(stdout);
    failed += !c.ok;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
