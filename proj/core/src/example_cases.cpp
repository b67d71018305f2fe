#include "obswin/example_cases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "obswin/error.hpp"

namespace obswin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::string_view kExample1 = R"(# x' = x^3 with the cubic output. The Jacobian column of every
# Lie-derivative row vanishes at the origin.
system example1
dim 1
outputs 1
f1 = x1^3
h1 = x1^3
omega [-1, 1]
)";

constexpr std::string_view kExample2Kink = R"(# Exponential growth observed only once the state passes M.
system example2-kink
dim 1
outputs 1
param M = 1
f1 = x1
h1 = if(x1 >= M, x1 - M, 0)
omega [0, 0.5]
)";

constexpr std::string_view kExample2Smooth = R"(# Same dynamics with a C-infinity output that is flat below M.
system example2-smooth
dim 1
outputs 1
param M = 1
f1 = x1
h1 = if(x1 >= M, exp(-1/(x1 - M)), 0)
omega [0, 0.5]
)";

constexpr std::string_view kLinearContraction = R"(system linear-contraction
dim 1
outputs 1
f1 = -x1
h1 = x1
omega [-1, 1]
)";

constexpr std::string_view kDoubleIntegrator = R"(system double-integrator
dim 2
outputs 1
f1 = x2
f2 = 0
h1 = x1
omega [-1, 1] x [-1, 1]
)";

Vector scalar(double v) { return Vector::Constant(1, v); }

ExampleCase example1() {
  ExampleCase c;
  c.name = "example1";
  c.summary = "x' = x^3, y = x^3 on [-1, 1]; rank fails at 0, trajectories escape in finite time";
  c.source = kExample1;
  c.settings = {3, 0.2, 1e-6, {1.0, 0.5, 0.1}, 0.2, {0.1, 0.5, 1.0}};
  auto state = [](const Vector& x0, double t) {
    const double x = x0[0];
    return scalar(x / std::sqrt(1.0 - 2.0 * x * x * t));
  };
  c.oracles.state = state;
  c.oracles.output = [state](const Vector& x0, double t) {
    const double x = state(x0, t)[0];
    return scalar(x * x * x);
  };
  c.oracles.escape_time = [](const Vector& x0) {
    return x0[0] == 0.0 ? kInf : 1.0 / (2.0 * x0[0] * x0[0]);
  };
  return c;
}

// x(t) = e^t x0 and y = max(0, x - M) for the kink output.
std::optional<double> example2_kink_time(double M, double a, double b, double eps) {
  if (a > b) std::swap(a, b);
  if (b <= 0.0) return std::nullopt;
  // |dy| is nondecreasing in t for 0 <= a < b, so the first crossing is unique.
  const double t_upper_only = std::max(0.0, std::log((M + eps) / b));
  if (a <= 0.0 || a * std::exp(t_upper_only) < M) return t_upper_only;
  return std::max({0.0, std::log(M / a), std::log(eps / (b - a))});
}

ExampleCase example2(bool smooth) {
  constexpr double M = 1.0;
  ExampleCase c;
  c.name = smooth ? "example2-smooth" : "example2-kink";
  c.summary = smooth ? "x' = x, y = exp(-1/(x - M)) above M, 0 below; window diverges as r -> 0"
                     : "x' = x, y = max(x - M, 0); window diverges as r -> 0";
  c.source = smooth ? kExample2Smooth : kExample2Kink;
  c.settings = {1, 5.0, 1e-3, {0.5, 0.1, 0.01}, 2.0, {0.1, 0.3}};
  c.oracles.state = [](const Vector& x0, double t) { return scalar(std::exp(t) * x0[0]); };
  c.oracles.escape_time = [](const Vector&) { return kInf; };
  if (smooth) {
    c.oracles.output = [](const Vector& x0, double t) {
      const double x = std::exp(t) * x0[0];
      return scalar(x > M ? std::exp(-1.0 / (x - M)) : 0.0);
    };
  } else {
    c.oracles.output = [](const Vector& x0, double t) {
      return scalar(std::max(0.0, std::exp(t) * x0[0] - M));
    };
    c.oracles.distinguishing_time = [](const Vector& x1, const Vector& x2, double eps) {
      return example2_kink_time(M, x1[0], x2[0], eps);
    };
  }
  return c;
}

ExampleCase linear_contraction() {
  ExampleCase c;
  c.name = "linear-contraction";
  c.summary = "x' = -x, y = x on [-1, 1]; alpha0(r) = r^2 (1 - e^{-2T}) / 2";
  c.source = kLinearContraction;
  c.settings = {1, 1.0, 1e-6, {1.0, 0.5, 0.1}, 1.0, {0.2, 0.5, 1.0}};
  c.oracles.state = [](const Vector& x0, double t) { return Vector(std::exp(-t) * x0); };
  c.oracles.output = c.oracles.state;
  c.oracles.escape_time = [](const Vector&) { return kInf; };
  c.oracles.distinguishing_time = [](const Vector& x1, const Vector& x2,
                                     double eps) -> std::optional<double> {
    // |dy| = |d| e^{-t} only shrinks.
    if (std::abs(x1[0] - x2[0]) >= eps) return 0.0;
    return std::nullopt;
  };
  c.oracles.alpha0 = [](double r, double T) { return r * r * (1.0 - std::exp(-2.0 * T)) / 2.0; };
  return c;
}

ExampleCase double_integrator() {
  ExampleCase c;
  c.name = "double-integrator";
  c.summary = "x1' = x2, x2' = 0, y = x1 on [-1, 1]^2; alpha0(r) = r^2 lambda_min(G(T))";
  c.source = kDoubleIntegrator;
  c.settings = {2, 2.0, 1e-6, {1.0, 0.5, 0.1}, 1.0, {0.2, 0.5, 1.0}};
  c.oracles.state = [](const Vector& x0, double t) {
    Vector x(2);
    x << x0[0] + t * x0[1], x0[1];
    return x;
  };
  c.oracles.output = [](const Vector& x0, double t) { return scalar(x0[0] + t * x0[1]); };
  c.oracles.escape_time = [](const Vector&) { return kInf; };
  c.oracles.distinguishing_time = [](const Vector& x1, const Vector& x2,
                                     double eps) -> std::optional<double> {
    // |dy(t)| = |d1 + d2 t| is piecewise linear with at most one kink.
    const double d1 = x1[0] - x2[0];
    const double d2 = x1[1] - x2[1];
    if (std::abs(d1) >= eps) return 0.0;
    if (d2 == 0.0) return std::nullopt;
    const double sign = d2 > 0.0 ? 1.0 : -1.0;
    return (eps - sign * d1) / std::abs(d2);
  };
  // integral of (d1 + d2 t)^2 = d' G d with the Gramian G below.
  c.oracles.alpha0 = [](double r, double T) {
    Eigen::Matrix2d G;
    G << T, T * T / 2.0, T * T / 2.0, T * T * T / 3.0;
    return r * r * Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(G).eigenvalues()[0];
  };
  return c;
}

}  // namespace

std::vector<std::string> example_names() {
  return {"example1", "example2-kink", "example2-smooth", "linear-contraction",
          "double-integrator"};
}

ExampleCase load_example(std::string_view name) {
  ExampleCase c;
  if (name == "example1")
    c = example1();
  else if (name == "example2-kink")
    c = example2(false);
  else if (name == "example2-smooth")
    c = example2(true);
  else if (name == "linear-contraction")
    c = linear_contraction();
  else if (name == "double-integrator")
    c = double_integrator();
  else
    throw PreconditionError("unknown example '" + std::string(name) +
                            "' (expected one of example1, example2-kink, example2-smooth, "
                            "linear-contraction, double-integrator)");
  c.spec = parse_system(c.source);
  return c;
}

}  // namespace obswin
