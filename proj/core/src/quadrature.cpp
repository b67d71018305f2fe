#include "obswin/quadrature.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "obswin/error.hpp"

namespace obswin {
namespace {

// Kronrod abscissae (positive half, descending) and weights; every odd entry
// is also a 7-point Gauss node.
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGauss[4] = {0.129484966168869693270611432679082,
                              0.279705391489276667901467771423780,
                              0.381830050505118944950369775488975,
                              0.417959183673469387755102040816327};

struct Piece {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;

  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = fn(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double sum = fn(center - dx) + fn(center + dx);
    kronrod += kKronrod[i] * sum;
    if (i % 2 == 1) gauss += kGauss[i / 2] * sum;
  }
  Piece piece{a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
  return piece;
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& fn,
                                    const std::vector<double>& breakpoints,
                                    const QuadratureOptions& options) {
  if (breakpoints.size() < 2) throw PreconditionError("quadrature needs at least one interval");
  std::priority_queue<Piece> queue;
  QuadratureResult result;
  double total = 0.0;
  double total_error = 0.0;

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    Piece piece = gauss_kronrod(fn, a, b);
    result.evaluations += 15;
    total += piece.value;
    total_error += piece.error;
    queue.push(piece);
  }

  while (!queue.empty() &&
         total_error > std::max(options.abs_tol, options.rel_tol * std::abs(total))) {
    if (queue.size() >= options.max_intervals) {
      result.converged = false;
      break;
    }
    Piece worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Cannot split further in double precision.
      result.converged = false;
      break;
    }
    queue.pop();
    Piece left = gauss_kronrod(fn, worst.a, mid);
    Piece right = gauss_kronrod(fn, mid, worst.b);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }

  // Re-sum from the pieces to shed accumulated cancellation in `total`.
  double value = 0.0;
  double error = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  result.value = value;
  result.error = error;
  return result;
}

}  // namespace obswin
