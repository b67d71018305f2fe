#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace obswin {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over the union of the
/// intervals delimited by `breakpoints` (sorted, at least two entries). The
/// interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_adaptive(const std::function<double(double)>& fn,
                                    const std::vector<double>& breakpoints,
                                    const QuadratureOptions& options = {});

}  // namespace obswin
