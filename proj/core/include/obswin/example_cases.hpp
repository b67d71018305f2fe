#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "obswin/system.hpp"

namespace obswin {

/// Analysis settings that make a built-in case run in seconds.
struct CaseSettings {
  std::size_t order = 1;
  double t_max = 5.0;
  double eps_sep = 1e-6;
  std::vector<double> r_ladder;
  double horizon = 1.0;
  std::vector<double> r_grid;
};

/// Closed forms are empty where none is known.
struct CaseOracles {
  std::function<Vector(const Vector& x0, double t)> state;
  std::function<Vector(const Vector& x0, double t)> output;
  /// Blow-up time of the trajectory from x0 (infinity if it exists forever).
  std::function<double(const Vector& x0)> escape_time;
  /// First t >= 0 with |h(x1(t)) - h(x2(t))| >= eps, if any.
  std::function<std::optional<double>(const Vector& x1, const Vector& x2, double eps)>
      distinguishing_time;
  /// inf of the eta integral over [0, T] across pairs at distance >= r.
  std::function<double(double r, double T)> alpha0;
};

struct ExampleCase {
  std::string name;
  std::string summary;
  /// System description text, identical in content to data/systems/<name>.sys.
  std::string source;
  SystemSpec spec;
  CaseSettings settings;
  CaseOracles oracles;
};

/// Names accepted by load_example, in registry order.
std::vector<std::string> example_names();

/// Throws PreconditionError for an unknown name.
ExampleCase load_example(std::string_view name);

}  // namespace obswin
