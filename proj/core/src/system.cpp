#include "obswin/system.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "obswin/error.hpp"
#include "obswin/odeint.hpp"
#include "obswin/sampling.hpp"

namespace obswin {

Box::Box(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw SpecError(SpecError::Kind::InvalidBox, "box has no dimensions", 0);
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& iv = intervals_[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw SpecError(SpecError::Kind::InvalidBox,
                      "box bounds must be finite (axis " + std::to_string(i + 1) + ")", 0);
    if (iv.lo > iv.hi)
      throw SpecError(SpecError::Kind::InvalidBox,
                      "box lower bound exceeds upper bound (axis " + std::to_string(i + 1) + ")", 0);
  }
}

bool Box::contains(const Vector& x, double slack) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < intervals_[i].lo - slack || v > intervals_[i].hi + slack) return false;
  }
  return true;
}

Vector Box::clamp(const Vector& x) const {
  Vector out = x;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(out[k], intervals_[i].lo, intervals_[i].hi);
  }
  return out;
}

Vector Box::lower() const {
  Vector v(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) v[static_cast<Eigen::Index>(i)] = intervals_[i].lo;
  return v;
}

Vector Box::upper() const {
  Vector v(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) v[static_cast<Eigen::Index>(i)] = intervals_[i].hi;
  return v;
}

Vector Box::center() const { return 0.5 * (lower() + upper()); }

double Box::diameter() const { return (upper() - lower()).norm(); }

std::vector<Vector> Box::corners() const {
  const std::size_t n = dim();
  std::vector<Vector> out;
  const std::size_t count = std::size_t{1} << n;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Vector c(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const bool high = (mask >> (n - 1 - i)) & 1U;
      c[static_cast<Eigen::Index>(i)] = high ? intervals_[i].hi : intervals_[i].lo;
    }
    out.push_back(std::move(c));
  }
  return out;
}

Vector SystemSpec::eval_f(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(n));
  const auto xs = as_span(x);
  for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = eval_expr(f[i], xs, params);
  return out;
}

Vector SystemSpec::eval_h(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(p));
  const auto xs = as_span(x);
  for (std::size_t j = 0; j < p; ++j) out[static_cast<Eigen::Index>(j)] = eval_expr(h[j], xs, params);
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_count(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return static_cast<std::size_t>(std::stoull(t));
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_reserved(const std::string& s) {
  static const char* const kReserved[] = {"exp", "log", "sin", "cos", "tanh", "sqrt", "if"};
  for (const char* r : kReserved)
    if (s == r) return true;
  if (s.size() >= 2 && s[0] == 'x' &&
      std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return true;
  return false;
}

std::vector<Interval> parse_omega(const std::string& text, int line) {
  std::vector<Interval> intervals;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& msg) -> std::vector<Interval> {
    throw SpecError(SpecError::Kind::Format, "omega: " + msg, line);
  };
  for (;;) {
    skip();
    if (pos >= text.size() || text[pos] != '[') return fail("expected '['");
    const std::size_t close = text.find(']', pos);
    if (close == std::string::npos) return fail("missing ']'");
    const std::string inner = text.substr(pos + 1, close - pos - 1);
    const std::size_t comma = inner.find(',');
    if (comma == std::string::npos) return fail("expected 'lo, hi' inside brackets");
    const auto lo = parse_real(inner.substr(0, comma));
    const auto hi = parse_real(inner.substr(comma + 1));
    if (!lo || !hi) return fail("bounds must be finite real numbers");
    if (*lo > *hi)
      throw SpecError(SpecError::Kind::InvalidBox,
                      "omega interval [" + trim(inner.substr(0, comma)) + ", " +
                          trim(inner.substr(comma + 1)) + "] has lo > hi",
                      line);
    intervals.push_back({*lo, *hi});
    pos = close + 1;
    skip();
    if (pos >= text.size()) return intervals;
    if (text[pos] != 'x') return fail("expected 'x' between intervals");
    ++pos;
  }
}

struct PendingExpr {
  std::string text;
  int line = 0;
  int column_offset = 0;
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SystemSpec parse_system(std::string_view text) {
  SystemSpec spec;
  spec.name = "system";
  std::optional<std::size_t> dim;
  std::optional<std::size_t> outputs;
  std::optional<std::vector<Interval>> omega;
  int omega_line = 0;
  std::map<std::size_t, PendingExpr> f_lines;
  std::map<std::size_t, PendingExpr> h_lines;
  ParamSet declared;
  bool have_name = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    const std::string body = raw.substr(0, hash);
    const std::string line = trim(body);
    if (line.empty()) continue;

    auto format_error = [&](const std::string& msg) {
      return SpecError(SpecError::Kind::Format, msg, line_no);
    };

    const std::size_t eq = line.find('=');
    std::string keyword = line.substr(0, line.find_first_of(" \t=["));

    if (keyword == "system") {
      if (have_name) throw format_error("duplicate 'system' line");
      std::string name = trim(line.substr(6));
      if (name.empty()) throw format_error("'system' needs a name");
      spec.name = name;
      have_name = true;
    } else if (keyword == "dim" || keyword == "outputs") {
      auto value = parse_count(line.substr(keyword.size()));
      if (!value || *value == 0) throw format_error("'" + keyword + "' needs a positive integer");
      auto& slot = keyword == "dim" ? dim : outputs;
      if (slot) throw format_error("duplicate '" + keyword + "' line");
      slot = *value;
    } else if (keyword == "param") {
      if (eq == std::string::npos) throw format_error("expected 'param <name> = <real>'");
      const std::string name = trim(line.substr(5, eq - 5));
      if (!is_identifier(name)) throw format_error("invalid parameter name '" + name + "'");
      if (is_reserved(name)) throw format_error("parameter name '" + name + "' is reserved");
      if (declared.contains(name)) throw format_error("duplicate parameter '" + name + "'");
      const auto value = parse_real(line.substr(eq + 1));
      if (!value) throw format_error("parameter '" + name + "' needs a finite real value");
      declared.insert(name);
      spec.params[name] = *value;
    } else if (keyword == "omega") {
      if (omega) throw format_error("duplicate 'omega' line");
      omega = parse_omega(line.substr(5), line_no);
      omega_line = line_no;
    } else if ((keyword.size() >= 2 && (keyword[0] == 'f' || keyword[0] == 'h')) &&
               eq != std::string::npos) {
      const auto index = parse_count(keyword.substr(1));
      if (!index || *index == 0) throw format_error("unknown directive '" + keyword + "'");
      auto& table = keyword[0] == 'f' ? f_lines : h_lines;
      if (table.contains(*index)) throw format_error("duplicate definition of " + keyword);
      const std::size_t expr_start = body.find('=') + 1;
      table[*index] = PendingExpr{body.substr(expr_start), line_no, static_cast<int>(expr_start)};
    } else {
      throw format_error("unknown directive '" + keyword + "'");
    }
  }

  if (!dim) throw SpecError(SpecError::Kind::Format, "missing 'dim' line", 0);
  if (!outputs) throw SpecError(SpecError::Kind::Format, "missing 'outputs' line", 0);
  if (!omega) throw SpecError(SpecError::Kind::Format, "missing 'omega' line", 0);
  spec.n = *dim;
  spec.p = *outputs;

  if (omega->size() != spec.n)
    throw SpecError(SpecError::Kind::DimensionMismatch,
                    "omega has " + std::to_string(omega->size()) + " intervals but dim is " +
                        std::to_string(spec.n),
                    omega_line);
  try {
    spec.omega = Box(*omega);
  } catch (const SpecError& e) {
    throw SpecError(SpecError::Kind::InvalidBox, e.what(), omega_line);
  }

  auto build = [&](const std::map<std::size_t, PendingExpr>& table, std::size_t count,
                   char prefix) {
    std::vector<Expr> exprs;
    for (const auto& [index, pending] : table) {
      if (index > count)
        throw SpecError(SpecError::Kind::DimensionMismatch,
                        std::string(1, prefix) + std::to_string(index) + " exceeds dimension " +
                            std::to_string(count),
                        pending.line);
    }
    if (table.size() != count)
      throw SpecError(SpecError::Kind::DimensionMismatch,
                      "expected " + std::to_string(count) + " '" + std::string(1, prefix) +
                          "' lines, found " + std::to_string(table.size()),
                      0);
    for (const auto& [index, pending] : table) {
      try {
        exprs.push_back(parse_expr(pending.text, spec.n, declared));
      } catch (const ParseError& e) {
        const std::string where = std::string(1, prefix) + std::to_string(index) + ", column " +
                                  std::to_string(e.column() + pending.column_offset) + ": ";
        if (e.kind() == ParseError::Kind::UnknownIdentifier)
          throw SpecError(SpecError::Kind::UndeclaredParameter, where + e.detail(), pending.line);
        throw SpecError(SpecError::Kind::Format, where + e.detail(), pending.line);
      }
    }
    return exprs;
  };
  spec.f = build(f_lines, spec.n, 'f');
  spec.h = build(h_lines, spec.p, 'h');
  return spec;
}

SystemSpec load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(SpecError::Kind::Format, "cannot read system file '" + path + "'", 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_system(buffer.str());
}

std::string to_string(const SystemSpec& spec) {
  std::ostringstream out;
  out << "system " << spec.name << '\n';
  out << "dim " << spec.n << '\n';
  out << "outputs " << spec.p << '\n';
  for (const auto& [name, value] : spec.params) out << "param " << name << " = " << format_real(value) << '\n';
  for (std::size_t i = 0; i < spec.n; ++i) out << 'f' << i + 1 << " = " << to_string(spec.f[i]) << '\n';
  for (std::size_t j = 0; j < spec.p; ++j) out << 'h' << j + 1 << " = " << to_string(spec.h[j]) << '\n';
  out << "omega ";
  for (std::size_t i = 0; i < spec.omega.dim(); ++i) {
    if (i > 0) out << " x ";
    out << '[' << format_real(spec.omega[i].lo) << ", " << format_real(spec.omega[i].hi) << ']';
  }
  out << '\n';
  return out.str();
}

std::vector<SystemWarning> validate_system(const SystemSpec& spec, const ValidationOptions& options) {
  std::vector<SystemWarning> warnings;

  SamplingPlan plan = SamplingPlan::default_for(spec.n);
  plan.points_per_axis = options.points_per_axis;
  std::vector<Vector> samples = sample_box(spec.omega, plan);
  if (spec.n <= 10) {
    for (Vector& c : spec.omega.corners()) samples.push_back(std::move(c));
  }

  // Conditional seams: a predicate gap that changes sign (or vanishes) on
  // the samples means the seam crosses omega.
  std::vector<Expr> seams;
  for (const auto* exprs : {&spec.f, &spec.h}) {
    for (const Expr& e : *exprs) {
      for (Expr& s : seam_functions(e)) {
        const bool seen = std::any_of(seams.begin(), seams.end(),
                                      [&](const Expr& o) { return structurally_equal(o, s); });
        if (!seen) seams.push_back(std::move(s));
      }
    }
  }
  for (const Expr& seam : seams) {
    std::optional<double> first_sign;
    for (const Vector& x : samples) {
      double g = 0.0;
      try {
        g = eval_expr(seam, as_span(x), spec.params);
      } catch (const DomainError&) {
        continue;
      }
      const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      if (sign == 0.0 || (first_sign && *first_sign != sign)) {
        warnings.push_back({SystemWarning::Kind::ConditionalSeam,
                            "conditional seam " + to_string(seam) +
                                " = 0 intersects omega; rank analysis there assumes smoothness "
                                "that does not hold",
                            x, 0.0});
        break;
      }
      if (!first_sign) first_sign = sign;
    }
  }

  // Finite escape: trial integrations from the samples.
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-10;
  std::size_t escaping = 0;
  double earliest_time = std::numeric_limits<double>::infinity();
  Vector earliest_point;
  for (const Vector& x : samples) {
    const Trajectory traj = integrate(spec, x, options.trial_horizon, cfg);
    if (traj.status() != TrajectoryStatus::Escaped) continue;
    ++escaping;
    if (traj.reached() < earliest_time) {
      earliest_time = traj.reached();
      earliest_point = x;
    }
  }
  if (escaping > 0) {
    std::string point = "(";
    for (Eigen::Index i = 0; i < earliest_point.size(); ++i) {
      if (i > 0) point += ", ";
      point += format_real(earliest_point[i]);
    }
    point += ")";
    char buf[160];
    std::snprintf(buf, sizeof buf, " escapes near t = %.6g (%zu of %zu trial starts escape within t = %g)",
                  earliest_time, escaping, samples.size(), options.trial_horizon);
    warnings.push_back({SystemWarning::Kind::FiniteEscape,
                        "finite escape: trial integration from x0 = " + point + buf, earliest_point,
                        earliest_time});
  }
  return warnings;
}

}  // namespace obswin
