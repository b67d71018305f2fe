#include "obswin/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace obswin {
namespace {

void dump(const Json& j, std::string& out, int depth) {
  const auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        indent(depth + 1);
        out += Json(key).dump();
        out += ": ";
        dump(value, out, depth + 1);
      }
      out += '\n';
      indent(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ",\n";
        indent(depth + 1);
        dump(j[i], out, depth + 1);
      }
      out += '\n';
      indent(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

Json optional_double(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const std::string& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep floats recognizable as floats when they happen to be integral.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string canonical_dump(const Json& value) {
  std::string out;
  dump(value, out, 0);
  out += '\n';
  return out;
}

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json to_json(const SystemSpec& spec) {
  Json params = Json::object();
  for (const auto& [name, value] : spec.params) params[name] = value;
  Json f = Json::array();
  for (const Expr& e : spec.f) f.push_back(to_string(e));
  Json h = Json::array();
  for (const Expr& e : spec.h) h.push_back(to_string(e));
  Json omega = Json::array();
  for (const Interval& iv : spec.omega.intervals()) omega.push_back({iv.lo, iv.hi});
  return {{"name", spec.name}, {"n", spec.n}, {"p", spec.p}, {"f", f},
          {"h", h},            {"omega", omega}, {"params", params}};
}

Json to_json(const std::vector<SystemWarning>& warnings) {
  Json arr = Json::array();
  for (const SystemWarning& w : warnings) {
    arr.push_back({{"kind", w.kind == SystemWarning::Kind::ConditionalSeam ? "conditional-seam"
                                                                          : "finite-escape"},
                   {"message", w.message},
                   {"point", to_json(w.point)},
                   {"time", w.time}});
  }
  return arr;
}

Json to_json(const RankReport& report) {
  Json samples = Json::array();
  for (const RankSample& s : report.samples)
    samples.push_back({{"point", to_json(s.point)}, {"rank", s.rank}, {"sigma_min", s.sigma_min}});
  Json deficient = Json::array();
  for (const RankSample& s : report.deficient) deficient.push_back(to_json(s.point));
  Json excluded = Json::array();
  for (const ExcludedPoint& e : report.excluded)
    excluded.push_back({{"point", to_json(e.point)}, {"reason", e.reason}});
  return {{"schema_version", kSchemaVersion},
          {"kind", "rank"},
          {"system", report.system},
          {"N", report.order},
          {"n", report.n},
          {"tol", report.tol},
          {"seam_margin", report.seam_margin},
          {"sampling", report.sampling},
          {"sample_count", report.samples.size()},
          {"samples", samples},
          {"min_sigma", report.min_sigma},
          {"witness", to_json(report.witness)},
          {"verdict", to_string(report.verdict)},
          {"deficient_points", deficient},
          {"excluded_points", excluded}};
}

Json to_json(const DistinguishResult& result) {
  Json j = {{"verdict", to_string(result.verdict)}, {"horizon", result.horizon}};
  j["time"] = result.verdict == Distinction::Distinguished ? Json(result.time) : Json(nullptr);
  return j;
}

Json to_json(const WindowReport& report) {
  Json pairs = Json::array();
  for (const PairRecord& p : report.pairs)
    pairs.push_back({{"x1", to_json(p.x1)},
                     {"x2", to_json(p.x2)},
                     {"distance", p.distance},
                     {"result", to_json(p.result)}});
  Json curve = Json::array();
  for (const WindowCurvePoint& c : report.curve)
    curve.push_back({{"r", c.r},
                     {"t_hat", c.t_hat},
                     {"pairs", c.pairs},
                     {"undistinguished", c.undistinguished},
                     {"truncated", c.truncated},
                     {"lower_bound", c.lower_bound}});
  return {{"schema_version", kSchemaVersion},
          {"kind", "window"},
          {"system", report.system},
          {"r_min", report.r_min},
          {"eps_sep", report.eps_sep},
          {"t_max", report.t_max},
          {"strategy", report.strategy},
          {"seed", report.seed},
          {"pairs", pairs},
          {"t_hat", report.t_hat},
          {"t_hat_lower_bound", report.t_hat_lower_bound},
          {"undistinguished", report.undistinguished},
          {"truncated", report.truncated},
          {"curve", curve},
          {"verdict", report.d_observable_on_samples() ? "d-observable-on-samples"
                                                       : "undistinguished-pairs-found"}};
}

Json to_json(const Alpha0Table& table) {
  Json levels = Json::array();
  for (const Alpha0Level& l : table.levels) {
    Json j = {{"r", l.r},
              {"beta", optional_double(l.beta)},
              {"status", to_string(l.status)},
              {"evaluations", l.evaluations}};
    if (l.beta) {
      j["x1"] = to_json(l.x1);
      j["x2"] = to_json(l.x2);
    }
    if (!l.error.empty()) j["error"] = l.error;
    levels.push_back(std::move(j));
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "alpha0"},
          {"system", table.system},
          {"T", table.horizon},
          {"seed", table.seed},
          {"starts", table.starts},
          {"levels", levels}};
}

Json to_json(const KFunction& k) {
  Json anchors = Json::array();
  for (const auto& [r, v] : k.anchors()) anchors.push_back({{"r", r}, {"alpha", v}});
  return {{"anchors", anchors},
          {"certified_domain", {k.certified_lo(), k.certified_hi()}}};
}

Json to_json(const std::vector<CertificateCheck>& checks) {
  Json arr = Json::array();
  for (const CertificateCheck& c : checks)
    arr.push_back({{"r", c.r},
                   {"distance", c.distance},
                   {"integral", c.integral},
                   {"alpha", c.alpha},
                   {"holds", c.holds}});
  return arr;
}

std::string window_curve_csv(const WindowReport& report) {
  std::string out = "r,T_hat,n_pairs,n_undistinguished,n_truncated,lower_bound\n";
  for (const WindowCurvePoint& c : report.curve)
    out += csv_row({format_double(c.r), format_double(c.t_hat), std::to_string(c.pairs),
                    std::to_string(c.undistinguished), std::to_string(c.truncated),
                    c.lower_bound ? "1" : "0"});
  return out;
}

std::string k_anchors_csv(const KFunction& k) {
  std::string out = "r,alpha,certified\n";
  for (const auto& [r, v] : k.anchors())
    out += csv_row({format_double(r), format_double(v), k.certified(r) ? "1" : "0"});
  return out;
}

std::string alpha0_csv(const Alpha0Table& table) {
  std::string out = "r,beta,status,evaluations\n";
  for (const Alpha0Level& l : table.levels)
    out += csv_row({format_double(l.r), l.beta ? format_double(*l.beta) : "",
                    l.beta ? to_string(l.status) : "failed", std::to_string(l.evaluations)});
  return out;
}

}  // namespace obswin
