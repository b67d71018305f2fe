#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "obswin/example_cases.hpp"
#include "obswin/kfun.hpp"
#include "obswin/observability.hpp"
#include "obswin/sampling.hpp"
#include "obswin/system.hpp"
#include "obswin/window.hpp"

namespace obswin::cli {
namespace {

struct RunConfig {
  std::string command;
  std::string input;
  std::string out_dir;
  std::string format = "json";
  bool force = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;

  // rank
  std::size_t order = 0;  // 0: use n
  double tol = 1e-8;
  double seam_margin = 1e-9;
  std::size_t points = 0;  // 0: default plan

  // distinguish / window
  double t_max = 10.0;
  double eps_sep = 1e-6;
  std::vector<double> rgrid;
  std::optional<double> r_min;
  std::size_t pairs = 256;
  std::string strategy = "boundary";
  std::vector<double> x1;
  std::vector<double> x2;

  // alpha0 / kfun
  double horizon = 1.0;
  std::size_t starts = 32;
  std::size_t budget = 200;
};

struct Loaded {
  SystemSpec spec;
  std::string source;
};

struct Outcome {
  Json report;
  std::string csv;
  std::vector<Artifact> artifacts;
};

Loaded load_input(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot read system file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  Loaded l;
  l.source = buf.str();
  try {
    l.spec = parse_system(l.source);
  } catch (const SpecError& e) {
    throw UsageError(path + ": " + e.what());
  }
  return l;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::size_t order_for(const RunConfig& cfg, const SystemSpec& spec) {
  return cfg.order == 0 ? spec.n : cfg.order;
}

SamplingPlan rank_plan(const RunConfig& cfg, const SystemSpec& spec) {
  SamplingPlan plan = SamplingPlan::default_for(spec.n, cfg.seed);
  if (cfg.points > 0) {
    if (plan.kind == SamplingPlan::Kind::Grid)
      plan.points_per_axis = cfg.points;
    else
      plan.count = cfg.points;
  }
  return plan;
}

PairSamplingPlan::Strategy parse_strategy(const std::string& s) {
  if (s == "grid") return PairSamplingPlan::Strategy::Grid;
  if (s == "low-discrepancy") return PairSamplingPlan::Strategy::LowDiscrepancy;
  if (s == "boundary") return PairSamplingPlan::Strategy::BoundaryBiased;
  throw UsageError("unknown pair strategy '" + s + "' (grid, low-discrepancy, boundary)");
}

RankReport run_rank(const RunConfig& cfg, const SystemSpec& spec, std::size_t order) {
  RankOptions opts;
  opts.tol = cfg.tol;
  opts.seam_margin = cfg.seam_margin;
  opts.jobs = cfg.jobs;
  return rank_report(spec, order, rank_plan(cfg, spec), opts);
}

WindowReport run_window(const RunConfig& cfg, const SystemSpec& spec, double r_min) {
  PairSamplingPlan plan;
  plan.strategy = parse_strategy(cfg.strategy);
  plan.count = cfg.pairs;
  plan.r_min = r_min;
  plan.seed = cfg.seed;
  WindowOptions opts;
  opts.t_max = cfg.t_max;
  opts.eps_sep = cfg.eps_sep;
  opts.jobs = cfg.jobs;
  return estimate_window(spec, plan, opts, cfg.rgrid);
}

double window_r_min(const RunConfig& cfg) {
  if (cfg.r_min) return *cfg.r_min;
  if (!cfg.rgrid.empty()) return *std::min_element(cfg.rgrid.begin(), cfg.rgrid.end());
  return 0.01;
}

Alpha0Table run_alpha0(const RunConfig& cfg, const SystemSpec& spec) {
  if (cfg.rgrid.empty()) throw UsageError("--rgrid is required");
  MinimizeOptions opts;
  opts.starts = cfg.starts;
  opts.evaluations_per_start = cfg.budget;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  return estimate_alpha0(spec, cfg.horizon, cfg.rgrid, opts);
}

std::string rank_csv(const RankReport& report) {
  std::string out;
  for (std::size_t i = 1; i <= report.n; ++i) out += "x" + std::to_string(i) + ",";
  out += "rank,sigma_min\n";
  for (const RankSample& s : report.samples) {
    for (Eigen::Index i = 0; i < s.point.size(); ++i) out += format_double(s.point[i]) + ",";
    out += std::to_string(s.rank) + "," + format_double(s.sigma_min) + "\n";
  }
  return out;
}

Json with_input(Json report, const std::string& source) {
  report["input_sha256"] = sha256_hex(source);
  return report;
}

Outcome cmd_rank(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  const RankReport report = run_rank(cfg, in.spec, order_for(cfg, in.spec));
  Outcome o;
  o.report = with_input(to_json(report), in.source);
  o.csv = rank_csv(report);
  o.artifacts = {{"rank.json", canonical_dump(o.report)}, {"rank_samples.csv", o.csv}};
  return o;
}

Outcome cmd_distinguish(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  if (cfg.x1.size() != in.spec.n || cfg.x2.size() != in.spec.n)
    throw UsageError("--x1 and --x2 need " + std::to_string(in.spec.n) + " comma-separated values");
  const Vector x1 = to_vector(cfg.x1);
  const Vector x2 = to_vector(cfg.x2);
  const DistinguishResult r = distinguishing_time(in.spec, x1, x2, cfg.t_max, cfg.eps_sep);
  Outcome o;
  o.report = with_input({{"schema_version", kSchemaVersion},
                         {"kind", "distinguish"},
                         {"system", in.spec.name},
                         {"x1", to_json(x1)},
                         {"x2", to_json(x2)},
                         {"t_max", cfg.t_max},
                         {"eps_sep", cfg.eps_sep},
                         {"result", to_json(r)}},
                        in.source);
  o.csv = "verdict,time,horizon\n" + std::string(to_string(r.verdict)) + "," +
          (r.verdict == Distinction::Distinguished ? format_double(r.time) : "") + "," +
          format_double(r.horizon) + "\n";
  o.artifacts = {{"distinguish.json", canonical_dump(o.report)}};
  return o;
}

Outcome cmd_window(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  const WindowReport report = run_window(cfg, in.spec, window_r_min(cfg));
  Outcome o;
  o.report = with_input(to_json(report), in.source);
  o.csv = window_curve_csv(report);
  o.artifacts = {{"window.json", canonical_dump(o.report)}, {"window_curve.csv", o.csv}};
  return o;
}

Outcome cmd_alpha0(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  const Alpha0Table table = run_alpha0(cfg, in.spec);
  Outcome o;
  o.report = with_input(to_json(table), in.source);
  o.csv = alpha0_csv(table);
  o.artifacts = {{"alpha0.json", canonical_dump(o.report)}, {"alpha0.csv", o.csv}};
  return o;
}

/// A previously bundled report for the same input and settings, if present.
std::optional<Json> cached_report(const RunConfig& cfg, const std::string& file,
                                  const std::string& sha, const Json& expect) {
  if (cfg.out_dir.empty()) return std::nullopt;
  std::ifstream in(std::filesystem::path(cfg.out_dir) / file);
  if (!in) return std::nullopt;
  try {
    Json j = Json::parse(in);
    if (j.value("input_sha256", "") != sha) return std::nullopt;
    for (const auto& [key, value] : expect.items())
      if (!j.contains(key) || j[key] != value) return std::nullopt;
    return j;
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

struct KfunParts {
  Json report;
  std::vector<Artifact> artifacts;
  std::string csv;
  bool analysis_failed = false;
  std::string failure;
};

/// The rank -> window -> alpha0 -> K-function pipeline. `gate` refuses to
/// construct alpha when a hypothesis verdict is negative.
KfunParts kfun_pipeline(const RunConfig& cfg, const SystemSpec& spec, const std::string& source,
                        bool gate) {
  KfunParts parts;
  const std::string sha = sha256_hex(source);
  const std::size_t order = order_for(cfg, spec);
  const double r_min = window_r_min(cfg);

  Json rank_json;
  std::string rank_source = "fresh";
  if (auto c = cached_report(cfg, "rank.json", sha, {{"N", order}, {"tol", cfg.tol}})) {
    rank_json = *c;
    rank_source = "cached";
  } else {
    rank_json = with_input(to_json(run_rank(cfg, spec, order)), source);
  }
  Json window_json;
  std::string window_source = "fresh";
  if (auto c = cached_report(cfg, "window.json", sha,
                             {{"t_max", cfg.t_max}, {"eps_sep", cfg.eps_sep}, {"r_min", r_min}})) {
    window_json = *c;
    window_source = "cached";
  } else {
    const WindowReport w = run_window(cfg, spec, r_min);
    window_json = with_input(to_json(w), source);
    parts.artifacts.push_back({"window_curve.csv", window_curve_csv(w)});
  }
  parts.artifacts.insert(parts.artifacts.begin(), {"window.json", canonical_dump(window_json)});
  parts.artifacts.insert(parts.artifacts.begin(), {"rank.json", canonical_dump(rank_json)});

  const bool rank_ok = rank_json.at("verdict") == "full-rank-on-samples";
  const bool window_ok = window_json.at("verdict") == "d-observable-on-samples";
  Json hypotheses = {
      {"rank", {{"verdict", rank_json.at("verdict")}, {"N", order}, {"source", rank_source}}},
      {"window",
       {{"verdict", window_json.at("verdict")},
        {"t_hat", window_json.at("t_hat")},
        {"t_max", cfg.t_max},
        {"source", window_source}}},
      {"forced", cfg.force},
      {"satisfied", rank_ok && window_ok}};

  Json report = {{"schema_version", kSchemaVersion},
                 {"kind", "kfun"},
                 {"system", spec.name},
                 {"input_sha256", sha},
                 {"T", cfg.horizon},
                 {"hypotheses", hypotheses}};

  if (gate && !(rank_ok && window_ok) && !cfg.force) {
    parts.analysis_failed = true;
    parts.failure = "kfun needs positive rank and window verdicts (rank: " +
                    rank_json.at("verdict").get<std::string>() +
                    ", window: " + window_json.at("verdict").get<std::string>() +
                    "); pass --force to construct alpha anyway";
    report["verdict"] = "refused";
    report["alpha0"] = nullptr;
    report["k_function"] = nullptr;
    parts.report = std::move(report);
    return parts;
  }

  const Alpha0Table table = run_alpha0(cfg, spec);
  report["alpha0"] = to_json(table);
  parts.artifacts.push_back({"alpha0.csv", alpha0_csv(table)});

  const bool levels_failed = std::any_of(table.levels.begin(), table.levels.end(),
                                         [](const Alpha0Level& l) { return !l.beta; });
  if (levels_failed) {
    parts.analysis_failed = true;
    parts.failure = "alpha0 estimation failed on at least one grid level";
    report["verdict"] = "analysis-failed";
    report["k_function"] = nullptr;
  } else {
    try {
      const KFunction k = build_k_function(table);
      const auto checks = replay_certificate(spec, table, k);
      bool minorant = true;
      for (const Alpha0Level& l : table.levels) minorant = minorant && eval_k(k, l.r) <= *l.beta;
      for (const CertificateCheck& c : checks) minorant = minorant && c.holds;
      report["verdict"] = "k-function-constructed";
      report["k_function"] = to_json(k);
      report["certificate"] = to_json(checks);
      report["minorant_verified"] = minorant;
      parts.csv = k_anchors_csv(k);
      parts.artifacts.push_back({"kfun_anchors.csv", parts.csv});
    } catch (const NotKObservableError& e) {
      Json witnesses = Json::array();
      for (const Alpha0Level& l : e.witnesses()) {
        Json w = {{"r", l.r}, {"beta", l.beta ? Json(*l.beta) : Json(nullptr)}};
        if (l.beta) {
          w["x1"] = to_json(l.x1);
          w["x2"] = to_json(l.x2);
          w["integral_eta"] = integral_eta(spec, l.x1, l.x2, table.horizon).value;
        }
        witnesses.push_back(std::move(w));
      }
      report["verdict"] = "not-k-observable-on-evidence";
      report["k_function"] = nullptr;
      report["witnesses"] = witnesses;
    }
  }
  if (parts.csv.empty()) parts.csv = alpha0_csv(table);
  parts.report = std::move(report);
  parts.artifacts.push_back({"kfun.json", canonical_dump(parts.report)});
  return parts;
}

Outcome cmd_kfun(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  if (cfg.rgrid.empty()) throw UsageError("--rgrid is required");
  KfunParts parts = kfun_pipeline(cfg, in.spec, in.source, true);
  if (parts.analysis_failed) throw AnalysisError(parts.failure);
  return {std::move(parts.report), std::move(parts.csv), std::move(parts.artifacts)};
}

Outcome cmd_validate(const RunConfig& cfg) {
  const Loaded in = load_input(cfg.input);
  const auto warnings = validate_system(in.spec);
  Outcome o;
  o.report = with_input({{"schema_version", kSchemaVersion},
                         {"kind", "validate"},
                         {"system", to_json(in.spec)},
                         {"warnings", to_json(warnings)}},
                        in.source);
  o.csv = "kind,time,message\n";
  for (const SystemWarning& w : warnings)
    o.csv += std::string(w.kind == SystemWarning::Kind::ConditionalSeam ? "conditional-seam"
                                                                        : "finite-escape") +
             "," + format_double(w.time) + ",\"" + w.message + "\"\n";
  o.artifacts = {{"validate.json", canonical_dump(o.report)}};
  return o;
}

Outcome cmd_reproduce(RunConfig cfg, const std::vector<std::string>& explicit_flags) {
  ExampleCase ex;
  try {
    ex = load_example(cfg.input);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  // Case settings fill in whatever the user did not pass explicitly.
  auto given = [&](const std::string& flag) {
    return std::find(explicit_flags.begin(), explicit_flags.end(), flag) != explicit_flags.end();
  };
  const CaseSettings& s = ex.settings;
  if (!given("--N")) cfg.order = s.order;
  if (!given("--Tmax")) cfg.t_max = s.t_max;
  if (!given("--eps")) cfg.eps_sep = s.eps_sep;
  if (!given("--T")) cfg.horizon = s.horizon;
  if (!given("--rgrid")) cfg.rgrid = s.r_grid;

  const SystemSpec& spec = ex.spec;
  const auto warnings = validate_system(spec);

  RunConfig window_cfg = cfg;
  if (!given("--rgrid")) window_cfg.rgrid = s.r_ladder;
  const WindowReport window = run_window(window_cfg, spec, window_r_min(window_cfg));
  const RankReport rank = run_rank(cfg, spec, order_for(cfg, spec));

  // The pipeline sees the freshly computed hypothesis reports through the
  // same structures as `kfun`; alpha0 always runs, alpha only if allowed.
  RunConfig kcfg = cfg;
  kcfg.out_dir.clear();
  KfunParts parts = kfun_pipeline(kcfg, spec, ex.source, false);
  const bool hypotheses = parts.report["hypotheses"]["satisfied"].get<bool>();

  Json summary = {{"schema_version", kSchemaVersion},
                  {"kind", "reproduce"},
                  {"example", ex.name},
                  {"summary", ex.summary},
                  {"input_sha256", sha256_hex(ex.source)},
                  {"system", to_json(spec)},
                  {"warnings", to_json(warnings)},
                  {"rank", to_json(rank)},
                  {"window", to_json(window)},
                  {"kfun", parts.report}};
  if (!hypotheses)
    summary["note"] = "rank or window hypothesis failed on samples; the K-function is reported for "
                      "evidence only";

  Outcome o;
  o.report = summary;
  o.csv = window_curve_csv(window);
  o.artifacts = {{"reproduce.json", canonical_dump(summary)},
                 {"rank.json", canonical_dump(with_input(to_json(rank), ex.source))},
                 {"window.json", canonical_dump(with_input(to_json(window), ex.source))},
                 {"window_curve.csv", o.csv},
                 {"kfun.json", canonical_dump(parts.report)}};
  for (const Artifact& a : parts.artifacts)
    if (a.name == "kfun_anchors.csv" || a.name == "alpha0.csv") o.artifacts.push_back(a);
  if (parts.analysis_failed) throw AnalysisError(parts.failure);
  return o;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "Seed for every sampler and multi-start (default 0)");
  sub->add_option("--jobs", cfg.jobs, "Worker threads, 0 = all cores")->envname("OBSWIN_JOBS");
  sub->add_option("--out", cfg.out_dir, "Write a report bundle into this directory");
  sub->add_option("--format", cfg.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
}

void add_rank_opts(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--N", cfg.order, "Lie-derivative order (default n)");
  sub->add_option("--tol", cfg.tol, "Relative singular-value threshold");
  sub->add_option("--seam-margin", cfg.seam_margin, "Distance treated as on a conditional seam");
  sub->add_option("--points", cfg.points, "Grid points per axis (n <= 3) or Halton count");
}

void add_separation_opts(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--Tmax", cfg.t_max, "Longest observation time tried");
  sub->add_option("--eps", cfg.eps_sep, "Output separation threshold");
}

void add_window_opts(CLI::App* sub, RunConfig& cfg) {
  add_separation_opts(sub, cfg);
  sub->add_option("--rmin", cfg.r_min, "Smallest pair separation (default min of --rgrid, or 0.01)");
  sub->add_option("--pairs", cfg.pairs, "Pair count for sampled strategies");
  sub->add_option("--strategy", cfg.strategy, "grid, low-discrepancy or boundary");
}

void add_alpha0_opts(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--T", cfg.horizon, "Integration window of the eta integral");
  sub->add_option("--starts", cfg.starts, "Multi-start count per grid level");
  sub->add_option("--budget", cfg.budget, "Objective evaluations per start");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Nonlinear observability analysis: rank condition, observation window, K-function"};
  app.name("obswin");
  app.require_subcommand(1);

  auto* rank = app.add_subcommand("rank", "Lie-derivative Jacobian rank over sampled omega");
  rank->add_option("spec", cfg.input, "System file")->required();
  add_rank_opts(rank, cfg);
  add_common(rank, cfg);

  auto* dist = app.add_subcommand("distinguish", "Distinguishing time of one pair");
  dist->add_option("spec", cfg.input, "System file")->required();
  dist->add_option("--x1", cfg.x1, "First initial state, comma separated")->delimiter(',')->required();
  dist->add_option("--x2", cfg.x2, "Second initial state, comma separated")->delimiter(',')->required();
  add_separation_opts(dist, cfg);
  add_common(dist, cfg);

  auto* window = app.add_subcommand("window", "Empirical observation-window width and T_hat(r)");
  window->add_option("spec", cfg.input, "System file")->required();
  window->add_option("--rgrid", cfg.rgrid, "Separation ladder, comma separated")->delimiter(',');
  add_window_opts(window, cfg);
  add_common(window, cfg);

  auto* alpha0 = app.add_subcommand("alpha0", "Minimal eta integral over pairs at distance >= r");
  alpha0->add_option("spec", cfg.input, "System file")->required();
  alpha0->add_option("--rgrid", cfg.rgrid, "Increasing separations, comma separated")
      ->delimiter(',')
      ->required();
  add_alpha0_opts(alpha0, cfg);
  add_common(alpha0, cfg);

  auto* kfun = app.add_subcommand("kfun", "Class-K minorant of alpha0, gated on rank and window");
  kfun->add_option("spec", cfg.input, "System file")->required();
  kfun->add_option("--rgrid", cfg.rgrid, "Increasing separations, comma separated")
      ->delimiter(',')
      ->required();
  kfun->add_flag("--force", cfg.force, "Construct alpha even if a hypothesis check is negative");
  add_rank_opts(kfun, cfg);
  add_window_opts(kfun, cfg);
  add_alpha0_opts(kfun, cfg);
  add_common(kfun, cfg);

  auto* reproduce = app.add_subcommand("reproduce", "Full pipeline on a built-in example");
  reproduce->add_option("example", cfg.input, "Example name")->required();
  reproduce->add_option("--rgrid", cfg.rgrid, "alpha0 grid override")->delimiter(',');
  add_rank_opts(reproduce, cfg);
  add_window_opts(reproduce, cfg);
  add_alpha0_opts(reproduce, cfg);
  add_common(reproduce, cfg);

  auto* validate = app.add_subcommand("validate", "Parse a system file and report warnings");
  validate->add_option("spec", cfg.input, "System file")->required();
  add_common(validate, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "obswin: " << e.what() << "\n";
    return kUsage;
  }

  try {
    Outcome o;
    if (rank->parsed()) o = cmd_rank(cfg);
    else if (dist->parsed()) o = cmd_distinguish(cfg);
    else if (window->parsed()) o = cmd_window(cfg);
    else if (alpha0->parsed()) o = cmd_alpha0(cfg);
    else if (kfun->parsed()) o = cmd_kfun(cfg);
    else if (reproduce->parsed()) o = cmd_reproduce(cfg, args);
    else o = cmd_validate(cfg);

    if (!cfg.out_dir.empty()) {
      out << canonical_dump(report_bundle(cfg.out_dir, o.artifacts));
    } else if (cfg.format == "csv") {
      out << o.csv;
    } else {
      out << canonical_dump(o.report);
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "obswin: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "obswin: invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "obswin: I/O error: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    err << "obswin: analysis failed: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "obswin: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace obswin::cli
