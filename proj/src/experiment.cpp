#include "grassmm/experiment.hpp"

#include "grassmm/deconv.hpp"
#include "grassmm/errors.hpp"
#include "grassmm/subspace_mean.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace grassmm {

using nlohmann::json;
namespace fs = std::filesystem;

ConfigError::ConfigError(int line, const std::string &field,
                         const std::string &message)
    : std::runtime_error((line > 0 ? "config line " + std::to_string(line) + ": "
                                   : std::string("config: ")) +
                         (field.empty() ? "" : "field '" + field + "': ") + message),
      line_(line), field_(field) {}

const char *kind_name(ProblemKind kind) {
  return kind == ProblemKind::kDeconv ? "deconv" : "subspace-mean";
}

namespace {

int line_at(const std::string &text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(),
                                         text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the last key in `path`, searching each key after the previous one.
// Falls back to the deepest key found.
int line_of(const std::string &text, const std::vector<std::string> &path) {
  std::size_t pos = 0;
  int line = 0;
  for (const std::string &key : path) {
    const std::size_t hit = text.find("\"" + key + "\"", pos);
    if (hit == std::string::npos)
      break;
    pos = hit + key.size() + 2;
    line = line_at(text, hit);
  }
  return line;
}

std::string dotted(const std::vector<std::string> &path) {
  std::string out;
  for (const std::string &p : path)
    out += (out.empty() ? "" : ".") + p;
  return out;
}

class Reader {
public:
  explicit Reader(const std::string &text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string> &path,
                         const std::string &message) const {
    throw ConfigError(line_of(text_, path), dotted(path), message);
  }

  void only_keys(const json &obj, const std::vector<std::string> &path,
                 std::initializer_list<const char *> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char *k) { return it.key() == k; });
      if (!known) {
        std::vector<std::string> p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
    }
  }

  const json &object(const json &parent, const std::vector<std::string> &path,
                     bool required) const {
    static const json empty = json::object();
    const std::string &key = path.back();
    if (!parent.contains(key)) {
      if (required)
        fail(path, "missing required object");
      return empty;
    }
    const json &v = parent.at(key);
    if (!v.is_object())
      fail(path, "must be an object");
    return v;
  }

  template <class T>
  void integer(const json &obj, const std::vector<std::string> &path, T &dst,
               long long min, long long max = std::numeric_limits<long long>::max()) const {
    const std::string &key = path.back();
    if (!obj.contains(key))
      return;
    const json &v = obj.at(key);
    if (!v.is_number_integer())
      fail(path, "must be an integer");
    const long long x = v.get<long long>();
    if (x < min || x > max)
      fail(path, "must be in [" + std::to_string(min) + ", " +
                     (max == std::numeric_limits<long long>::max() ? std::string("inf")
                                                                   : std::to_string(max)) +
                     "]");
    dst = static_cast<T>(x);
  }

  void real(const json &obj, const std::vector<std::string> &path, double &dst) const {
    const std::string &key = path.back();
    if (!obj.contains(key))
      return;
    const json &v = obj.at(key);
    if (!v.is_number())
      fail(path, "must be a number");
    dst = v.get<double>();
  }

private:
  const std::string &text_;
};

} // namespace

ExperimentConfig parse_config(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(line_at(text, e.byte > 0 ? e.byte - 1 : 0), "",
                      "malformed JSON");
  }
  const Reader r(text);
  if (!doc.is_object())
    throw ConfigError(1, "", "top level must be an object");
  r.only_keys(doc, {}, {"problem", "solver", "audit", "seeds", "output", "workers"});

  ExperimentConfig cfg;
  const json &prob = r.object(doc, {"problem"}, true);
  if (!prob.contains("kind") || !prob.at("kind").is_string())
    r.fail({"problem", "kind"}, "must be \"deconv\" or \"subspace-mean\"");
  const std::string kind = prob.at("kind").get<std::string>();
  if (kind == "deconv") {
    cfg.kind = ProblemKind::kDeconv;
    r.only_keys(prob, {"problem"},
                {"kind", "N", "sparsity", "spikes", "kernel_support", "noise_sigma",
                 "lambda", "init", "step_scale"});
    DeconvParams &d = cfg.deconv;
    r.integer(prob, {"problem", "N"}, d.N, 2, 1 << 16);
    r.real(prob, {"problem", "sparsity"}, d.sparsity);
    if (!(d.sparsity > 0.0 && d.sparsity < 1.0))
      r.fail({"problem", "sparsity"}, "must be in (0, 1)");
    if (prob.contains("spikes")) {
      Eigen::Index k = 0;
      r.integer(prob, {"problem", "spikes"}, k, 1, d.N);
      d.spikes = k;
    }
    r.integer(prob, {"problem", "kernel_support"}, d.kernel_support, 1, d.N);
    r.real(prob, {"problem", "noise_sigma"}, d.noise_sigma);
    if (!(d.noise_sigma >= 0.0))
      r.fail({"problem", "noise_sigma"}, "must be >= 0");
    if (prob.contains("lambda")) {
      double lambda = 0.0;
      r.real(prob, {"problem", "lambda"}, lambda);
      if (!(lambda >= 0.0))
        r.fail({"problem", "lambda"}, "must be >= 0");
      d.lambda = lambda;
    }
    if (prob.contains("init")) {
      const json &v = prob.at("init");
      if (!v.is_string() || (v != "window" && v != "random"))
        r.fail({"problem", "init"}, "must be \"window\" or \"random\"");
      d.random_init = v == "random";
    }
    r.real(prob, {"problem", "step_scale"}, d.step_scale);
    if (!(d.step_scale > 0.0))
      r.fail({"problem", "step_scale"}, "must be > 0");
  } else if (kind == "subspace-mean") {
    cfg.kind = ProblemKind::kSubspaceMean;
    r.only_keys(prob, {"problem"}, {"kind", "N", "M", "D"});
    SubspaceMeanParams &s = cfg.subspace;
    r.integer(prob, {"problem", "N"}, s.N, 2, 1 << 14);
    r.integer(prob, {"problem", "M"}, s.M, 2, 1 << 16);
    r.integer(prob, {"problem", "D"}, s.D, 1);
    if (s.D >= std::min(s.N, s.M))
      r.fail({"problem", "D"}, "must be smaller than min(N, M)");
  } else {
    r.fail({"problem", "kind"}, "unknown kind '" + kind +
                                    "' (valid: deconv, subspace-mean)");
  }

  const json &sol = r.object(doc, {"solver"}, false);
  r.only_keys(sol, {"solver"},
              {"max_iter", "dist_tol", "cost_tol", "audit_every", "audit_samples",
               "stationarity_directions", "monotonicity_slack"});
  SolverConfig &sc = cfg.solver;
  r.integer(sol, {"solver", "max_iter"}, sc.max_iter, 1, 10'000'000);
  r.real(sol, {"solver", "dist_tol"}, sc.dist_tol);
  if (!(sc.dist_tol > 0.0))
    r.fail({"solver", "dist_tol"}, "must be > 0");
  r.real(sol, {"solver", "cost_tol"}, sc.cost_tol);
  if (!(sc.cost_tol > 0.0))
    r.fail({"solver", "cost_tol"}, "must be > 0");
  r.integer(sol, {"solver", "audit_every"}, sc.audit_every, 0, 1 << 30);
  r.integer(sol, {"solver", "audit_samples"}, sc.audit_samples, 1, 1 << 20);
  r.integer(sol, {"solver", "stationarity_directions"}, sc.stationarity_directions,
            1, 1 << 20);
  r.real(sol, {"solver", "monotonicity_slack"}, sc.monotonicity_slack);
  if (!(sc.monotonicity_slack >= 0.0))
    r.fail({"solver", "monotonicity_slack"}, "must be >= 0");

  const json &aud = r.object(doc, {"audit"}, false);
  r.only_keys(aud, {"audit"},
              {"anchors", "samples", "directions", "pairs", "t_samples", "radius",
               "rotations"});
  AuditParams &ap = cfg.audit;
  r.integer(aud, {"audit", "anchors"}, ap.anchors, 1, 10000);
  r.integer(aud, {"audit", "samples"}, ap.samples, 1, 1 << 20);
  r.integer(aud, {"audit", "directions"}, ap.directions, 1, 1 << 20);
  r.integer(aud, {"audit", "pairs"}, ap.pairs, 1, 1 << 20);
  r.integer(aud, {"audit", "t_samples"}, ap.t_samples, 1, 1 << 16);
  r.integer(aud, {"audit", "rotations"}, ap.rotations, 1, 1 << 20);
  r.real(aud, {"audit", "radius"}, ap.radius);
  if (!(ap.radius > 0.0 && ap.radius <= std::numbers::pi / 2))
    r.fail({"audit", "radius"}, "must be in (0, pi/2]");

  if (!doc.contains("seeds") || !doc.at("seeds").is_array() ||
      doc.at("seeds").empty())
    r.fail({"seeds"}, "must be a non-empty array of non-negative integers");
  std::set<std::uint64_t> seen;
  for (const json &s : doc.at("seeds")) {
    if (!s.is_number_integer() || s.get<long long>() < 0)
      r.fail({"seeds"}, "must be a non-empty array of non-negative integers");
    const auto v = s.get<std::uint64_t>();
    if (!seen.insert(v).second)
      r.fail({"seeds"}, "duplicate seed " + std::to_string(v));
    cfg.seeds.push_back(v);
  }

  if (doc.contains("output")) {
    if (!doc.at("output").is_string() || doc.at("output").get<std::string>().empty())
      r.fail({"output"}, "must be a non-empty string");
    cfg.output = doc.at("output").get<std::string>();
  }
  r.integer(doc, {"workers"}, cfg.workers, 1, 256);
  return cfg;
}

ExperimentConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(0, "", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SeedSetup build_seed(const ExperimentConfig &config, std::uint64_t seed) {
  if (config.kind == ProblemKind::kDeconv) {
    const DeconvParams &d = config.deconv;
    const SyntheticInstance inst =
        d.spikes ? generate_spike_instance(seed, d.N, *d.spikes, d.kernel_support,
                                           d.noise_sigma)
                 : generate_instance(seed, d.N, d.sparsity, d.kernel_support,
                                     d.noise_sigma);
    DeconvProblem p{inst.y, 0.0};
    const DeconvState init = d.random_init
                                 ? random_initial_state(derive_seed(seed, 1), d.N)
                                 : default_initial_state(p, d.kernel_support);
    p.lambda = d.lambda ? *d.lambda : default_lambda(p.y, init.a.basis().col(0));
    SeedSetup out{make_deconv_problem(p, DeconvOptions{d.step_scale}), init.a,
                  init.x, inst.true_a, std::nullopt, p.lambda};
    return out;
  }
  const SubspaceMeanParams &s = config.subspace;
  const Vector offset = 3.0 * random_gaussian(derive_seed(seed, 1), s.N, 1).col(0);
  const Matrix A = random_gaussian(derive_seed(seed, 0), s.N, s.M).colwise() + offset;
  const Matrix centred = A.colwise() - A.rowwise().mean();
  const Vector sv = thin_svd(centred).S;
  SeedSetup out{builtin_subspace_plus_mean(A, s.D),
                random_point(derive_seed(seed, 2), s.N, s.D),
                Vector::Zero(s.N),
                std::nullopt,
                sv.tail(sv.size() - s.D).squaredNorm(),
                0.0};
  return out;
}

SeedOutcome run_seed(const ExperimentConfig &config, std::uint64_t seed) {
  SeedSetup setup = build_seed(config, seed);
  SolverConfig sc = config.solver;
  sc.seed = seed;
  SeedOutcome out{seed, run_block_mm(setup.problem, setup.init_G, setup.init_c, sc),
                  std::nullopt, setup.oracle_cost};
  if (setup.true_kernel) {
    SyntheticInstance truth;
    truth.true_a = *setup.true_kernel;
    out.recovery = recovery_score(DeconvState{out.result.G, out.result.c}, truth);
  }
  return out;
}

void write_trace_csv(const IterationTrace &trace, const fs::path &path) {
  std::FILE *f = std::fopen(path.string().c_str(), "wb");
  if (!f)
    throw Error("cannot write " + path.string());
  std::fputs("iter,f,f_after_G,dc_step,grad_norm_G,grad_norm_c\n", f);
  for (const IterationRecord &r : trace.records)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.f, r.f_after_G,
                 r.dc_step, r.grad_norm_G, r.grad_norm_c);
  const bool ok = std::fclose(f) == 0;
  if (!ok)
    throw Error("cannot write " + path.string());
}

namespace {

AuditResult merge(std::vector<AuditResult> parts, const std::string &name) {
  AuditResult out{name, true, parts.front().worst, parts.front().threshold, 0, 0};
  for (const AuditResult &p : parts) {
    out.passed = out.passed && p.passed;
    // Majorization reports its smallest margin; everything else its largest
    // deviation.
    out.worst = name.rfind("majorization", 0) == 0 ? std::min(out.worst, p.worst)
                                                   : std::max(out.worst, p.worst);
    out.evaluated += p.evaluated;
    out.skipped += p.skipped;
  }
  return out;
}

std::vector<Anchor> random_anchors(const ExperimentConfig &config,
                                   std::uint64_t seed, const SeedSetup &setup) {
  std::vector<Anchor> out;
  const Eigen::Index n = setup.init_G.ambient_dim();
  const Eigen::Index d = setup.init_G.subspace_dim();
  const Eigen::Index len = setup.init_c.size();
  for (int k = 1; k < config.audit.anchors; ++k) {
    const std::uint64_t s = derive_seed(seed, 1000 + static_cast<std::uint64_t>(k));
    out.push_back(Anchor{random_point(derive_seed(s, 0), n, d),
                         random_gaussian(derive_seed(s, 1), len, 1).col(0)});
  }
  return out;
}

} // namespace

std::vector<AuditResult> audit_seed(const ExperimentConfig &config,
                                    std::uint64_t seed) {
  const SeedSetup setup = build_seed(config, seed);
  const BlockProblem &p = setup.problem;
  const AuditParams &ap = config.audit;

  // Anchor 0 is the solver's end point, or the initial point when a broken
  // surrogate makes the solver abort; the rest are random feasible points.
  SolverConfig sc = config.solver;
  sc.seed = seed;
  std::vector<Anchor> anchors;
  try {
    const BlockMMResult solved = run_block_mm(p, setup.init_G, setup.init_c, sc);
    anchors.push_back(Anchor{solved.G, solved.c});
  } catch (const MonotonicityViolation &) {
    anchors.push_back(Anchor{setup.init_G, setup.init_c});
  } catch (const InfeasibleBlock &) {
    anchors.push_back(Anchor{setup.init_G, setup.init_c});
  }
  for (Anchor &a : random_anchors(config, seed, setup))
    anchors.push_back(std::move(a));

  const std::uint64_t s = derive_seed(seed, 77);
  std::vector<AuditResult> out;
  out.push_back(audit_tightness(p.grassmann_surrogate, p, anchors));
  out.push_back(audit_tightness(p.convex_surrogate, p, anchors));
  out.push_back(audit_majorization(p.grassmann_surrogate, p, anchors, ap.samples,
                                   derive_seed(s, 0)));
  out.push_back(audit_majorization(p.convex_surrogate, p, anchors, ap.samples,
                                   derive_seed(s, 1)));
  std::vector<AuditResult> dg, dc;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    dg.push_back(audit_derivative_match(p.grassmann_surrogate, p, anchors[k],
                                        ap.directions, derive_seed(s, 10 + k)));
    dc.push_back(audit_derivative_match(p.convex_surrogate, p, anchors[k],
                                        ap.directions, derive_seed(s, 500 + k)));
  }
  out.push_back(merge(std::move(dg), "derivative_match/grassmann"));
  out.push_back(merge(std::move(dc), "derivative_match/convex"));
  out.push_back(audit_quasiconvexity(p.grassmann_surrogate, p, anchors[0], ap.pairs,
                                     ap.t_samples, derive_seed(s, 2), ap.radius));
  out.push_back(audit_quasiconvexity(p.convex_surrogate, p, anchors[0], ap.pairs,
                                     ap.t_samples, derive_seed(s, 3), ap.radius));
  out.push_back(audit_homogeneity(p, anchors, ap.rotations, derive_seed(s, 4)));
  return out;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path resolve_out(const ExperimentConfig &cfg,
                     const std::optional<fs::path> &out_dir) {
  return out_dir ? *out_dir : fs::path(cfg.output);
}

// Runs `job(i)` for i in [0, count) on up to `workers` threads; each index is
// processed exactly once and results are stored by index.
template <class Job> void parallel_for(std::size_t count, int workers, Job job) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < count; i = next++)
      job(i);
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, count); ++t)
    pool.emplace_back(loop);
  loop();
  for (std::thread &t : pool)
    t.join();
}

void write_json(const json &doc, const fs::path &path) {
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out)
    throw Error("cannot write " + path.string());
}

} // namespace

int cmd_run(const fs::path &config_path, const std::optional<fs::path> &out_dir,
            std::ostream &out, std::ostream &err) {
  ExperimentConfig cfg;
  fs::path dir;
  try {
    cfg = load_config(config_path);
    dir = resolve_out(cfg, out_dir);
    fs::create_directories(dir);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  const std::size_t n = cfg.seeds.size();
  std::vector<std::optional<SeedOutcome>> results(n);
  std::vector<std::string> failures(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    try {
      SeedOutcome o = run_seed(cfg, seed);
      write_trace_csv(o.result.trace,
                      dir / ("trace_seed" + std::to_string(seed) + ".csv"));
      results[i] = std::move(o);
    } catch (const std::exception &e) {
      failures[i] = e.what();
    }
  });

  json runs = json::array();
  bool any_error = false, all_converged = true;
  for (std::size_t i = 0; i < n; ++i) {
    json entry{{"seed", cfg.seeds[i]}};
    if (!results[i]) {
      any_error = true;
      entry["error"] = failures[i];
      err << "error: seed " << cfg.seeds[i] << ": " << failures[i] << '\n';
      runs.push_back(entry);
      continue;
    }
    const SeedOutcome &o = *results[i];
    const ConvergenceReport &rep = o.result.report;
    all_converged = all_converged && rep.converged;
    entry["converged"] = rep.converged;
    entry["iterations"] = rep.iterations;
    entry["final_f"] = finite_or_null(rep.final_cost);
    entry["final_dc"] = finite_or_null(rep.final_distance);
    entry["stationarity_score"] = finite_or_null(rep.stationarity_score);
    entry["stationarity_directions"] = rep.stationarity_directions;
    entry["stationarity_seed"] = rep.stationarity_seed;
    entry["oscillation_detected"] = rep.oscillation_detected;
    entry["audit_runs"] = rep.audits.runs;
    entry["audit_failures"] = rep.audits.failures;
    entry["trace_file"] = "trace_seed" + std::to_string(o.seed) + ".csv";
    if (o.recovery)
      entry["recovery_score"] = *o.recovery;
    if (o.oracle_cost)
      entry["oracle_f"] = *o.oracle_cost;
    runs.push_back(entry);
    out << "seed " << o.seed << ": " << (rep.converged ? "converged" : "not converged")
        << " after " << rep.iterations << " iterations, f = " << rep.final_cost << '\n';
  }

  const json report{{"problem", kind_name(cfg.kind)},
                    {"runs", runs},
                    {"all_converged", all_converged && !any_error}};
  try {
    write_json(report, dir / "report.json");
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (any_error)
    return kExitError;
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_audit(const fs::path &config_path, const std::optional<fs::path> &out_dir,
              std::ostream &out, std::ostream &err) {
  ExperimentConfig cfg;
  fs::path dir;
  try {
    cfg = load_config(config_path);
    dir = resolve_out(cfg, out_dir);
    fs::create_directories(dir);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<AuditResult>> results(n);
  std::vector<std::string> failures(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    try {
      results[i] = audit_seed(cfg, cfg.seeds[i]);
    } catch (const std::exception &e) {
      failures[i] = e.what();
    }
  });

  bool all_passed = true;
  json seeds = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      err << "error: seed " << cfg.seeds[i] << ": " << failures[i] << '\n';
      return kExitError;
    }
    json audits = json::array();
    for (const AuditResult &a : results[i]) {
      all_passed = all_passed && a.passed;
      audits.push_back({{"name", a.name},
                        {"passed", a.passed},
                        {"worst", finite_or_null(a.worst)},
                        {"threshold", a.threshold},
                        {"evaluated", a.evaluated},
                        {"skipped", a.skipped}});
      out << "seed " << cfg.seeds[i] << " " << a.name << ": "
          << (a.passed ? "pass" : "FAIL") << " (worst " << a.worst << ")\n";
    }
    seeds.push_back({{"seed", cfg.seeds[i]}, {"audits", audits}});
  }
  const json doc{{"problem", kind_name(cfg.kind)},
                 {"seeds", seeds},
                 {"all_passed", all_passed}};
  try {
    write_json(doc, dir / "audit.json");
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return all_passed ? kExitOk : kExitAuditFailed;
}

int cmd_demo(const std::string &kind, std::uint64_t seed, std::ostream &out,
             std::ostream &err) {
  ExperimentConfig cfg;
  if (kind == "deconv") {
    cfg.kind = ProblemKind::kDeconv;
    cfg.deconv.spikes = 4;
    cfg.deconv.lambda = 0.1;
  } else if (kind == "subspace-mean") {
    cfg.kind = ProblemKind::kSubspaceMean;
  } else {
    err << "error: unknown demo kind '" << kind
        << "' (valid kinds: deconv, subspace-mean)\n";
    return kExitError;
  }
  cfg.seeds = {seed};
  try {
    const SeedOutcome o = run_seed(cfg, seed);
    const ConvergenceReport &rep = o.result.report;
    char line[160];
    out << "demo " << kind << ", seed " << seed << '\n';
    std::snprintf(line, sizeof line, "final cost:         %.12g\n", rep.final_cost);
    out << line;
    std::snprintf(line, sizeof line, "iterations:         %d (%s)\n", rep.iterations,
                  rep.converged ? "converged" : "not converged");
    out << line;
    std::snprintf(line, sizeof line, "final d_c step:     %.3e\n", rep.final_distance);
    out << line;
    std::snprintf(line, sizeof line, "stationarity score: %.3e\n",
                  rep.stationarity_score);
    out << line;
    if (o.recovery)
      std::snprintf(line, sizeof line, "recovery score:     %.6f\n", *o.recovery);
    else
      std::snprintf(line, sizeof line, "oracle cost:        %.12g (difference %.2e)\n",
                    *o.oracle_cost, std::abs(rep.final_cost - *o.oracle_cost));
    out << line;
    return rep.converged ? kExitOk : kExitNotConverged;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

} // namespace grassmm
