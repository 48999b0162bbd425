#include "whitney/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace whitney {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string data_kind_name(DataKind k) {
  switch (k) {
    case DataKind::bump: return "bump";
    case DataKind::random: return "random";
    case DataKind::affine: return "affine";
  }
  return "?";
}

DataKind parse_data_kind(const std::string& s) {
  if (s == "bump") return DataKind::bump;
  if (s == "random") return DataKind::random;
  if (s == "affine") return DataKind::affine;
  throw ConfigError("data must be one of bump, random, affine (got '" + s + "')");
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
std::vector<T> scalar_or_list(const Json& v, const std::string& key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const Json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Fraction read_fraction(const Json& v) {
  if (v.is_array() && v.size() == 2) return {v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
  if (v.is_number_integer()) return {v.get<std::int64_t>(), 1};
  throw ConfigError("fractions are written as [num, den] or an integer");
}

void read_cluster(const Json& j, ClusterConfig& c) {
  check_keys(j, {"ball_scale", "m", "strict"}, "cluster");
  if (j.contains("ball_scale")) c.ball_scale = read_fraction(j.at("ball_scale"));
  read(j, "m", c.m);
  read(j, "strict", c.strict);
}

Json cluster_json(const ClusterConfig& c) {
  return {{"ball_scale", to_json(c.ball_scale)}, {"m", c.m}, {"strict", c.strict}};
}

void read_test_function(const Json& j, TestFunctionConfig& t) {
  check_keys(j, {"bumps", "min_radius", "max_radius", "min_amplitude", "max_amplitude", "affine_range",
                 "box_x", "box_y"},
             "test_function");
  read(j, "bumps", t.bumps);
  read(j, "min_radius", t.min_radius);
  read(j, "max_radius", t.max_radius);
  read(j, "min_amplitude", t.min_amplitude);
  read(j, "max_amplitude", t.max_amplitude);
  read(j, "affine_range", t.affine_range);
  read(j, "box_x", t.box_x);
  read(j, "box_y", t.box_y);
}

void read_quadrature(const Json& j, QuadratureConfig& q) {
  check_keys(j, {"subcells", "nodes", "tolerance", "estimate_error"}, "quadrature");
  read(j, "subcells", q.subcells);
  read(j, "nodes", q.nodes);
  read(j, "tolerance", q.tolerance);
  read(j, "estimate_error", q.estimate_error);
}

void read_oracle(const Json& j, bool& enabled, OracleOptions& o) {
  check_keys(j, {"enabled", "refine", "tol", "window", "stages", "max_iterations_per_stage",
                 "max_nodes_per_axis"},
             "oracle");
  read(j, "enabled", enabled);
  read(j, "refine", o.refine);
  read(j, "tol", o.tol);
  read(j, "window", o.window);
  read(j, "stages", o.stages);
  read(j, "max_iterations_per_stage", o.max_iterations_per_stage);
  read(j, "max_nodes_per_axis", o.max_nodes_per_axis);
}

void read_tree(const Json& j, TreeSolverOptions& t) {
  check_keys(j, {"tol", "max_iterations"}, "tree");
  read(j, "tol", t.tol);
  read(j, "max_iterations", t.max_iterations);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Rough CZ size: about 96 squares per unit of D at desk scale.
constexpr std::size_t kSquaresPerDenominator = 90;

void check_experiment(const ExperimentConfig& c) {
  if (c.ps.empty() || c.ns.empty() || c.ls.empty() || c.seeds.empty())
    throw ConfigError("p, N, L and seeds must be non-empty");
  if (c.quadrature.subcells < 1 || c.quadrature.nodes < 1) throw ConfigError("bad quadrature settings");
  if (c.pipeline.bump.margin <= 0.0 || c.pipeline.bump.margin > 0.5)
    throw ConfigError("bump margin must lie in (0, 0.5]");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (c.test_function.bumps < 0) throw ConfigError("bump count must be >= 0");
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  check_keys(j, {"p", "N", "L", "seeds", "seed", "min_inv_eps", "data", "test_function", "cluster",
                 "margin", "tree", "quadrature", "oracle", "max_squares", "threads", "output_dir",
                 "verify"},
             "config");
  if (j.contains("p")) c.ps = scalar_or_list<double>(j.at("p"), "p");
  if (j.contains("N")) c.ns = scalar_or_list<std::int64_t>(j.at("N"), "N");
  if (j.contains("L")) c.ls = scalar_or_list<int>(j.at("L"), "L");
  if (j.contains("seeds")) c.seeds = scalar_or_list<std::uint64_t>(j.at("seeds"), "seeds");
  if (j.contains("seed")) c.seeds = scalar_or_list<std::uint64_t>(j.at("seed"), "seed");
  read(j, "min_inv_eps", c.min_inv_eps);
  if (j.contains("data")) c.data = parse_data_kind(j.at("data").get<std::string>());
  if (j.contains("test_function")) read_test_function(j.at("test_function"), c.test_function);
  if (j.contains("cluster")) read_cluster(j.at("cluster"), c.pipeline.cluster);
  read(j, "margin", c.pipeline.bump.margin);
  if (j.contains("tree")) read_tree(j.at("tree"), c.pipeline.tree);
  if (j.contains("quadrature")) read_quadrature(j.at("quadrature"), c.quadrature);
  if (j.contains("oracle")) read_oracle(j.at("oracle"), c.oracle, c.oracle_options);
  read(j, "max_squares", c.max_squares);
  read(j, "threads", c.threads);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  check_experiment(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  const TestFunctionConfig& t = c.test_function;
  const OracleOptions& o = c.oracle_options;
  return {{"p", c.ps},
          {"N", c.ns},
          {"L", c.ls},
          {"seeds", c.seeds},
          {"min_inv_eps", c.min_inv_eps},
          {"data", data_kind_name(c.data)},
          {"test_function",
           {{"bumps", t.bumps},
            {"min_radius", t.min_radius},
            {"max_radius", t.max_radius},
            {"min_amplitude", t.min_amplitude},
            {"max_amplitude", t.max_amplitude},
            {"affine_range", t.affine_range},
            {"box_x", t.box_x},
            {"box_y", t.box_y}}},
          {"cluster", cluster_json(c.pipeline.cluster)},
          {"margin", c.pipeline.bump.margin},
          {"tree", {{"tol", c.pipeline.tree.tol}, {"max_iterations", c.pipeline.tree.max_iterations}}},
          {"quadrature",
           {{"subcells", c.quadrature.subcells},
            {"nodes", c.quadrature.nodes},
            {"tolerance", c.quadrature.tolerance},
            {"estimate_error", c.quadrature.estimate_error}}},
          {"oracle",
           {{"enabled", c.oracle},
            {"refine", o.refine},
            {"tol", o.tol},
            {"window", o.window},
            {"stages", o.stages},
            {"max_iterations_per_stage", o.max_iterations_per_stage},
            {"max_nodes_per_axis", o.max_nodes_per_axis}}},
          {"max_squares", c.max_squares},
          {"threads", c.threads},
          {"output_dir", c.output_dir.string()}};
}

std::vector<double> make_data(DataKind kind, const FractalSet& set, std::uint64_t seed,
                              const TestFunctionConfig& tf, AnalyticTestFunction* g_out) {
  switch (kind) {
    case DataKind::bump: {
      AnalyticTestFunction g = sample_test_function(seed, tf);
      std::vector<double> f = restrict_to(g, set);
      if (g_out) *g_out = std::move(g);
      return f;
    }
    case DataKind::random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<double> f(set.size());
      for (double& v : f) v = u(rng);
      return f;
    }
    case DataKind::affine: {
      // Dyadic coefficients keep every divided difference exact.
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> k(-4096, 4096);
      AnalyticTestFunction g;
      g.affine = {k(rng) / 1024.0, k(rng) / 1024.0, k(rng) / 1024.0};
      std::vector<double> f = restrict_to(g, set);
      if (g_out) *g_out = std::move(g);
      return f;
    }
  }
  throw ConfigError("unknown data kind");
}

ExperimentRecord run_single(const ExperimentConfig& config, double p,
                            std::shared_ptr<const CzDecomposition> decomp, std::uint64_t seed) {
  ExperimentRecord r;
  const FractalSet& set = decomp->set();
  r.p = p;
  r.n = set.inv_eps();
  r.l = set.depth();
  r.seed = seed;
  r.squares = decomp->size();
  try {
    AnalyticTestFunction g;
    const bool have_g = config.data != DataKind::random;
    const std::vector<double> f = make_data(config.data, set, seed, config.test_function, &g);

    auto t0 = Clock::now();
    PipelineConfig pc = config.pipeline;
    pc.p = p;
    const PipelineResult pr = extend(f, decomp, pc);
    r.timings.solve = seconds_since(t0);
    const Extension& ext = *pr.extension;
    r.tree_kkt = pr.solution.kkt_residual;
    r.interpolation_error = interpolation_error(ext, f);

    t0 = Clock::now();
    const SeminormEstimate est = seminorm(ext, p, config.quadrature);
    r.timings.seminorm = seconds_since(t0);
    r.f_norm = est.value;
    if (config.quadrature.estimate_error) r.refinement_error = est.refinement_error;

    const PatchingSums ps = patching_rhs(ext, p);
    r.lq_sum = ps.lq_sum;
    r.eta_sum = ps.eta_sum;
    if (ps.lq_sum + ps.eta_sum > 0.0) r.c_patch = est.integral / (ps.lq_sum + ps.eta_sum);
    const EdgeTreeReport et = eta_edge_vs_tree(ext, pr.solution, pr.weights, p);
    r.edge_sum = et.edge_sum;
    r.tree_sum = et.tree_sum;
    if (et.tree_sum > 0.0) r.edge_tree_ratio = et.ratio;

    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::fabs(v));
    r.status = "ok";
    if (have_g) {
      r.g_norm = g.seminorm(p);
      if (r.g_norm > 0.0) {
        r.ratio = r.f_norm / r.g_norm;
      } else if (r.f_norm <= 1e-10 * (1.0 + fmax)) {
        r.status = "exact";
      } else {
        r.status = "failed";
        r.reason = "nonzero extension of data with ||G|| = 0";
      }
    }
    if (!et.consistent) {
      r.status = "failed";
      r.reason = "edge sum positive while tree sum vanishes";
    }
    if (r.interpolation_error > 1e-9 * (1.0 + fmax)) {
      r.status = "failed";
      r.reason = "interpolation error " + format_double(r.interpolation_error);
    }

    if (config.oracle) {
      const std::int64_t nodes = 8 * set.denom() * config.oracle_options.refine + 1;
      if (nodes > config.oracle_options.max_nodes_per_axis) {
        r.reason = "oracle skipped: " + std::to_string(nodes) + " nodes per axis";
      } else {
        t0 = Clock::now();
        const OracleResult o = grid_minimal_extension(set, f, p, config.oracle_options);
        r.timings.oracle = seconds_since(t0);
        r.oracle_seminorm = std::pow(o.objective, 1.0 / p);
        r.f_grid_seminorm = std::pow(discrete_seminorm(sample_on_grid(ext, o.grid), p), 1.0 / p);
        const double lower = std::max(r.oracle_seminorm, have_g ? r.g_norm : 0.0);
        if (lower > 0.0) r.oracle_ratio = r.f_norm / lower;
      }
    }
  } catch (const Error& e) {
    r.status = "failed";
    r.reason = e.what();
  }
  return r;
}

std::vector<ExperimentRecord> run_boundedness_experiment(const ExperimentConfig& config,
                                                         const LogFn& log) {
  check_experiment(config);
  std::mutex log_mutex;
  auto say = [&](const std::string& s) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    log(s);
  };

  struct Task {
    std::size_t slot;
    double p;
    std::shared_ptr<const CzDecomposition> decomp;
    double decompose_time;
    std::uint64_t seed;
  };
  std::vector<ExperimentRecord> records;
  std::vector<Task> tasks;

  std::map<std::pair<std::int64_t, int>, std::pair<std::shared_ptr<const CzDecomposition>, double>> cache;
  std::map<std::pair<std::int64_t, int>, std::string> skip_reason;
  for (std::int64_t n : config.ns)
    for (int l : config.ls) {
      const auto key = std::make_pair(n, l);
      if (cache.count(key) || skip_reason.count(key)) continue;
      try {
        const FractalParams params{n, l, config.min_inv_eps};
        const FractalSet set(params);
        if (static_cast<std::size_t>(set.denom()) > config.max_squares / kSquaresPerDenominator) {
          skip_reason[key] = "expected CZ size above max_squares";
          continue;
        }
        const auto t0 = Clock::now();
        auto d = std::make_shared<const CzDecomposition>(set);
        const double dt = seconds_since(t0);
        if (d->size() > config.max_squares) {
          skip_reason[key] = std::to_string(d->size()) + " squares above max_squares";
          continue;
        }
        say("decomposed N=" + std::to_string(n) + " L=" + std::to_string(l) + ": " +
            std::to_string(d->size()) + " squares");
        cache[key] = {std::move(d), dt};
      } catch (const Error& e) {
        skip_reason[key] = e.what();
      }
    }

  for (double p : config.ps)
    for (std::int64_t n : config.ns)
      for (int l : config.ls)
        for (std::uint64_t seed : config.seeds) {
          ExperimentRecord r;
          r.p = p;
          r.n = n;
          r.l = l;
          r.seed = seed;
          const auto key = std::make_pair(n, l);
          if (!(p > 1.0 && p <= 2.0)) {
            r.status = "skipped";
            r.reason = "p outside (1, 2]";
          } else if (auto it = skip_reason.find(key); it != skip_reason.end()) {
            r.status = "skipped";
            r.reason = it->second;
          } else {
            tasks.push_back({records.size(), p, cache[key].first, cache[key].second, seed});
          }
          if (r.status == "skipped")
            say("skip p=" + format_double(p) + " N=" + std::to_string(n) + " L=" + std::to_string(l) +
                " seed=" + std::to_string(seed) + ": " + r.reason);
          records.push_back(std::move(r));
        }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& t = tasks[k];
      ExperimentRecord r = run_single(config, t.p, t.decomp, t.seed);
      r.timings.decompose = t.decompose_time;
      std::ostringstream msg;
      msg << "p=" << format_double(r.p) << " N=" << r.n << " L=" << r.l << " seed=" << r.seed << ": "
          << r.status;
      if (r.status == "ok" && !std::isnan(r.ratio)) msg << " ratio=" << format_double(r.ratio);
      if (!r.reason.empty()) msg << " (" << r.reason << ")";
      say(msg.str());
      records[t.slot] = std::move(r);
    }
  };
  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  return records;
}

std::string records_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << "p,N,L,seed,status,reason,squares,F_norm,G_norm,ratio,refinement_error,interpolation_error,"
        "lq_sum,eta_sum,c_patch,edge_sum,tree_sum,edge_tree_ratio,tree_kkt,oracle_seminorm,"
        "F_grid_seminorm,oracle_ratio\n";
  for (const ExperimentRecord& r : records) {
    os << format_double(r.p) << ',' << r.n << ',' << r.l << ',' << r.seed << ',' << r.status << ','
       << csv_field(r.reason) << ',' << r.squares;
    for (double v : {r.f_norm, r.g_norm, r.ratio, r.refinement_error, r.interpolation_error, r.lq_sum,
                     r.eta_sum, r.c_patch, r.edge_sum, r.tree_sum, r.edge_tree_ratio, r.tree_kkt,
                     r.oracle_seminorm, r.f_grid_seminorm, r.oracle_ratio})
      os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

std::string timings_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << "p,N,L,seed,decompose_s,solve_s,seminorm_s,oracle_s\n";
  for (const ExperimentRecord& r : records)
    os << format_double(r.p) << ',' << r.n << ',' << r.l << ',' << r.seed << ','
       << format_double(r.timings.decompose) << ',' << format_double(r.timings.solve) << ','
       << format_double(r.timings.seminorm) << ',' << format_double(r.timings.oracle) << '\n';
  return os.str();
}

std::string ratio_svg(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<double, std::int64_t>, std::map<int, std::pair<double, int>>> acc;
  for (const ExperimentRecord& r : records)
    if (r.status == "ok" && std::isfinite(r.ratio)) {
      auto& cell = acc[{r.p, r.n}][r.l];
      cell.first += r.ratio;
      ++cell.second;
    }
  std::vector<PlotSeries> series;
  for (const auto& [key, by_l] : acc) {
    PlotSeries s;
    s.label = "p=" + format_double(key.first) + " N=" + std::to_string(key.second);
    for (const auto& [l, sum] : by_l) {
      s.x.push_back(l);
      s.y.push_back(sum.first / sum.second);
    }
    series.push_back(std::move(s));
  }
  return svg_plot(series, "||F|| / ||G|| against depth", "L", "mean ratio");
}

void write_experiment_outputs(const ExperimentConfig& config,
                              const std::vector<ExperimentRecord>& records) {
  const auto& dir = config.output_dir;
  write_file_atomic(dir / "results.csv", records_csv(records));
  write_file_atomic(dir / "timings.csv", timings_csv(records));
  write_file_atomic(dir / "ratio.svg", ratio_svg(records));
  write_file_atomic(dir / "config.json", to_json(config).dump(2) + "\n");
}

Json to_json(const VerificationConfig& c) {
  return {{"N", c.ns},
          {"L", c.ls},
          {"min_inv_eps", c.min_inv_eps},
          {"p", c.ps},
          {"seed", c.seed},
          {"cluster", cluster_json(c.cluster)},
          {"margin", c.bump.margin},
          {"pou", {{"per_axis", c.pou.per_axis}, {"max_squares", c.pou.max_squares}}},
          {"max_squares_pipeline", c.max_squares_pipeline}};
}

VerificationConfig verification_config_from_json(const Json& j, VerificationConfig c) {
  check_keys(j, {"N", "L", "min_inv_eps", "p", "seed", "cluster", "margin", "pou", "max_squares_pipeline"},
             "verify");
  if (j.contains("N")) c.ns = scalar_or_list<std::int64_t>(j.at("N"), "N");
  if (j.contains("L")) c.ls = scalar_or_list<int>(j.at("L"), "L");
  read(j, "min_inv_eps", c.min_inv_eps);
  if (j.contains("p")) c.ps = scalar_or_list<double>(j.at("p"), "p");
  read(j, "seed", c.seed);
  if (j.contains("cluster")) read_cluster(j.at("cluster"), c.cluster);
  read(j, "margin", c.bump.margin);
  if (j.contains("pou")) {
    const Json& p = j.at("pou");
    check_keys(p, {"per_axis", "max_squares"}, "pou");
    read(p, "per_axis", c.pou.per_axis);
    read(p, "max_squares", c.pou.max_squares);
  }
  read(j, "max_squares_pipeline", c.max_squares_pipeline);
  return c;
}

VerificationReport run_verification_suite(const VerificationConfig& config, const LogFn& log) {
  if (config.ns.empty() || config.ls.empty()) throw ConfigError("verification needs N and L values");
  for (double p : config.ps)
    if (!(p > 1.0 && p < 2.0)) throw ConfigError("verification exponents must lie in (1, 2)");
  if (!(config.bump.margin > 0.0)) throw ConfigError("bump margin must be positive");
  VerificationReport rep;
  auto add = [&](std::string name, std::string inst, bool ok, std::string detail) {
    if (log) log(std::string(ok ? "pass " : "FAIL ") + name + " [" + inst + "] " + detail);
    rep.checks.push_back({std::move(name), std::move(inst), ok, std::move(detail)});
  };
  // Sets are built first so parameter errors surface before any work.
  std::vector<FractalSet> sets;
  for (std::int64_t n : config.ns)
    for (int l : config.ls) sets.emplace_back(FractalParams{n, l, config.min_inv_eps});

  std::set<std::size_t> nbr_counts, cover_counts;
  for (const FractalSet& set : sets) {
    const std::string inst = "N=" + std::to_string(set.inv_eps()) + " L=" + std::to_string(set.depth());
    const SeparationReport sep = validate_separation(set);
    add("fractal_set", inst, sep.passed,
        "min distance " + format_double(sep.min_distance) + (sep.passed ? "" : ": " + sep.failures.front()));

    auto decomp = std::make_shared<const CzDecomposition>(set);
    const GeometryReport geo = verify_good_geometry(*decomp);
    nbr_counts.insert(geo.max_neighbor_count);
    cover_counts.insert(geo.max_cover_count);
    add("cz_geometry", inst, geo.passed,
        std::to_string(geo.square_count) + " squares, max neighbours " +
            std::to_string(geo.max_neighbor_count) + ", max cover " + std::to_string(geo.max_cover_count) +
            (geo.passed ? "" : ": " + geo.failures.front()));

    const PouReport pou = verify_pou(*decomp, config.pou, config.bump);
    add("partition_of_unity", inst, pou.passed,
        "defect " + format_double(pou.partition_defect) + ", support violations " +
            std::to_string(pou.support_violations) + (pou.passed ? "" : ": " + pou.failures.front()));

    const ClusterTree tree(set, config.cluster);
    const ClusterSeparationReport& cs = tree.report();
    const bool balls_ok = cs.members_inside && cs.ball_nesting && cs.ball_disjoint;
    const bool hat_ok = cs.hat_nesting && cs.hat_disjoint;
    add("cluster_balls", inst, balls_ok && (hat_ok || !config.cluster.strict),
        std::string("B_C ") + (balls_ok ? "ok" : "broken") + ", B-hat " +
            (hat_ok ? "ok" : "below threshold N >= " + std::to_string(cs.hat_threshold_inv_eps)));

    if (decomp->size() > config.max_squares_pipeline) continue;
    for (double p : config.ps) {
      const std::string pinst = inst + " p=" + format_double(p);
      try {
        const std::vector<double> f = make_data(DataKind::random, set, config.seed, {});
        PipelineConfig pc;
        pc.p = p;
        pc.cluster = config.cluster;
        pc.bump = config.bump;
        const PipelineResult pr = extend(f, decomp, pc);
        const double err = interpolation_error(*pr.extension, f);
        add("interpolation", pinst, err <= 2e-9, "max error " + format_double(err));
        add("tree_kkt", pinst, pr.solution.kkt_residual <= pc.tree.tol,
            "residual " + format_double(pr.solution.kkt_residual));
        const EdgeTreeReport et = eta_edge_vs_tree(*pr.extension, pr.solution, pr.weights, p);
        add("edge_vs_tree", pinst, et.consistent && std::isfinite(et.ratio),
            "ratio " + format_double(et.ratio));
        const PatchingSums ps = patching_rhs(*pr.extension, p);
        add("patching_rhs", pinst, std::isfinite(ps.lq_sum) && std::isfinite(ps.eta_sum),
            "lq " + format_double(ps.lq_sum) + ", eta " + format_double(ps.eta_sum));
        const TailReport tail = check_global_tail(*pr.extension);
        add("global_tail", pinst, tail.max_value_error <= 1e-8 && tail.max_gradient_error <= 1e-8,
            "value " + format_double(tail.max_value_error) + ", gradient " +
                format_double(tail.max_gradient_error));
      } catch (const GeometryError& e) {
        add("pipeline", pinst, false, e.what());
      } catch (const ConsistencyError& e) {
        add("pipeline", pinst, false, e.what());
      } catch (const ConvergenceError& e) {
        add("pipeline", pinst, false, e.what());
      }
    }
  }
  add("geometry_constants", "sweep", nbr_counts.size() == 1 && cover_counts.size() == 1,
      "distinct max neighbour counts " + std::to_string(nbr_counts.size()) + ", cover counts " +
          std::to_string(cover_counts.size()));
  rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.passed; });
  return rep;
}

Json to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"instance", c.instance}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"passed", r.passed}, {"checks", std::move(checks)}};
}

}  // namespace whitney
