// whitney: command line front end for the extension pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "whitney/harness.hpp"

namespace fs = std::filesystem;
using namespace whitney;

namespace {

constexpr int kOk = 0;
constexpr int kVerificationFailure = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::optional<std::int64_t> n;
  std::optional<int> l;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> min_inv_eps;
  std::optional<std::string> data;
  std::optional<double> margin;
  std::optional<int> threads;
  std::string data_file;
};

struct Context {
  std::string config_file;
  std::string out_dir;
  Overrides ov;
  Json raw;
  ExperimentConfig exp;
  fs::path out;
};

void add_instance_options(CLI::App* sub, Overrides& ov) {
  sub->add_option("--N", ov.n, "1/eps");
  sub->add_option("--L", ov.l, "depth");
  sub->add_option("--min-inv-eps", ov.min_inv_eps, "validity threshold on N");
}

void add_data_options(CLI::App* sub, Overrides& ov) {
  sub->add_option("--p", ov.p, "exponent in (1, 2]");
  sub->add_option("--seed", ov.seed, "data seed");
  sub->add_option("--data", ov.data, "generated data: bump, random or affine")
      ->check(CLI::IsMember({"bump", "random", "affine"}));
  sub->add_option("--f", ov.data_file, "data on E as JSON ({\"values\": [...]} or {index: value})");
  sub->add_option("--margin", ov.margin, "bump margin as a fraction of the side");
}

void load(Context& ctx) {
  ctx.raw = ctx.config_file.empty() ? Json::object() : read_json_file(ctx.config_file);
  ctx.exp = experiment_config_from_json(ctx.raw);
  const Overrides& ov = ctx.ov;
  if (ov.n) ctx.exp.ns = {*ov.n};
  if (ov.l) ctx.exp.ls = {*ov.l};
  if (ov.p) ctx.exp.ps = {*ov.p};
  if (ov.seed) ctx.exp.seeds = {*ov.seed};
  if (ov.min_inv_eps) ctx.exp.min_inv_eps = *ov.min_inv_eps;
  if (ov.data) ctx.exp = experiment_config_from_json(Json{{"data", *ov.data}}, ctx.exp);
  if (ov.margin) ctx.exp.pipeline.bump.margin = *ov.margin;
  if (ov.threads) ctx.exp.threads = *ov.threads;
  if (!ctx.out_dir.empty()) {
    ctx.out = ctx.out_dir;
  } else if (const char* env = std::getenv("WHITNEY_OUT_DIR"); env && *env) {
    ctx.out = env;
  } else {
    ctx.out = ctx.exp.output_dir;
  }
  ctx.exp.output_dir = ctx.out;
}

FractalSet instance_set(const Context& ctx) {
  return FractalSet(FractalParams{ctx.exp.ns.front(), ctx.exp.ls.front(), ctx.exp.min_inv_eps});
}

std::vector<double> instance_data(const Context& ctx, const FractalSet& set) {
  if (!ctx.ov.data_file.empty()) return read_data(read_json_file(ctx.ov.data_file), set);
  return make_data(ctx.exp.data, set, ctx.exp.seeds.front(), ctx.exp.test_function);
}

void emit(const Context& ctx, const std::string& name, const Json& j) {
  const fs::path path = ctx.out / name;
  write_file_atomic(path, j.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

int cmd_build_set(const Context& ctx) {
  const FractalSet set = instance_set(ctx);
  const SeparationReport r = validate_separation(set);
  Json j = to_json(set);
  j["validation"] = to_json(r);
  emit(ctx, "set.json", j);
  std::cout << "E: " << set.e1_size() << " + " << set.e2_size() << " points, "
            << (r.passed ? "valid" : "INVALID") << "\n";
  return r.passed ? kOk : kVerificationFailure;
}

int cmd_decompose(const Context& ctx, bool summary_only) {
  const CzDecomposition d(instance_set(ctx));
  const GeometryReport g = verify_good_geometry(d);
  Json j = decomposition_json(d, !summary_only);
  j["geometry"] = to_json(g);
  emit(ctx, "decomposition.json", j);
  std::cout << d.size() << " squares, max neighbours " << g.max_neighbor_count << ", max cover "
            << g.max_cover_count << ", " << (g.passed ? "good geometry" : "GEOMETRY FAILURE") << "\n";
  return g.passed ? kOk : kVerificationFailure;
}

int cmd_dump_tree(const Context& ctx) {
  const auto d = std::make_shared<const CzDecomposition>(instance_set(ctx));
  const ClusterTree tree = build_cluster_tree(d->set(), ctx.exp.pipeline.cluster);
  emit(ctx, "cluster_tree.json", cluster_tree_json(tree, assign_clusters(*d, tree)));
  const auto& r = tree.report();
  std::cout << tree.size() << " clusters, B-hat " << (r.hat_nesting && r.hat_disjoint ? "ok" : "below threshold")
            << " (needs N >= " << r.hat_threshold_inv_eps << ")\n";
  return kOk;
}

int cmd_solve_tree(const Context& ctx) {
  const FractalSet set = instance_set(ctx);
  const std::vector<double> f = instance_data(ctx, set);
  const double p = ctx.exp.ps.front();
  TreeProblem prob;
  prob.depth = set.depth();
  prob.p = p;
  prob.weights = p < 2.0 ? level_weights(set.params(), p) : std::vector<double>(static_cast<std::size_t>(set.depth()), 1.0);
  prob.leaves = leaf_slopes(f, set);
  const TreeSolution s = minimize_tree(prob, ctx.exp.pipeline.tree);
  Json j = to_json(s);
  j["p"] = p;
  j["weights"] = prob.weights;
  j["leaves"] = prob.leaves;
  emit(ctx, "tree_solution.json", j);
  std::cout << "objective " << format_double(s.objective) << ", kkt " << format_double(s.kkt_residual)
            << ", " << s.iterations << " iterations\n";
  return kOk;
}

int cmd_extend(const Context& ctx, int grid) {
  const auto d = std::make_shared<const CzDecomposition>(instance_set(ctx));
  const std::vector<double> f = instance_data(ctx, d->set());
  PipelineConfig pc = ctx.exp.pipeline;
  pc.p = ctx.exp.ps.front();
  const PipelineResult pr = extend(f, d, pc);
  const Extension& ext = *pr.extension;
  Json j = extension_json(ext);
  j["p"] = pc.p;
  const double err = interpolation_error(ext, f);
  j["interpolation_error"] = err;
  if (ext.bump_spec().margin <= 0.05) j["seminorm"] = to_json(seminorm(ext, pc.p, ctx.exp.quadrature));
  const PatchingSums ps = patching_rhs(ext, pc.p);
  j["patching"] = {{"lq_sum", ps.lq_sum}, {"eta_sum", ps.eta_sum}};
  const EdgeTreeReport et = eta_edge_vs_tree(ext, pr.solution, pr.weights, pc.p);
  j["edge_vs_tree"] = {{"edge_sum", et.edge_sum}, {"tree_sum", et.tree_sum}, {"ratio", et.ratio}};
  const TailReport tail = check_global_tail(ext);
  j["tail"] = {{"max_value_error", tail.max_value_error}, {"max_gradient_error", tail.max_gradient_error}};
  emit(ctx, "extension.json", j);
  if (grid > 0) {
    write_file_atomic(ctx.out / "extension_grid.csv", sample_csv(ext, grid));
    std::cout << "wrote " << (ctx.out / "extension_grid.csv").string() << "\n";
  }
  double fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, std::fabs(v));
  const bool ok = err <= 1e-9 * (1.0 + fmax) && et.consistent;
  if (j.contains("seminorm")) std::cout << "||F|| = " << format_double(j["seminorm"]["value"].get<double>()) << ", ";
  std::cout << "interpolation error " << format_double(err) << "\n";
  return ok ? kOk : kVerificationFailure;
}

int cmd_oracle(const Context& ctx, std::optional<int> refine) {
  const FractalSet set = instance_set(ctx);
  const std::vector<double> f = instance_data(ctx, set);
  OracleOptions o = ctx.exp.oracle_options;
  if (refine) o.refine = *refine;
  const double p = ctx.exp.ps.front();
  const OracleResult r = grid_minimal_extension(set, f, p, o);
  Json j{{"p", p},
         {"h", to_json(Fraction{1, r.grid.inv_h})},
         {"nodes_per_axis", r.grid.n},
         {"objective", r.objective},
         {"seminorm", std::pow(r.objective, 1.0 / p)},
         {"iterations", r.iterations},
         {"residual", r.gradient_norm},
         {"stage_objectives", r.stage_objectives},
         {"border_share", r.border_share}};
  emit(ctx, "oracle.json", j);
  write_file_atomic(ctx.out / "oracle_grid.csv", grid_csv(r.grid));
  std::cout << "wrote " << (ctx.out / "oracle_grid.csv").string() << "\n";
  std::cout << "discrete minimum " << format_double(r.objective) << " after " << r.iterations << " solves\n";
  return kOk;
}

int cmd_verify(const Context& ctx, std::optional<double> tamper_margin) {
  VerificationConfig vc;
  if (ctx.raw.contains("verify")) vc = verification_config_from_json(ctx.raw.at("verify"));
  if (ctx.ov.n) vc.ns = {*ctx.ov.n};
  if (ctx.ov.l) vc.ls = {*ctx.ov.l};
  if (ctx.ov.min_inv_eps) vc.min_inv_eps = *ctx.ov.min_inv_eps;
  if (tamper_margin) vc.bump.margin = *tamper_margin;
  const VerificationReport r =
      run_verification_suite(vc, [](const std::string& s) { std::cout << s << "\n"; });
  Json j = to_json(r);
  j["config"] = to_json(vc);
  emit(ctx, "verification.json", j);
  std::cout << (r.passed ? "all checks passed" : "VERIFICATION FAILED") << "\n";
  return r.passed ? kOk : kVerificationFailure;
}

int cmd_sweep(const Context& ctx) {
  const auto records =
      run_boundedness_experiment(ctx.exp, [](const std::string& s) { std::cerr << s << "\n"; });
  write_experiment_outputs(ctx.exp, records);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.status == "failed";
  std::cout << records.size() << " records written to " << ctx.out.string() << ", " << failed
            << " failed\n";
  return failed == 0 ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear extension operator for L^{2,p} on the fractal set E"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_option("-c,--config", ctx.config_file, "JSON configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", ctx.out_dir, "output directory (default: $WHITNEY_OUT_DIR, then config)");

  auto* build_set = app.add_subcommand("build-set", "construct E and validate it");
  add_instance_options(build_set, ctx.ov);

  bool summary_only = false;
  auto* decompose = app.add_subcommand("decompose", "CZ decomposition and good-geometry report");
  add_instance_options(decompose, ctx.ov);
  decompose->add_flag("--summary", summary_only, "omit the square list");

  auto* dump_tree = app.add_subcommand("dump-tree", "cluster tree, balls and square assignment");
  add_instance_options(dump_tree, ctx.ov);

  auto* solve_tree = app.add_subcommand("solve-tree", "minimize the weighted tree seminorm");
  add_instance_options(solve_tree, ctx.ov);
  add_data_options(solve_tree, ctx.ov);

  int grid = 0;
  auto* ext = app.add_subcommand("extend", "assemble F and report its seminorm");
  add_instance_options(ext, ctx.ov);
  add_data_options(ext, ctx.ov);
  ext->add_option("--grid", grid, "also sample F on an n x n grid over Q0");

  std::optional<int> refine;
  auto* oracle = app.add_subcommand("oracle", "discrete minimal extension on a grid");
  add_instance_options(oracle, ctx.ov);
  add_data_options(oracle, ctx.ov);
  oracle->add_option("--refine", refine, "grid spacing Delta / refine");

  std::optional<double> tamper;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  add_instance_options(verify, ctx.ov);
  verify->add_option("--tamper-margin", tamper, "test hook: bump margin used by the suite");

  auto* sweep = app.add_subcommand("sweep", "boundedness experiment over (p, N, L, seed)");
  add_data_options(sweep, ctx.ov);
  sweep->add_option("--threads", ctx.ov.threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    load(ctx);
    if (*build_set) return cmd_build_set(ctx);
    if (*decompose) return cmd_decompose(ctx, summary_only);
    if (*dump_tree) return cmd_dump_tree(ctx);
    if (*solve_tree) return cmd_solve_tree(ctx);
    if (*ext) return cmd_extend(ctx, grid);
    if (*oracle) return cmd_oracle(ctx, refine);
    if (*verify) return cmd_verify(ctx, tamper);
    if (*sweep) return cmd_sweep(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerificationFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
