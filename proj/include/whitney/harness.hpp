#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "whitney/io.hpp"

namespace whitney {

/// Test data kinds the harness can generate on E.
enum class DataKind { bump, random, affine };

struct ExperimentConfig {
  std::vector<double> ps{1.5};
  std::vector<std::int64_t> ns{4, 8, 16};
  std::vector<int> ls{1, 2, 3};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  /// Validity threshold on N; 4 admits the critical eps_0 = 1/4 at p = 1.5.
  std::int64_t min_inv_eps = 4;
  DataKind data = DataKind::bump;
  TestFunctionConfig test_function{};
  PipelineConfig pipeline{};
  QuadratureConfig quadrature{1, 5, 0.01, false};
  bool oracle = false;
  OracleOptions oracle_options{};
  /// Runs above this many CZ squares are skipped.
  std::size_t max_squares = 500000;
  /// Worker threads; 0 picks hardware concurrency.
  int threads = 0;
  std::filesystem::path output_dir = "whitney_out";
};

/// Throws ConfigError on unknown keys or bad values. Keys absent from `j`
/// keep the values already in `base`.
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});
Json to_json(const ExperimentConfig& c);

struct ExperimentTimings {
  double decompose = 0.0;  // shared per (N, L); reported on every run
  double solve = 0.0;      // tree + assembly
  double seminorm = 0.0;
  double oracle = 0.0;
};

struct ExperimentRecord {
  double p = 0.0;
  std::int64_t n = 0;
  int l = 0;
  std::uint64_t seed = 0;
  /// "ok", "exact" (0/0 ratio, affine data), "skipped" or "failed".
  std::string status;
  std::string reason;
  std::size_t squares = 0;
  double f_norm = std::nan("");
  double g_norm = std::nan("");
  double ratio = std::nan("");
  double refinement_error = std::nan("");
  double interpolation_error = std::nan("");
  double lq_sum = std::nan("");
  double eta_sum = std::nan("");
  double c_patch = std::nan("");
  double edge_sum = std::nan("");
  double tree_sum = std::nan("");
  double edge_tree_ratio = std::nan("");
  double tree_kkt = std::nan("");
  double oracle_seminorm = std::nan("");   // discrete minimum, p-th root
  double f_grid_seminorm = std::nan("");   // F sampled on the oracle grid, p-th root
  double oracle_ratio = std::nan("");      // ||F|| / max(oracle, ||G||)
  ExperimentTimings timings;
};

using LogFn = std::function<void(const std::string&)>;

/// Data on E for one run.
std::vector<double> make_data(DataKind kind, const FractalSet& set, std::uint64_t seed,
                              const TestFunctionConfig& tf, AnalyticTestFunction* g_out = nullptr);

/// One run of the boundedness experiment on a prebuilt decomposition.
ExperimentRecord run_single(const ExperimentConfig& config, double p,
                            std::shared_ptr<const CzDecomposition> decomp, std::uint64_t seed);

/// All (p, N, L, seed) runs in that order. Infeasible combinations are
/// skipped with a reason and failures are recorded; the sweep always
/// completes. Runs execute on `threads` workers; output order is fixed.
std::vector<ExperimentRecord> run_boundedness_experiment(const ExperimentConfig& config,
                                                         const LogFn& log = {});

/// Deterministic results table (no timings).
std::string records_csv(const std::vector<ExperimentRecord>& records);
std::string timings_csv(const std::vector<ExperimentRecord>& records);
/// Mean ratio over ok seeds against L, one series per (p, N).
std::string ratio_svg(const std::vector<ExperimentRecord>& records);

/// Writes results.csv, timings.csv, ratio.svg and config.json.
void write_experiment_outputs(const ExperimentConfig& config,
                              const std::vector<ExperimentRecord>& records);

struct VerificationConfig {
  std::vector<std::int64_t> ns{8, 16};
  std::vector<int> ls{1, 2, 3};
  std::int64_t min_inv_eps = 8;
  std::vector<double> ps{1.2, 1.5, 1.9};
  std::uint64_t seed = 1;
  ClusterConfig cluster{Fraction{2, 1}, 1, false};
  BumpSpec bump{};
  PouSampling pou{0, 20000};
  /// Interpolation, patching and edge-vs-tree checks run up to this size.
  std::size_t max_squares_pipeline = 60000;
};

Json to_json(const VerificationConfig& c);
VerificationConfig verification_config_from_json(const Json& j, VerificationConfig base = {});

struct VerificationCheck {
  std::string name;
  std::string instance;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  bool passed = false;
  std::vector<VerificationCheck> checks;
};

/// validate_separation, verify_good_geometry, verify_pou, cluster ball
/// checks, interpolation, patching and edge-vs-tree consistency on every
/// (N, L). Parameter errors (e.g. N below the threshold) propagate as
/// ConfigError.
VerificationReport run_verification_suite(const VerificationConfig& config, const LogFn& log = {});
Json to_json(const VerificationReport& r);

}  // namespace whitney
