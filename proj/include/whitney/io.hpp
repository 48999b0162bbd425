#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "whitney/clustering.hpp"
#include "whitney/cz_decomposition.hpp"
#include "whitney/fractal_set.hpp"
#include "whitney/interpolant.hpp"
#include "whitney/oracle.hpp"
#include "whitney/partition_of_unity.hpp"
#include "whitney/tree_extension.hpp"

namespace whitney {

using Json = nlohmann::ordered_json;

Json to_json(const Fraction& f);
Json to_json(const FractalSet& set);
Json to_json(const SeparationReport& r);
Json to_json(const GeometryReport& r);
Json to_json(const PouReport& r);
Json to_json(const ClusterSeparationReport& r);
Json to_json(const AffinePolynomial& a);
Json to_json(const TreeSolution& s);
Json to_json(const SeminormEstimate& s);
Json to_json(const AnalyticTestFunction& g);

/// Squares with generation, corner indices, type, boundary flag, anchors and
/// neighbour lists. `with_squares = false` keeps only the counts.
Json decomposition_json(const CzDecomposition& decomp, bool with_squares = true);
/// Clusters with centres, radii and member ranges, plus per-square C_Q.
Json cluster_tree_json(const ClusterTree& tree, const std::vector<std::uint32_t>& assignment);
/// Per-square pieces P_Q = L_Q + eta_Q x2 and the tail.
Json extension_json(const Extension& ext);

/// Data f on E from JSON: either {"values": [...]} by global index or a map
/// {"<global index>": value} covering every point. Throws ConfigError.
std::vector<double> read_data(const Json& j, const FractalSet& set);
Json data_json(const std::vector<double>& f);

Json read_json_file(const std::filesystem::path& path);
/// Writes to a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form, used in every CSV; NaN gives "".
std::string format_double(double v);

/// Node grid as CSV rows "x,y,value,constrained".
std::string grid_csv(const GridFunction& g);
/// F sampled on an n x n grid over `box` = [lo, hi]^2: "x,y,F".
std::string sample_csv(const Extension& ext, int n, double lo = -4.0, double hi = 4.0);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
/// Line plot with a log10 y axis, written directly as SVG.
std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label);

}  // namespace whitney
