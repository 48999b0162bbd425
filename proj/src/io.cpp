#include "whitney/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace whitney {

namespace {

Json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

const char* type_name(SquareType t) {
  switch (t) {
    case SquareType::I: return "I";
    case SquareType::II: return "II";
    case SquareType::III: return "III";
  }
  return "?";
}

}  // namespace

Json to_json(const Fraction& f) { return Json::array({f.num, f.den}); }

Json to_json(const FractalSet& set) {
  Json j;
  j["inv_eps"] = set.inv_eps();
  j["depth"] = set.depth();
  j["delta"] = to_json(set.delta());
  Json e1 = Json::array();
  for (std::size_t i = 0; i < set.e1_size(); ++i)
    e1.push_back(Json::array({to_json(set.exact_x(i)), to_json(set.exact_y(i))}));
  j["e1"] = std::move(e1);
  Json e2 = Json::array();
  for (std::size_t k = 0; k < set.e2_size(); ++k) {
    const std::size_t g = set.global_index_e2(k);
    e2.push_back({{"signs", set.e2_signs(k)},
                  {"point", Json::array({to_json(set.exact_x(g)), to_json(set.exact_y(g))})}});
  }
  j["e2"] = std::move(e2);
  return j;
}

Json to_json(const SeparationReport& r) {
  return {{"passed", r.passed},
          {"min_distance", r.min_distance},
          {"min_distance_sq_in_delta2", r.min_distance_sq_in_delta2},
          {"min_e2_gap", to_json(r.min_e2_gap)},
          {"separation_ok", r.separation_ok},
          {"projection_ok", r.projection_ok},
          {"containment_ok", r.containment_ok},
          {"threshold_ok", r.threshold_ok},
          {"max_shadow_error", r.max_shadow_error},
          {"failures", r.failures}};
}

Json to_json(const GeometryReport& r) {
  return {{"passed", r.passed},
          {"square_count", r.square_count},
          {"type_counts", {{"I", r.type_counts[0]}, {"II", r.type_counts[1]}, {"III", r.type_counts[2]}}},
          {"boundary_count", r.boundary_count},
          {"generations", Json::array({r.min_generation, r.max_generation})},
          {"max_neighbor_side_ratio", r.max_neighbor_side_ratio},
          {"max_neighbor_count", r.max_neighbor_count},
          {"max_cover_count", r.max_cover_count},
          {"min_side_times_9_over_delta", r.min_side_times_9_over_delta},
          {"type12_ratio", Json::array({r.type12_ratio_min, r.type12_ratio_max})},
          {"cz3_ratio", Json::array({r.cz3_ratio_min, r.cz3_ratio_max})},
          {"type3_dist_ratio", Json::array({r.type3_dist_ratio_min, r.type3_dist_ratio_max})},
          {"anchor_ratio", Json::array({r.anchor_ratio_min, r.anchor_ratio_max})},
          {"min_boundary_side", r.min_boundary_side},
          {"failures", r.failures}};
}

Json to_json(const PouReport& r) {
  return {{"passed", r.passed},
          {"sample_count", r.sample_count},
          {"partition_defect", r.partition_defect},
          {"gradient_sum", r.gradient_sum},
          {"hessian_sum", r.hessian_sum},
          {"theta_range", Json::array({r.min_theta, r.max_theta})},
          {"bounds", Json::array({r.bound0, r.bound1, r.bound2})},
          {"max_contributions", r.max_contributions},
          {"support_violations", r.support_violations},
          {"failures", r.failures}};
}

Json to_json(const ClusterSeparationReport& r) {
  return {{"passed", r.passed},
          {"members_inside", r.members_inside},
          {"ball_nesting", r.ball_nesting},
          {"ball_disjoint", r.ball_disjoint},
          {"hat_nesting", r.hat_nesting},
          {"hat_disjoint", r.hat_disjoint},
          {"min_ball_gap", number_or_null(r.min_ball_gap)},
          {"min_hat_gap", number_or_null(r.min_hat_gap)},
          {"min_ball_nesting_margin", number_or_null(r.min_ball_nesting_margin)},
          {"min_hat_nesting_margin", number_or_null(r.min_hat_nesting_margin)},
          {"hat_threshold_inv_eps", r.hat_threshold_inv_eps},
          {"failures", r.failures}};
}

Json to_json(const AffinePolynomial& a) { return Json::array({a.a0, a.a1, a.a2}); }

Json to_json(const TreeSolution& s) {
  return {{"objective", s.objective},
          {"kkt_residual", s.kkt_residual},
          {"iterations", s.iterations},
          {"values", s.values}};
}

Json to_json(const SeminormEstimate& s) {
  return {{"value", s.value},
          {"integral", s.integral},
          {"refined_value", s.config.estimate_error ? Json(s.refined_value) : Json(nullptr)},
          {"refinement_error", s.config.estimate_error ? Json(s.refinement_error) : Json(nullptr)},
          {"within_tolerance", s.within_tolerance},
          {"subcells", s.config.subcells},
          {"nodes", s.config.nodes},
          {"cells", s.cells}};
}

Json to_json(const AnalyticTestFunction& g) {
  Json bumps = Json::array();
  for (const RadialBump& b : g.bumps)
    bumps.push_back({{"center", Json::array({b.center.x(), b.center.y()})},
                     {"radius", b.radius},
                     {"amplitude", b.amplitude}});
  return {{"affine", to_json(g.affine)}, {"bumps", std::move(bumps)}};
}

Json decomposition_json(const CzDecomposition& decomp, bool with_squares) {
  Json j;
  j["inv_eps"] = decomp.set().inv_eps();
  j["depth"] = decomp.set().depth();
  j["square_count"] = decomp.size();
  if (!with_squares) return j;
  Json squares = Json::array();
  for (std::size_t q = 0; q < decomp.size(); ++q) {
    const DyadicSquare& s = decomp.square(q);
    const Anchors& a = decomp.anchors(q);
    Json sq{{"generation", s.generation},
            {"i", s.i},
            {"j", s.j},
            {"type", type_name(decomp.type(q))},
            {"boundary", decomp.is_boundary(q)},
            {"anchors", Json::array({a.z, a.w})}};
    if (auto x = decomp.x_point(q)) sq["x_point"] = *x;
    if (auto e = decomp.e1_point(q)) sq["e1_point"] = *e;
    const auto nb = decomp.neighbors(q);
    sq["neighbors"] = std::vector<std::uint32_t>(nb.begin(), nb.end());
    squares.push_back(std::move(sq));
  }
  j["anchor_denominator"] = decomp.set().denom();
  j["squares"] = std::move(squares);
  return j;
}

Json cluster_tree_json(const ClusterTree& tree, const std::vector<std::uint32_t>& assignment) {
  Json j;
  const FractalSet& set = tree.set();
  j["depth"] = tree.depth();
  j["ball_scale"] = to_json(tree.config().ball_scale);
  j["m"] = tree.config().m;
  Json nodes = Json::array();
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const Cluster& c = tree.node(id);
    Json n{{"id", id},
           {"depth", c.depth},
           {"prefix", c.prefix},
           {"center", to_json(Fraction{c.center_numerator, set.denom()})},
           {"members", Json::array({c.first, c.last})}};
    if (c.depth < tree.depth()) n["radius"] = to_json(tree.radius_exact(c.depth));
    nodes.push_back(std::move(n));
  }
  j["clusters"] = std::move(nodes);
  j["separation"] = to_json(tree.report());
  std::vector<std::size_t> per_depth(static_cast<std::size_t>(tree.depth()) + 1, 0);
  for (std::uint32_t c : assignment) ++per_depth[static_cast<std::size_t>(tree.node(c).depth)];
  j["squares_per_depth"] = per_depth;
  j["assignment"] = assignment;
  return j;
}

Json extension_json(const Extension& ext) {
  Json j;
  j["tail"] = to_json(ext.tail());
  j["margin"] = ext.bump_spec().margin;
  Json pieces = Json::array();
  const CzDecomposition& d = ext.decomposition();
  for (std::size_t q = 0; q < d.size(); ++q) {
    const Piece& pc = ext.piece(q);
    const DyadicSquare& s = d.square(q);
    pieces.push_back({{"square", Json::array({s.generation, s.i, s.j})},
                      {"L", Json::array({pc.L.a0, pc.L.a1})},
                      {"eta", pc.eta},
                      {"cluster", pc.cluster}});
  }
  j["pieces"] = std::move(pieces);
  return j;
}

std::vector<double> read_data(const Json& j, const FractalSet& set) {
  std::vector<double> f(set.size(), std::numeric_limits<double>::quiet_NaN());
  try {
    if (j.is_object() && j.contains("values")) {
      const auto& v = j.at("values");
      if (!v.is_array() || v.size() != set.size())
        throw ConfigError("data 'values' must list one number per point of E (" +
                          std::to_string(set.size()) + ")");
      for (std::size_t k = 0; k < v.size(); ++k) f[k] = v[k].get<double>();
    } else if (j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        std::size_t pos = 0;
        const unsigned long long g = std::stoull(key, &pos);
        if (pos != key.size() || g >= set.size())
          throw ConfigError("data key '" + key + "' is not a point index");
        f[g] = value.get<double>();
      }
    } else {
      throw ConfigError("data must be a JSON object");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad data JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("data keys must be point indices");
  }
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!std::isfinite(f[k])) throw ConfigError("no finite value for point " + std::to_string(k));
  return f;
}

Json data_json(const std::vector<double>& f) { return {{"values", f}}; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string grid_csv(const GridFunction& g) {
  std::ostringstream os;
  os << "x,y,value,constrained\n";
  for (std::int64_t j = 0; j < g.n; ++j)
    for (std::int64_t i = 0; i < g.n; ++i) {
      const Vec2 x = g.node(i, j);
      const std::int64_t k = i + g.n * j;
      os << format_double(x.x()) << ',' << format_double(x.y()) << ','
         << format_double(g.values[k]) << ',' << int(g.constrained[static_cast<std::size_t>(k)]) << '\n';
    }
  return os.str();
}

std::string sample_csv(const Extension& ext, int n, double lo, double hi) {
  if (n < 2) throw ConfigError("sample grid needs at least 2 points per axis");
  std::ostringstream os;
  os << "x,y,F\n";
  const double step = (hi - lo) / (n - 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x(lo + i * step, lo + j * step);
      os << format_double(x.x()) << ',' << format_double(x.y()) << ','
         << format_double(ext.evaluate(x, 0).value) << '\n';
    }
  return os.str();
}

std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!(s.y[k] > 0.0) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, std::log10(s.y[k]));
      y1 = std::max(y1, std::log10(s.y[k]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e)
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e
       << "</text>\n";
  for (double x = std::ceil(x0); x <= x1; x += 1.0)
    os << "<text x=\"" << px(x) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << x
       << "</text>\n";
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % std::size(colors)];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.y[i] > 0.0 && std::isfinite(s.y[i])) pts << px(s.x[i]) << ',' << py(std::log10(s.y[i])) << ' ';
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"" << pts.str()
       << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.y[i] > 0.0 && std::isfinite(s.y[i]))
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(std::log10(s.y[i])) << "\" r=\"3\" fill=\""
           << c << "\"/>\n";
    const double ly = mt + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 30 << "\" y2=\""
       << ly << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - mr + 36 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace whitney
