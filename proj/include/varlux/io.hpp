#pragma once
// Report serialization: CSV grids at 17 significant digits, JSON envelopes,
// and the config hash stamped into every report.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"
#include "varlux/verify.hpp"
#include "varlux/weights.hpp"

namespace varlux {

using ordered_json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);  // binary: byte-identical across platforms
  if (!out) throw invalid_input("io: cannot open for writing: " + path);
  return out;
}

}  // namespace detail

// Header row, then one row per cell in row-major order.
inline void write_csv_grid(const std::string& path, const GridFunction& f) {
  auto out = detail::open_out(path);
  const Domain& d = f.domain;
  out << "cell";
  for (int k = 0; k < d.dim; ++k) out << ",x" << (k + 1);
  out << ",value\n";
  for (Index i = 0; i < d.cell_count(); ++i) {
    const Point x = d.cell_center(i);
    out << i;
    for (int k = 0; k < d.dim; ++k) out << ',' << detail::fmt17(x[k]);
    out << ',' << detail::fmt17(f.values[i]) << '\n';
  }
  if (!out) throw invalid_input("io: write failed: " + path);
}

inline void write_csv_balls(const std::string& path, const BallFamily& fam, int dim) {
  auto out = detail::open_out(path);
  out << "index";
  for (int k = 0; k < dim; ++k) out << ",center" << (k + 1);
  out << ",radius\n";
  for (std::size_t i = 0; i < fam.balls.size(); ++i) {
    out << i;
    for (int k = 0; k < dim; ++k) out << ',' << detail::fmt17(fam.balls[i].center[k]);
    out << ',' << detail::fmt17(fam.balls[i].radius) << '\n';
  }
  if (!out) throw invalid_input("io: write failed: " + path);
}

inline void write_csv_ratios(const std::string& path, const std::vector<RatioEntry>& ratios) {
  auto out = detail::open_out(path);
  out << "id,ratio\n";
  for (const auto& r : ratios) out << r.id << ',' << detail::fmt17(r.ratio) << '\n';
  if (!out) throw invalid_input("io: write failed: " + path);
}

inline ordered_json domain_to_json(const Domain& d) {
  return ordered_json{{"dim", d.dim}, {"L", d.half_width}, {"n", d.cells_per_axis}};
}

inline ordered_json ball_to_json(const Ball& b, int dim) {
  ordered_json c = ordered_json::array();
  for (int k = 0; k < dim; ++k) c.push_back(b.center[k]);
  return ordered_json{{"center", c}, {"radius", b.radius}};
}

inline ordered_json ap_result_to_json(const ApResult& r, int dim) {
  return ordered_json{{"value", r.value},
                      {"witness_index", r.witness_index},
                      {"witness", ball_to_json(r.witness, dim)}};
}

inline ordered_json theta_profile_to_json(const ThetaProfile& pr, int dim) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : pr.entries)
    entries.push_back(ordered_json{{"theta", e.theta},
                                   {"sup_quotient", e.sup_quotient},
                                   {"witness", ball_to_json(e.witness, dim)}});
  return ordered_json{{"entries", entries},
                      {"theta_star_found", pr.theta_star_found},
                      {"theta_star", pr.theta_star},
                      {"cap", pr.cap}};
}

inline ordered_json class_report_to_json(const ClassReport& r, int dim) {
  return ordered_json{{"ap_constant", ap_result_to_json(r.ap, dim)},
                      {"ap_local_constant", ap_result_to_json(r.ap_local, dim)},
                      {"theta_profile", theta_profile_to_json(r.theta_profile, dim)}};
}

inline ordered_json experiment_report_to_json(const ExperimentReport& r, int dim) {
  ordered_json ratios = ordered_json::array();
  for (const auto& e : r.ratios) ratios.push_back(ordered_json{{"id", e.id}, {"ratio", e.ratio}});
  ordered_json j{{"operator", r.operator_tag},
                 {"ratios", ratios},
                 {"max_ratio", r.max_ratio},
                 {"skipped", r.skipped}};
  if (r.class_constants) j["class_constants"] = class_report_to_json(*r.class_constants, dim);
  if (!r.refinement_trend.empty()) j["refinement_trend"] = r.refinement_trend;
  return j;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_json(const std::string& path, const ordered_json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw invalid_input("io: write failed: " + path);
}

}  // namespace varlux
