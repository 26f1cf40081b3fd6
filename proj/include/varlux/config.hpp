#pragma once
// Flat INI config: [section] headers, key = value lines, '#' or ';' comments.
// Keys are exposed as "section.key"; values stay strings until a typed getter
// pulls them.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varlux/errors.hpp"
#include "varlux/expr.hpp"
#include "varlux/grid.hpp"

namespace varlux {

struct ConfigMap {
  std::map<std::string, std::string> entries;
  std::string raw;  // exact file bytes, hashed into reports

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) throw invalid_input("config: missing required key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second;
  }

  double get_real(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw invalid_input("config: key '" + key + "' is not a number: '" + s + "'");
    }
  }

  double get_real_or(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
  }

  std::int64_t get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw invalid_input("config: key '" + key + "' is not an integer: '" + s + "'");
    }
  }

  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = get(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw invalid_input("config: key '" + key + "' is not a boolean: '" + s + "'");
  }

  std::vector<double> get_real_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw invalid_input("config: key '" + key + "' has an empty list entry");
      item = item.substr(b, e - b + 1);
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw invalid_input("config: key '" + key + "' has a non-numeric entry: '" + item + "'");
      }
    }
    if (out.empty()) throw invalid_input("config: key '" + key + "' is an empty list");
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  cfg.raw = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw invalid_input("config:" + std::to_string(lineno) + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw invalid_input("config:" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input("config:" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw invalid_input("config:" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw invalid_input("config:" + std::to_string(lineno) + ": key '" + key +
                          "' appears before any [section]");
    const std::string full = section + "." + key;
    if (cfg.entries.count(full))
      throw invalid_input("config:" + std::to_string(lineno) + ": duplicate key '" + full + "'");
    cfg.entries[full] = value;
  }
  return cfg;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("config: cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// Everything a run needs, decoded and validated from a ConfigMap.
struct RunConfig {
  Domain domain;
  std::optional<Expr> p_expr, w_expr, rho_expr, v_expr, f_expr;
  std::vector<double> radii;
  Index sweep_stride = 1;
  bool interior_only = true;
  std::vector<double> thetas;
  double theta = 1.0;
  double eta = 0.0;
  double q = 2.0;
  double beta = 2.0;
  std::uint64_t seed = 20240901;
  std::string operator_name = "Mloc";
  MeasureMode mode = MeasureMode::clipped;
  Point x0{0.0, 0.0, 0.0};
  bool has_x0 = false;
  double r0 = 0.0;
  std::string out_dir = "out";
};

inline RunConfig decode_run_config(const ConfigMap& cfg) {
  RunConfig rc;
  rc.domain = build_domain(static_cast<int>(cfg.get_int("domain.dim")),
                           cfg.get_real("domain.L"), cfg.get_int("domain.n"));

  auto expr_of = [&](const char* key) -> std::optional<Expr> {
    if (!cfg.has(key)) return std::nullopt;
    return parse(cfg.get(key));
  };
  rc.p_expr = expr_of("functions.p");
  rc.w_expr = expr_of("functions.w");
  rc.rho_expr = expr_of("functions.rho");
  rc.v_expr = expr_of("functions.V");
  rc.f_expr = expr_of("functions.f");

  if (cfg.has("radii.list")) {
    rc.radii = cfg.get_real_list("radii.list");
  } else {
    const Index count = cfg.get_int_or("radii.count", 24);
    if (count < 1) throw invalid_input("config: radii.count must be >= 1");
    const double h = rc.domain.spacing();
    const double r_min = cfg.get_real_or("radii.r_min", h);
    const double r_max = cfg.get_real_or("radii.r_max", 2.0 * rc.domain.half_width);
    rc.radii = make_log_radius_grid(r_min, r_max, static_cast<int>(count)).radii;
  }

  rc.sweep_stride = cfg.get_int_or("sweep.stride", 1);
  rc.interior_only = cfg.get_bool_or("sweep.interior_only", true);

  if (cfg.has("params.thetas")) rc.thetas = cfg.get_real_list("params.thetas");
  rc.theta = cfg.get_real_or("params.theta", 1.0);
  rc.eta = cfg.get_real_or("params.eta", 0.0);
  rc.q = cfg.get_real_or("params.q", 2.0);
  rc.beta = cfg.get_real_or("params.beta", 2.0);
  rc.seed = static_cast<std::uint64_t>(cfg.get_int_or("params.seed", 20240901));
  rc.operator_name = cfg.get_or("params.operator", "Mloc");
  const std::string mode = cfg.get_or("params.measure", "clipped");
  if (mode == "clipped")
    rc.mode = MeasureMode::clipped;
  else if (mode == "full")
    rc.mode = MeasureMode::full;
  else
    throw invalid_input("config: params.measure must be 'clipped' or 'full', got '" + mode + "'");
  if (cfg.has("params.x0")) {
    const auto v = cfg.get_real_list("params.x0");
    if (static_cast<int>(v.size()) != rc.domain.dim)
      throw invalid_input("config: params.x0 needs one coordinate per dimension");
    for (std::size_t k = 0; k < v.size(); ++k) rc.x0[k] = v[k];
    rc.has_x0 = true;
  }
  rc.r0 = cfg.get_real_or("params.r0", 0.0);
  rc.out_dir = cfg.get_or("output.dir", "out");
  return rc;
}

}  // namespace varlux
