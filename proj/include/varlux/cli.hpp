#pragma once
// Subcommand dispatch: parse a config, run one computation, write report.json
// and CSV outputs.  Exit 0 on success, 2 on validation errors, 3 on numerical
// errors.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varlux/config.hpp"
#include "varlux/cover.hpp"
#include "varlux/errors.hpp"
#include "varlux/exponent.hpp"
#include "varlux/expr.hpp"
#include "varlux/grid.hpp"
#include "varlux/io.hpp"
#include "varlux/maximal.hpp"
#include "varlux/norm.hpp"
#include "varlux/parallel.hpp"
#include "varlux/rho.hpp"
#include "varlux/verify.hpp"
#include "varlux/version.hpp"
#include "varlux/weights.hpp"

namespace varlux::cli {

inline OperatorTag parse_operator(const std::string& name, double theta) {
  if (name == "M") return {OperatorKind::hl, 0.0};
  if (name == "Mloc") return {OperatorKind::local, 0.0};
  if (name == "Mtheta") return {OperatorKind::theta, theta};
  throw invalid_input("config: unknown operator '" + name + "' (expected M, Mloc, Mtheta)");
}

namespace detail {

inline GridFunction require_fn(const std::optional<Expr>& e, const Domain& d, const char* key) {
  if (!e) throw invalid_input(std::string("config: missing required key '") + key + "'");
  return sample(*e, d);
}

inline VariableExponent build_p(const RunConfig& rc) {
  return make_exponent(require_fn(rc.p_expr, rc.domain, "functions.p"));
}

inline GridFunction build_w(const RunConfig& rc) {
  if (!rc.w_expr) return constant_grid_function(rc.domain, 1.0);
  return sample(*rc.w_expr, rc.domain);
}

inline RhoFunction build_rho(const RunConfig& rc) {
  if (!rc.rho_expr) return constant_rho(rc.domain, 1.0);
  return make_rho(sample(*rc.rho_expr, rc.domain));
}

inline std::vector<double> thetas_of(const RunConfig& rc) {
  return rc.thetas.empty() ? std::vector<double>{0.0, 0.5, 1.0, 2.0} : rc.thetas;
}

inline std::string join(const std::string& dir, const char* name) { return dir + "/" + name; }

}  // namespace detail

inline ordered_json envelope(const std::string& sub, const ConfigMap& cfg, const RunConfig& rc) {
  ordered_json j;
  j["subcommand"] = sub;
  j["version"] = kVersion;
  j["config_hash"] = hex64(fnv1a64(cfg.raw));
  j["seed"] = rc.seed;
  j["timestamp"] = utc_timestamp();
  j["domain"] = domain_to_json(rc.domain);
  j["radii"] = rc.radii;
  j["sweep"] = ordered_json{{"stride", rc.sweep_stride}, {"interior_only", rc.interior_only}};
  return j;
}

inline ordered_json run_norm(const RunConfig& rc) {
  const GridFunction f = detail::require_fn(rc.f_expr, rc.domain, "functions.f");
  const VariableExponent p = detail::build_p(rc);
  const NormResult nr = luxemburg_norm(f, p);
  ordered_json res;
  res["luxemburg_norm"] = nr.value;
  res["iterations"] = nr.iterations;
  res["bracket"] = ordered_json::array({nr.bracket_lo, nr.bracket_hi});
  if (nr.value > 0.0) {
    res["modular_at_norm"] = modular(f, p, nr.value);
    const DualityReport dr = duality_lower_witness(f, p, 16, rc.seed);
    res["duality"] = ordered_json{{"best", dr.best}, {"canonical", dr.canonical}};
  }
  if (rc.w_expr) res["weighted_norm"] = weighted_norm(f, p, detail::build_w(rc));
  if (p.p_minus != p.p_plus) {
    const LogHolderReport lh = log_holder_constants(p);
    res["log_holder"] = ordered_json{
        {"c_local", lh.c_local}, {"c_infty", lh.c_infty}, {"p_infty", lh.p_infty}};
  }
  write_csv_grid(detail::join(rc.out_dir, "f.csv"), f);
  return res;
}

inline ordered_json run_maximal(const RunConfig& rc) {
  const GridFunction f = detail::require_fn(rc.f_expr, rc.domain, "functions.f");
  const RhoFunction rho = detail::build_rho(rc);
  const RadiusGrid radii = make_radius_grid(rc.radii);
  const OperatorTag tag = parse_operator(rc.operator_name, rc.theta);
  const GridFunction g = apply_operator(tag, f, rho, radii, rc.mode);
  const auto it = std::max_element(g.values.begin(), g.values.end());
  ordered_json res;
  res["operator"] = operator_tag_name(tag);
  res["max"] = *it;
  res["argmax_cell"] = static_cast<Index>(it - g.values.begin());
  write_csv_grid(detail::join(rc.out_dir, "f.csv"), f);
  write_csv_grid(detail::join(rc.out_dir, "maximal.csv"), g);
  return res;
}

inline ordered_json run_rho(const RunConfig& rc) {
  ordered_json res;
  RhoFunction rho;
  if (rc.v_expr) {
    const GridFunction V = sample(*rc.v_expr, rc.domain);
    const PotentialRho pr = rho_from_potential(V, make_radius_grid(rc.radii));
    rho = pr.rho;
    res["from_potential"] = true;
    res["clamped_count"] = pr.clamped_count;
    write_csv_grid(detail::join(rc.out_dir, "V.csv"), V);
  } else {
    rho = detail::build_rho(rc);
    if (!rc.rho_expr)
      throw invalid_input("config: rho subcommand needs functions.rho or functions.V");
    res["from_potential"] = false;
  }
  const RhoConstants rk = verify_critical(rho);
  res["c_rho"] = rk.c_rho;
  res["n0"] = rk.n0;
  res["worst_pair"] = ordered_json::array({rk.worst_pair[0], rk.worst_pair[1]});
  write_csv_grid(detail::join(rc.out_dir, "rho.csv"), rho.values);
  return res;
}

inline ordered_json run_cover(const RunConfig& rc) {
  if (!rc.rho_expr) throw invalid_input("config: cover needs functions.rho");
  const RhoFunction rho = make_rho(sample(*rc.rho_expr, rc.domain));
  ordered_json res;

  const BallFamily crit = critical_covering(rho);
  const OverlapReport crit_audit = overlap_audit(crit, rc.beta, rc.domain);
  res["critical"] = ordered_json{{"count", static_cast<Index>(crit.balls.size())},
                                 {"max_overlap", crit_audit.max_overlap},
                                 {"fitted_n1", crit_audit.fitted_n1},
                                 {"covered", crit_audit.covered}};
  write_csv_balls(detail::join(rc.out_dir, "cover_critical.csv"), crit, rc.domain.dim);

  if (rc.has_x0 && rc.r0 > 0.0) {
    const SubcriticalCovering sub = subcritical_covering(Ball{rc.x0, rc.r0}, rho, rc.beta);
    const OverlapReport sub_audit = overlap_audit(sub.family, rc.beta, rc.domain);
    res["subcritical"] = ordered_json{{"count", static_cast<Index>(sub.family.balls.size())},
                                      {"delta0", sub.delta0},
                                      {"count_bound", sub.count_bound},
                                      {"max_overlap", sub_audit.max_overlap},
                                      {"fitted_n1", sub_audit.fitted_n1},
                                      {"covered", sub_audit.covered}};
    write_csv_balls(detail::join(rc.out_dir, "cover_subcritical.csv"), sub.family,
                    rc.domain.dim);
  }
  return res;
}

inline ordered_json run_weight_class(const RunConfig& rc) {
  const VariableExponent p = detail::build_p(rc);
  const GridFunction w = detail::require_fn(rc.w_expr, rc.domain, "functions.w");
  const RhoFunction rho = detail::build_rho(rc);
  const RadiusGrid radii = make_radius_grid(rc.radii);
  const BallFamily fam = sweep_balls(rc.domain, rc.sweep_stride, radii, rc.interior_only);

  BallFamily refined;
  const BallFamily* refined_ptr = nullptr;
  if (rc.sweep_stride > 1) {
    refined = sweep_balls(rc.domain, std::max<Index>(1, rc.sweep_stride / 2), radii,
                          rc.interior_only);
    refined_ptr = &refined;
  }
  const ClassReport rep =
      weight_class_report(w, p, rho, detail::thetas_of(rc), fam, kThetaStarCapFactor, refined_ptr);

  ordered_json res;
  res["ap_constant"] = rep.ap.value;
  res["ap_witness"] = ball_to_json(rep.ap.witness, rc.domain.dim);
  res["ap_local_constant"] = rep.ap_local.value;
  res["ap_local_witness"] = ball_to_json(rep.ap_local.witness, rc.domain.dim);
  res["theta_profile"] = theta_profile_to_json(rep.theta_profile, rc.domain.dim);
  res["sweep_balls"] = static_cast<Index>(fam.balls.size());

  BallFamily witnesses;
  witnesses.provenance = FamilyTag::user;
  witnesses.balls = {rep.ap.witness, rep.ap_local.witness};
  for (const auto& e : rep.theta_profile.entries) witnesses.balls.push_back(e.witness);
  write_csv_balls(detail::join(rc.out_dir, "witness_balls.csv"), witnesses, rc.domain.dim);
  return res;
}

inline ordered_json run_verify(const RunConfig& rc) {
  const VariableExponent p = detail::build_p(rc);
  const GridFunction w = detail::build_w(rc);
  const RhoFunction rho = detail::build_rho(rc);
  const RadiusGrid radii = make_radius_grid(rc.radii);
  const OperatorTag tag = parse_operator(rc.operator_name, rc.theta);

  const auto fam = make_default_test_family(rc.domain, w, radii, rc.seed);
  ExperimentReport rep = boundedness_ratios(tag, fam, p, w, rho, radii, rc.mode);

  const BallFamily sweep = sweep_balls(rc.domain, rc.sweep_stride, radii, rc.interior_only);
  rep.class_constants = weight_class_report(w, p, rho, detail::thetas_of(rc), sweep);

  rep.refinement_trend.push_back(rep.max_ratio);
  for (int factor : {2, 4}) {
    const Domain fine =
        build_domain(rc.domain.dim, rc.domain.half_width, rc.domain.cells_per_axis * factor);
    RunConfig frc = rc;
    frc.domain = fine;
    const VariableExponent fp = detail::build_p(frc);
    const GridFunction fw = detail::build_w(frc);
    const RhoFunction frho = detail::build_rho(frc);
    const auto ffam = make_default_test_family(fine, fw, radii, rc.seed);
    rep.refinement_trend.push_back(
        boundedness_ratios(tag, ffam, fp, fw, frho, radii, rc.mode).max_ratio);
  }

  ordered_json res = experiment_report_to_json(rep, rc.domain.dim);
  if (rc.eta > 0.0) {
    const RhoConstants fitted = verify_critical(rho);
    const NecessityReport nb =
        necessity_bound(tag, p, w, rho, rc.eta, sweep, radii, fitted, rc.mode);
    res["necessity"] = ordered_json{{"eta", nb.eta},
                                    {"theta", nb.theta},
                                    {"max_class_quotient", nb.max_class_quotient},
                                    {"max_operator_ratio", nb.max_operator_ratio},
                                    {"bound", nb.bound},
                                    {"holds", nb.holds}};
  }
  write_csv_ratios(detail::join(rc.out_dir, "ratios.csv"), rep.ratios);
  return res;
}

inline ordered_json run_schrodinger(const RunConfig& rc) {
  if (!rc.v_expr) throw invalid_input("config: schrodinger needs functions.V");
  const GridFunction V = sample(*rc.v_expr, rc.domain);
  const VariableExponent p = detail::build_p(rc);
  const GridFunction w = detail::build_w(rc);
  const RadiusGrid radii = make_radius_grid(rc.radii);

  const SchrodingerReport rep =
      schrodinger_experiment(V, rc.q, p, w, radii, rc.theta, rc.seed);
  ordered_json res;
  res["rh_constant"] = rep.rh_constant;
  res["rh_exponent"] = rep.rh_exponent;
  res["clamped_count"] = rep.rho.clamped_count;
  res["c_rho"] = rep.rho_constants.c_rho;
  res["n0"] = rep.rho_constants.n0;
  res["local"] = experiment_report_to_json(rep.local_report, rc.domain.dim);
  res["theta"] = experiment_report_to_json(rep.theta_report, rc.domain.dim);
  write_csv_grid(detail::join(rc.out_dir, "rho_V.csv"), rep.rho.rho.values);
  write_csv_grid(detail::join(rc.out_dir, "V.csv"), V);
  write_csv_ratios(detail::join(rc.out_dir, "ratios_local.csv"), rep.local_report.ratios);
  write_csv_ratios(detail::join(rc.out_dir, "ratios_theta.csv"), rep.theta_report.ratios);
  return res;
}

inline int run_config(const std::string& sub, const std::string& config_path,
                      const std::string& out_override, int threads) {
  try {
    if (threads > 0) set_thread_cap(threads);
    const ConfigMap cfg = parse_config_file(config_path);
    RunConfig rc = decode_run_config(cfg);
    if (!out_override.empty()) rc.out_dir = out_override;

    ordered_json report = envelope(sub, cfg, rc);
    if (sub == "norm")
      report["results"] = run_norm(rc);
    else if (sub == "maximal")
      report["results"] = run_maximal(rc);
    else if (sub == "rho")
      report["results"] = run_rho(rc);
    else if (sub == "cover")
      report["results"] = run_cover(rc);
    else if (sub == "weight-class")
      report["results"] = run_weight_class(rc);
    else if (sub == "verify")
      report["results"] = run_verify(rc);
    else if (sub == "schrodinger")
      report["results"] = run_schrodinger(rc);
    else
      throw invalid_input("unknown subcommand: " + sub);
    write_json(rc.out_dir + "/report.json", report);
    return 0;
  } catch (const invalid_input& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"finite workbench for variable-exponent maximal operators"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  static const char* kSubs[] = {"norm",         "maximal", "rho",        "cover",
                                "weight-class", "verify",  "schrodinger"};
  static const char* kDescs[] = {"Luxemburg norm of a sampled function",
                                 "apply a maximal operator to a sampled function",
                                 "critical-radius constants (from rho or a potential)",
                                 "critical and sub-critical coverings",
                                 "weight-class constants over a ball sweep",
                                 "boundedness ratios and class constants",
                                 "reverse Holder / rho_V / boundedness pipeline"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 7; ++i) {
    CLI::App* s = app.add_subcommand(kSubs[i], kDescs[i]);
    s->add_option("--config", config_path, "path to the run config")
        ->required()
        ->check(CLI::ExistingFile);
    s->add_option("--threads", threads, "cap on worker threads");
    s->add_option("--out", out_dir, "output directory (overrides the config)");
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) return run_config(kSubs[i], config_path, out_dir, threads);
  return 2;
}

}  // namespace varlux::cli
