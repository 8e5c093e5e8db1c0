// fwas: analyze polytopes, run Frank-Wolfe with away steps, reproduce the
// reference experiments and run the built-in consistency suites.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fwas/fwas.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string vec_str(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fwas::format_double(v(i));
  return s + ")";
}

std::vector<Eigen::Index> parse_index_list(const std::string& text, Eigen::Index n) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long v = -1;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || v < 0 || v >= n)
      throw fwas::ParseError("--zface: bad atom index '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw fwas::ParseError("--zface: empty index list");
  return out;
}

// Accepts plain numbers and multiples of pi such as "pi/100" or "2pi/3".
double parse_param_value(const std::string& text) {
  const auto at = text.find("pi");
  if (at == std::string::npos) return fwas::detail::parse_number(text, "--param");
  const std::string head = text.substr(0, at), tail = text.substr(at + 2);
  double v = fwas::instances::kPi;
  if (!head.empty()) v *= fwas::detail::parse_number(head, "--param");
  if (!tail.empty()) {
    if (tail.front() != '/') throw fwas::ParseError("--param: cannot read '" + text + "'");
    v /= fwas::detail::parse_number(tail.substr(1), "--param");
  }
  return v;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const fwas::ParseError*>(&e)) return 2;
  if (dynamic_cast<const fwas::InstanceTooLarge*>(&e)) return 3;
  if (dynamic_cast<const fwas::DegenerateInstance*>(&e)) return 4;
  if (dynamic_cast<const fwas::DimensionMismatch*>(&e)) return 5;
  if (dynamic_cast<const fwas::ConfigurationError*>(&e)) return 6;
  if (dynamic_cast<const fwas::InvalidArgument*>(&e)) return 2;
  return 1;
}

struct AnalyzeOptions {
  std::string atoms;
  std::string zface;
  std::string json_out;
  bool no_table = false;
};

int cmd_analyze(const AnalyzeOptions& o) {
  const fwas::AtomMatrix A = fwas::read_atoms(o.atoms);
  const auto table = fwas::face_distance_table(A);
  std::vector<std::size_t> all(table.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  const fwas::PhiReport phi = fwas::detail::min_face_entry(A, table, all);
  const double diam = fwas::diameter(A);

  std::cout << "atoms: " << A.size() << " in dimension " << A.dim() << "\n";
  std::cout << "diameter: " << fwas::format_double(diam) << "\n";
  std::cout << "facial distance: " << fwas::format_double(phi.value) << "\n";
  std::cout << "minimizing face: " << fwas::format_index_set(phi.minimizing_face.atom_indices) << "\n";
  std::cout << "witness in the other atoms' hull: " << vec_str(phi.witness.u) << "\n";
  std::cout << "witness in the face: " << vec_str(phi.witness.v) << "\n";

  json report = {{"atoms", A.size()}, {"dim", A.dim()}, {"diameter", diam},
                 {"facial_distance", fwas::phi_report_json("facial_distance", phi)}};
  json faces = json::array();
  if (!o.no_table) std::cout << "faces (" << table.size() << "):\n";
  for (const auto& e : table) {
    if (!o.no_table)
      std::cout << "  " << fwas::format_index_set(e.face.atom_indices) << "  " << fwas::format_double(e.distance.distance)
                << "\n";
    faces.push_back({{"atoms", e.face.atom_indices}, {"distance", e.distance.distance}});
  }
  report["faces"] = faces;

  if (!o.zface.empty()) {
    std::vector<fwas::SimplexPoint> Z;
    json zidx = json::array();
    for (auto j : parse_index_list(o.zface, A.size())) {
      Z.push_back(fwas::SimplexPoint::vertex(A.size(), j));
      zidx.push_back(j);
    }
    const fwas::PhiReport local = fwas::local_phi_lower_bound(A, Z);
    std::cout << "localized lower bound: " << fwas::format_double(local.value) << " (face "
              << fwas::format_index_set(local.minimizing_face.atom_indices) << ")\n";
    report["localized_lower_bound"] = fwas::phi_report_json("localized_lower_bound", local);
    report["localized_lower_bound"]["z_atoms"] = zidx;
  }
  if (!o.json_out.empty()) fwas::write_file_atomic(o.json_out, report.dump(2) + "\n");
  return 0;
}

struct SolveOptions {
  std::string atoms;
  std::string objective;
  Eigen::Index x0 = 0;
  double gap_tol = 1e-12;
  int max_iter = 100000;
  std::string rule = "auto";
  std::string rate;
  std::string out = "solve-out";
};

fwas::StepRule parse_rule(const std::string& s) {
  if (s == "auto") return fwas::StepRule::automatic;
  if (s == "lipschitz") return fwas::StepRule::lipschitz;
  if (s == "exact") return fwas::StepRule::exact_quadratic;
  if (s == "composite") return fwas::StepRule::composite;
  throw fwas::ParseError("--rule: unknown step rule '" + s + "'");
}

// Rate constant for the chosen bound, evaluated at a long presolve's optimum.
fwas::RateBound rate_for(const std::string& which, const fwas::AtomMatrix& A, const fwas::Objective& obj,
                         const fwas::OptimalValue& opt, json& info) {
  if (which == "generic") {
    const auto* q = std::get_if<fwas::Quadratic>(&obj);
    if (!q) throw fwas::ConfigurationError("--rate generic needs a quadratic objective");
    const auto g = fwas::generic_rate_at_optimum(A, *q, opt);
    info["local_phi_lower"] = g.local_phi;
    info["optimal_face"] = g.optimal_face;
    return g.rate;
  }
  fwas::ScaledData sd;
  double mu = 1.0, L = 1.0;
  if (which == "quadratic") {
    const auto* q = std::get_if<fwas::Quadratic>(&obj);
    if (!q) throw fwas::ConfigurationError("--rate quadratic needs a quadratic objective");
    sd = fwas::quadratic_scaled_data(A, *q, opt.u);
  } else if (which == "composite") {
    const auto* c = std::get_if<fwas::Composite>(&obj);
    if (!c) throw fwas::ConfigurationError("--rate composite needs a composite objective");
    sd = fwas::composite_scaled_data(A, *c, opt.u);
    mu = c->mu;
    L = c->L;
  } else {
    throw fwas::ParseError("--rate: unknown bound '" + which + "'");
  }
  const auto b = fwas::bar_phi_bounds(sd.Abar, sd.g);
  info["bar_phi_lower"] = b.lower;
  info["bar_phi_upper"] = b.upper;
  if (!(b.lower > 0.0) || !(sd.diam_scaled > 0.0))
    throw fwas::DegenerateInstance("scaled measure or scaled diameter vanishes; no rate available");
  return which == "quadratic" ? fwas::rate_bound_quadratic(b.lower, sd.diam_scaled)
                              : fwas::rate_bound_composite(mu, L, b.lower, sd.diam_scaled);
}

int cmd_solve(const SolveOptions& o) {
  const fwas::AtomMatrix A = fwas::read_atoms(o.atoms);
  const fwas::Objective obj = fwas::read_objective(o.objective);
  if (fwas::objective_dim(obj) != A.dim())
    throw fwas::DimensionMismatch("objective dimension " + std::to_string(fwas::objective_dim(obj)) +
                                  " differs from atom dimension " + std::to_string(A.dim()));
  if (o.x0 < 0 || o.x0 >= A.size()) throw fwas::InvalidArgument("--x0: atom index out of range");
  fwas::SolverConfig cfg;
  cfg.rule = parse_rule(o.rule);
  cfg.gap_tol = o.gap_tol;
  cfg.max_iter = o.max_iter;
  cfg.keep_iterates = false;
  const fwas::RunTrace tr = fwas::run(A, obj, fwas::SimplexPoint::vertex(A.size(), o.x0), cfg);

  const fs::path out(o.out);
  fwas::write_file_atomic(out / "trace.csv", fwas::trace_csv(tr));
  json cfg_json = fwas::solver_config_json(cfg);
  cfg_json["x0"] = o.x0;
  cfg_json["rate"] = o.rate;
  json manifest = fwas::run_manifest("solve", {{"atoms", o.atoms}, {"objective", o.objective}}, cfg_json,
                                     json::object());
  manifest["result"] = fwas::trace_summary_json(tr);
  fwas::write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "rule: " << fwas::to_string(tr.rule) << "\n";
  std::cout << "steps: " << tr.steps() << " (" << tr.stop_reason << ")\n";
  std::cout << "f: " << fwas::format_double(tr.final_f()) << "\n";
  std::cout << "fw gap: " << fwas::format_double(tr.records.back().fw_gap()) << "\n";
  std::cout << "u: " << vec_str(tr.final_u) << "\n";
  if (!tr.converged) std::cout << "note: iteration cap reached before the gap tolerance\n";

  if (o.rate.empty()) return 0;
  const fwas::OptimalValue opt = fwas::presolve(A, obj);
  json info = json::object();
  const fwas::RateBound rb = rate_for(o.rate, A, obj, opt, info);
  const double slack = (opt.f_best - opt.f_lower) + 1e-12 * std::max(1.0, std::abs(opt.f_best));
  const fwas::RateReport rep = fwas::verify_linear_rate(tr, rb.r, opt.f_lower, slack);
  const fwas::DropStepAudit audit = fwas::drop_step_audit(tr);
  json rate = {{"bound", o.rate},
               {"r", rb.r},
               {"raw", rb.raw},
               {"ingredients", rb.ingredients},
               {"f_star_lower", opt.f_lower},
               {"f_star_best", opt.f_best},
               {"slack", slack},
               {"passed", rep.passed},
               {"checked", rep.checked},
               {"first_violation", rep.first_violation},
               {"worst_excess", rep.worst_excess},
               {"drop_step_audit", {{"passed", audit.passed}, {"drop_steps", audit.drop_steps},
                                    {"steps", audit.steps}, {"message", audit.message}}},
               {"details", info}};
  fwas::write_file_atomic(out / "rate.json", rate.dump(2) + "\n");
  std::cout << "rate (" << o.rate << "): r = " << fwas::format_double(rb.r) << ", raw " << fwas::format_double(rb.raw)
            << "\n";
  std::cout << (rep.passed ? "PASS" : "FAIL") << " linear rate over " << rep.checked << " iterates";
  if (!rep.passed) std::cout << ", first violation at k = " << rep.first_violation;
  std::cout << "\n" << (audit.passed ? "PASS" : "FAIL") << " drop-step audit (" << audit.drop_steps << " drop steps)";
  if (!audit.passed) std::cout << ": " << audit.message;
  std::cout << "\n";
  return rep.passed && audit.passed ? 0 : 1;
}

struct ReproduceOptions {
  std::string id;
  std::vector<std::string> params;
  std::string out = "reproduce-out";
  bool no_plot = false;
};

int cmd_reproduce(const ReproduceOptions& o) {
  const auto& ids = fwas::experiment_ids();
  if (std::find(ids.begin(), ids.end(), o.id) == ids.end()) throw fwas::ParseError("unknown experiment id: " + o.id);
  fwas::ExperimentParams params;
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw fwas::ParseError("--param expects key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = parse_param_value(kv.substr(eq + 1));
  }
  const fwas::ExperimentResult res = fwas::reproduce(o.id, params);

  const fs::path out(o.out);
  json report = fwas::experiment_json(res);
  json seeds = json::object();
  if (res.params.count("seed")) seeds["seed"] = res.params.at("seed");
  report["manifest"] = fwas::run_manifest("reproduce " + o.id, json::object(), res.params, seeds);
  fwas::write_file_atomic(out / (o.id + ".json"), report.dump(2) + "\n");
  if (!res.rows.empty()) {
    fwas::write_file_atomic(out / (o.id + ".csv"), fwas::ratio_csv(res.rows));
    if (!o.no_plot) {
      const std::string title = res.plot_title.empty() ? o.id : res.plot_title;
      fwas::write_file_atomic(out / (o.id + ".svg"),
                              fwas::ratio_svg(res.rows, title, res.ratio_label, res.bound_label));
    }
  }
  if (res.trace) fwas::write_file_atomic(out / (o.id + "-trace.csv"), fwas::trace_csv(*res.trace));

  std::cout << "experiment: " << res.id << "\n";
  for (const auto& [k, v] : res.params) std::cout << "  " << k << " = " << fwas::format_double(v) << "\n";
  for (const auto& [k, v] : res.values) std::cout << "  " << k << ": " << fwas::format_double(v) << "\n";
  for (const auto& c : res.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  return res.passed() ? 0 : 1;
}

struct SelftestOptions {
  std::string suite;
  bool corrupt_pivot = false;
};

int cmd_selftest(const SelftestOptions& o) {
  if (o.corrupt_pivot) {
    // negative control: a pivot tolerance this large rejects legitimate pivots
    fwas::lp::SimplexOptions bad = fwas::lp::default_options();
    bad.pivot_tol = 0.5;
    fwas::lp::set_default_options(bad);
  }
  const auto results = fwas::run_selftest(o.suite);
  bool ok = true;
  double total = 0.0;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %-10s %5d checks %4d failures %8.3f s", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.checks, r.failures, r.seconds);
    std::cout << line;
    if (!r.passed) std::cout << "  first: " << r.first_failure;
    std::cout << "\n";
    ok = ok && r.passed;
    total += r.seconds;
  }
  char line[64];
  std::snprintf(line, sizeof line, "total %.3f s", total);
  std::cout << line << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polytope condition measures and Frank-Wolfe with away steps"};
  app.require_subcommand(1);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Facial distance, diameter and per-face distances of an atom file");
  analyze->add_option("atoms", ao.atoms, "Atom file (CSV or JSON)")->required();
  analyze->add_option("--zface", ao.zface, "Comma-separated atom indices; prints the localized lower bound");
  analyze->add_option("--json", ao.json_out, "Write the report as JSON to this path");
  analyze->add_flag("--no-table", ao.no_table, "Skip the per-face table");

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Run Frank-Wolfe with away steps and write the trace");
  solve->add_option("atoms", so.atoms, "Atom file (CSV or JSON)")->required();
  solve->add_option("objective", so.objective, "Objective JSON file")->required();
  solve->add_option("--x0", so.x0, "Index of the starting atom")->capture_default_str();
  solve->add_option("--gap-tol", so.gap_tol, "Stop when the Frank-Wolfe gap falls to this value")->capture_default_str();
  solve->add_option("--max-iter", so.max_iter, "Iteration cap")->capture_default_str();
  solve->add_option("--rule", so.rule, "Step rule: auto, lipschitz, exact or composite")->capture_default_str();
  solve->add_option("--rate", so.rate, "Verify a linear rate: generic, quadratic or composite");
  solve->add_option("--out", so.out, "Output directory")->capture_default_str();

  ReproduceOptions ro;
  auto* repro = app.add_subcommand("reproduce", "Run a named experiment and write CSV, SVG and JSON outputs");
  repro->add_option("id", ro.id, "Experiment id")->required();
  repro->add_option("--param", ro.params, "Parameter override key=value (repeatable; values like pi/100 accepted)");
  repro->add_option("--out", ro.out, "Output directory")->capture_default_str();
  repro->add_flag("--no-plot", ro.no_plot, "Skip the SVG plot");

  SelftestOptions to;
  auto* self = app.add_subcommand("selftest", "Run the randomized consistency suites");
  self->add_option("--suite", to.suite, "Run only this suite (duality, faces, condition, scaled, solver)");
  self->add_flag("--corrupt-pivot-tolerance", to.corrupt_pivot, "Debug: break the LP pivot tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(ao);
    if (*solve) return cmd_solve(so);
    if (*repro) return cmd_reproduce(ro);
    if (*self) return cmd_selftest(to);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
