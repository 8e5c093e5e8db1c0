#pragma once

// Reading atom and objective files, and writing traces, manifests, reports and plots.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fwas/condition.hpp"
#include "fwas/error.hpp"
#include "fwas/experiments.hpp"
#include "fwas/objective.hpp"
#include "fwas/polytope.hpp"
#include "fwas/solver.hpp"

namespace fwas {

// Bumped whenever argmin/argmax or branch tie-breaking changes.
inline constexpr const char* kTieBreakPolicy = "away-on-equality/lowest-index/v1";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline double parse_number(const std::string& tok, const std::string& where) {
  const std::string t = trim(tok);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + t + "'");
  }
  if (used != t.size()) throw ParseError(where + ": trailing characters in '" + t + "'");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite value");
  return v;
}

inline Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, const std::string& what) {
  if (rows.empty()) throw ParseError(what + ": no rows");
  const std::size_t width = rows.front().size();
  if (width == 0) throw ParseError(what + ": empty row");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) throw ParseError(what + ": ragged rows");
    for (std::size_t j = 0; j < width; ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

inline Eigen::MatrixXd json_matrix(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ParseError(what + ": expected an array of rows");
    std::vector<double> row;
    for (const auto& x : r) {
      if (!x.is_number()) throw ParseError(what + ": non-numeric entry");
      row.push_back(x.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return rows_to_matrix(rows, what);
}

inline Eigen::VectorXd json_vector(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(what + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline nlohmann::json parse_json(const std::string& text, const std::string& path) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

/// Atoms from CSV (one atom per line, comma separated; blank lines and lines
/// starting with '#' ignored) or JSON {"atoms": [[...], ...]}, optional "m".
inline AtomMatrix read_atoms_text(const std::string& text, const std::string& path = "<input>") {
  const std::string body = detail::trim(text);
  std::vector<std::vector<double>> rows;
  if (!body.empty() && body.front() == '{') {
    const auto j = detail::parse_json(body, path);
    if (!j.contains("atoms")) throw ParseError(path + ": missing \"atoms\"");
    const Eigen::MatrixXd M = detail::json_matrix(j["atoms"], path + ": atoms");
    if (j.contains("m") && (!j["m"].is_number_integer() || j["m"].get<long>() != M.cols()))
      throw ParseError(path + ": \"m\" does not match the atom length");
    return AtomMatrix(M.transpose());
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ls(t);
    std::string tok;
    while (std::getline(ls, tok, ',')) row.push_back(detail::parse_number(tok, path + ":" + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  return AtomMatrix(detail::rows_to_matrix(rows, path).transpose());
}

inline AtomMatrix read_atoms(const std::string& path) { return read_atoms_text(detail::read_text(path), path); }

/// Objective JSON: {"kind": "quadratic", "Q": [[...]], "b": [...]} or
/// {"kind": "composite", "E": [[...]], "b": [...], "h": "half-squared-norm", "mu": 1, "L": 1}.
inline Objective read_objective_text(const std::string& text, const std::string& path = "<input>") {
  const auto j = detail::parse_json(text, path);
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ParseError(path + ": missing string field \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  if (!j.contains("b")) throw ParseError(path + ": missing \"b\"");
  const Eigen::VectorXd b = detail::json_vector(j["b"], path + ": b");
  if (kind == "quadratic") {
    if (!j.contains("Q")) throw ParseError(path + ": missing \"Q\"");
    Quadratic q{detail::json_matrix(j["Q"], path + ": Q"), b};
    validate(q);
    return q;
  }
  if (kind == "composite") {
    if (!j.contains("E")) throw ParseError(path + ": missing \"E\"");
    const std::string h = j.value("h", std::string("half-squared-norm"));
    if (h != "half-squared-norm") throw ParseError(path + ": unknown h '" + h + "'");
    Composite c = half_squared_norm_composite(detail::json_matrix(j["E"], path + ": E"), b);
    for (const char* key : {"mu", "L"}) {
      if (!j.contains(key)) continue;
      if (!j[key].is_number()) throw ParseError(path + ": \"" + key + "\" must be a number");
      (std::string(key) == "mu" ? c.mu : c.L) = j[key].get<double>();
    }
    validate(c);
    return c;
  }
  throw ParseError(path + ": unknown objective kind '" + kind + "'");
}

inline Objective read_objective(const std::string& path) {
  return read_objective_text(detail::read_text(path), path);
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string trace_csv(const RunTrace& tr) {
  std::string s = "k,f,step_kind,gamma,gamma_max,support_size,fw_gap\n";
  for (const auto& r : tr.records) {
    s += std::to_string(r.k) + ',' + format_double(r.f) + ',' + to_string(r.step_kind) + ',' +
         format_double(r.gamma) + ',' + format_double(r.gamma_max) + ',' + std::to_string(r.support_size) + ',' +
         format_double(r.fw_gap()) + '\n';
  }
  return s;
}

inline std::string ratio_csv(const std::vector<RatioRow>& rows) {
  std::string s = "k,ratio,bound\n";
  for (const auto& r : rows) s += std::to_string(r.k) + ',' + format_double(r.ratio) + ',' + format_double(r.bound) + '\n';
  return s;
}

inline nlohmann::json solver_config_json(const SolverConfig& cfg) {
  return {{"rule", to_string(cfg.rule)},
          {"gap_tol", cfg.gap_tol},
          {"max_iter", cfg.max_iter},
          {"lipschitz", cfg.lipschitz},
          {"keep_iterates", cfg.keep_iterates}};
}

inline nlohmann::json trace_summary_json(const RunTrace& tr) {
  return {{"rule", to_string(tr.rule)},
          {"converged", tr.converged},
          {"stop_reason", tr.stop_reason},
          {"steps", tr.steps()},
          {"final_f", tr.final_f()},
          {"final_fw_gap", tr.records.back().fw_gap()},
          {"final_x", detail::to_json(tr.final_x)},
          {"final_u", detail::to_json(tr.final_u)}};
}

/// Run manifest: everything needed to repeat a run bit for bit.
inline nlohmann::json run_manifest(const std::string& command, const nlohmann::json& inputs, const nlohmann::json& config,
                                   const nlohmann::json& seeds) {
  return {{"command", command},
          {"inputs", inputs},
          {"config", config},
          {"seeds", seeds},
          {"tie_break_policy", kTieBreakPolicy},
          {"support_threshold", kSupportThreshold}};
}

inline nlohmann::json phi_report_json(const std::string& measure, const PhiReport& rep) {
  return {{"measure", measure},
          {"value", rep.value},
          {"face_atoms", rep.minimizing_face.atom_indices},
          {"witness_u", detail::to_json(rep.witness.u)},
          {"witness_v", detail::to_json(rep.witness.v)},
          {"w", detail::to_json(rep.witness.w.weights())},
          {"y", detail::to_json(rep.witness.y.weights())}};
}

inline nlohmann::json experiment_json(const ExperimentResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [k, v] : r.values) values[k] = v;
  return {{"id", r.id}, {"params", r.params}, {"values", values}, {"checks", checks}, {"passed", r.passed()},
          {"ratio_rows", r.rows.size()}};
}

/// Line plot of ratio (solid) and bound (dashed) against k.
inline std::string ratio_svg(const std::vector<RatioRow>& rows, const std::string& title,
                             const std::string& ratio_label, const std::string& bound_label) {
  const double W = 720, H = 440, left = 80, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  double kmin = 0, kmax = 1, ymin = 0, ymax = 1;
  if (!rows.empty()) {
    kmin = rows.front().k;
    kmax = rows.back().k;
    ymin = std::numeric_limits<double>::infinity();
    ymax = -ymin;
    for (const auto& r : rows) {
      ymin = std::min({ymin, r.ratio, r.bound});
      ymax = std::max({ymax, r.ratio, r.bound});
    }
    ymin = std::min(ymin, 0.0);
    if (kmax <= kmin) kmax = kmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    ymax += 0.05 * (ymax - ymin);
  }
  auto X = [&](double k) { return left + pw * (k - kmin) / (kmax - kmin); };
  auto Y = [&](double y) { return top + ph * (1.0 - (y - ymin) / (ymax - ymin)); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return std::string(buf);
  };
  // keep at most ~4000 vertices per polyline; the last row is always drawn
  const std::size_t stride = std::max<std::size_t>(1, rows.size() / 4000);
  std::string ratio_pts, bound_pts;
  for (std::size_t i = 0; i < rows.size(); i += stride) {
    const auto& r = rows[i];
    ratio_pts += f(X(r.k)) + ',' + f(Y(r.ratio)) + ' ';
    bound_pts += f(X(r.k)) + ',' + f(Y(r.bound)) + ' ';
  }
  if (!rows.empty() && (rows.size() - 1) % stride != 0) {
    ratio_pts += f(X(rows.back().k)) + ',' + f(Y(rows.back().ratio));
    bound_pts += f(X(rows.back().k)) + ',' + f(Y(rows.back().bound));
  }

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0, kv = kmin + (kmax - kmin) * i / 4.0;
    s << "<text x=\"" << left - 6 << "\" y=\"" << f(Y(yv) + 4) << "\" text-anchor=\"end\">" << label(yv) << "</text>\n";
    s << "<text x=\"" << f(X(kv)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">" << label(kv)
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">k</text>\n";
  s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" << ratio_pts << "\"/>\n";
  s << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\" points=\"" << bound_pts
    << "\"/>\n";
  const double lx = left + pw - 190, ly = top + 16;
  s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly
    << "\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/><text x=\"" << lx + 36 << "\" y=\"" << ly + 4 << "\">" << ratio_label
    << "</text>\n";
  s << "<line x1=\"" << lx << "\" y1=\"" << ly + 18 << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly + 18
    << "\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/><text x=\"" << lx + 36 << "\" y=\""
    << ly + 22 << "\">" << bound_label << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace fwas
