// Copyright 2026 The qloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Subcommand implementations shared by the qloss executable and its tests.

#ifndef QLOSS_TOOLS_COMMANDS_HPP_
#define QLOSS_TOOLS_COMMANDS_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qloss/qloss.hpp"

namespace qloss::cli {

using Json = nlohmann::ordered_json;

/// Invalid user input. Exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation produced an unusable result. Exit code 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;

enum class Format { kCsv, kJson, kSvg };

struct RunConfig {
  std::string command;
  std::string invocation;
  std::vector<Design> designs = {Design::kRectangular, Design::kTriangular};
  int modes = 5;
  std::vector<int> photons = {3, 4, 5};
  std::vector<double> etas;
  std::vector<double> loss_db;
  int samples = 500;
  std::uint64_t seed = 7;
  Parallelism par;
  std::string out;
  Format format = Format::kCsv;
  // distill
  HeraldRule herald_rule = HeraldRule::kValidPatterns;
  // ghz
  UsubSource source = UsubSource::kPrinted;
  RailEncoding encoding = RailEncoding::kFirstModeOne;
  std::optional<std::array<int, kGhzPhotons>> ports;
  bool search_assignment = false;
  bool spectator_vacuum = false;
  std::string rho_out;
  std::string transfer_out;
};

// -- Parsing helpers -------------------------------------------------------------

inline double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

/// "start:stop:count" (inclusive, evenly spaced) or "a,b,c".
inline std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) throw ConfigError("empty grid");
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw ConfigError("grid must look like start:stop:count, got '" + spec + "'");
    const double a = parse_number(parts[0]);
    const double b = parse_number(parts[1]);
    const double c = parse_number(parts[2]);
    if (c < 1 || c != std::floor(c)) throw ConfigError("grid count must be a positive integer");
    const int n = static_cast<int>(c);
    if (n == 1 && a != b) throw ConfigError("a one-point grid needs start == stop");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(spec, ',')) out.push_back(parse_number(p));
  return out;
}

inline std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  for (const auto& p : split(spec, ',')) {
    const double v = parse_number(p);
    if (v != std::floor(v)) throw ConfigError("expected an integer, got '" + p + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline std::vector<Design> parse_designs(const std::string& s) {
  if (s == "both") return {Design::kRectangular, Design::kTriangular};
  if (auto d = parse_design(s)) return {*d};
  throw ConfigError("unknown design '" + s + "' (expected rect, tri or both)");
}

inline std::string design_list(const std::vector<Design>& ds) {
  std::string out;
  for (Design d : ds) out += (out.empty() ? "" : ",") + std::string(to_string(d));
  return out;
}

inline std::string grid_string(const std::vector<double>& g) {
  std::string out;
  for (double x : g) out += (out.empty() ? "" : ",") + format_double(x);
  return out;
}

namespace detail {

inline void require_etas(const std::vector<double>& etas) {
  if (etas.empty()) throw ConfigError("eta grid is empty");
  for (double e : etas) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("eta values must lie in [0, 1], got " + format_double(e));
  }
}

inline void require_losses(const std::vector<double>& l) {
  if (l.empty()) throw ConfigError("loss grid is empty");
  for (double x : l) {
    if (!(x >= 0.0)) throw ConfigError("losses must be >= 0 dB, got " + format_double(x));
  }
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericError(std::string(what) + " is not finite");
}

inline Json provenance_json(const Provenance& p) {
  Json cfg = Json::object();
  for (const auto& [k, v] : p.config) cfg[k] = v;
  return Json{{"tool", "qloss"}, {"version", kVersion}, {"invocation", p.invocation}, {"config", cfg}, {"rng", p.rng}};
}

/// A table rendered as CSV, JSON records or an SVG line plot.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void emit_table(std::ostream& os, const Table& t, Format f, const Provenance& p, const PlotSpec& plot) {
  switch (f) {
    case Format::kCsv: {
      CsvWriter w(os, p, t.columns);
      for (const auto& r : t.rows) w.row(r);
      break;
    }
    case Format::kJson: {
      Json rows = Json::array();
      for (const auto& r : t.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
          const std::string& cell = r[i];
          char* end = nullptr;
          const double v = std::strtod(cell.c_str(), &end);
          if (!cell.empty() && end == cell.c_str() + cell.size()) {
            obj[t.columns[i]] = v;
          } else if (cell.empty()) {
            obj[t.columns[i]] = nullptr;
          } else {
            obj[t.columns[i]] = cell;
          }
        }
        rows.push_back(std::move(obj));
      }
      os << Json{{"provenance", provenance_json(p)}, {"rows", rows}}.dump(2) << '\n';
      break;
    }
    case Format::kSvg:
      write_svg(os, plot, p);
      break;
  }
}

}  // namespace detail

inline Provenance make_provenance(const RunConfig& c, std::vector<std::pair<std::string, std::string>> extra) {
  Provenance p;
  p.invocation = c.invocation;
  p.config = {{"command", c.command}};
  for (auto& kv : extra) p.config.push_back(std::move(kv));
  return p;
}

// -- Commands ----------------------------------------------------------------------

inline void run_preimage(const RunConfig& c, std::ostream& os) {
  const std::vector<double> etas = c.etas.empty() ? parse_grid("0.8:1.0:21") : c.etas;
  detail::require_etas(etas);
  if (c.modes < 2) throw ConfigError("--modes must be >= 2");
  if (c.samples < 1) throw ConfigError("--samples must be >= 1");
  const auto sweep = preimage_sweep(c.modes, c.designs, etas, c.samples, c.seed, c.par);
  detail::Table t{{"design", "eta", "avg_fidelity", "min_mode_fidelity", "max_mode_fidelity", "samples"}, {}};
  PlotSpec plot{"Preimage fidelity, m = " + std::to_string(c.modes), "eta", "average preimage fidelity", {}};
  for (const auto& r : sweep.records) {
    detail::require_finite(r.avg_fidelity, "preimage fidelity");
    t.rows.push_back({std::string(to_string(r.design)), format_double(r.eta), format_double(r.avg_fidelity),
                      format_double(r.min_mode_fidelity), format_double(r.max_mode_fidelity), std::to_string(r.samples)});
    if (plot.series.empty() || plot.series.back().label != to_string(r.design)) {
      plot.series.push_back({std::string(to_string(r.design)), {}});
    }
    plot.series.back().points.emplace_back(r.eta, r.avg_fidelity);
  }
  const Provenance p = make_provenance(c, {{"designs", design_list(c.designs)},
                                           {"modes", std::to_string(c.modes)},
                                           {"etas", grid_string(etas)},
                                           {"samples", std::to_string(c.samples)},
                                           {"seed", std::to_string(c.seed)}});
  detail::emit_table(os, t, c.format, p, plot);
}

inline void run_postselected(const RunConfig& c, std::ostream& os) {
  const std::vector<double> losses = c.loss_db.empty() ? parse_grid("0:0.5:6") : c.loss_db;
  detail::require_losses(losses);
  const int m = c.modes;
  if (m < 2) throw ConfigError("--modes must be >= 2");
  if (c.samples < 1) throw ConfigError("--samples must be >= 1");
  const auto sweep = postselected_sweep(m, c.designs, losses, c.samples, c.seed, c.par);
  detail::Table t{{"design", "loss_db", "mean_fidelity", "samples"}, {}};
  PlotSpec plot{"Postselected fidelity, m = " + std::to_string(m), "loss per unit cell [dB]", "mean fidelity", {}};
  for (const auto& r : sweep.records) {
    detail::require_finite(r.mean_fidelity, "postselected fidelity");
    t.rows.push_back({std::string(to_string(r.design)), format_double(r.loss_db), format_double(r.mean_fidelity),
                      std::to_string(r.samples)});
    if (plot.series.empty() || plot.series.back().label != to_string(r.design)) {
      plot.series.push_back({std::string(to_string(r.design)), {}});
    }
    plot.series.back().points.emplace_back(r.loss_db, r.mean_fidelity);
  }
  const Provenance p = make_provenance(c, {{"designs", design_list(c.designs)},
                                           {"modes", std::to_string(m)},
                                           {"loss_db", grid_string(losses)},
                                           {"samples", std::to_string(c.samples)},
                                           {"seed", std::to_string(c.seed)}});
  detail::emit_table(os, t, c.format, p, plot);
}

inline void run_distill(const RunConfig& c, std::ostream& os) {
  const std::vector<double> etas = c.etas.empty() ? parse_grid("0.5:1.0:11") : c.etas;
  detail::require_etas(etas);
  for (int n : c.photons) {
    if (n < 2 || n > kMaxDistillationPhotons) {
      throw ConfigError("--photons must lie in [2, " + std::to_string(kMaxDistillationPhotons) + "], got " +
                        std::to_string(n));
    }
  }
  detail::Table t{{"design", "N", "eta", "p_s_simulated", "lambda_simulated", "lambda_closed_form", "p_s_closed_form",
                   "abs_diff"},
                  {}};
  PlotSpec plot{"Conditional transmittance after distillation", "eta", "lambda", {}};
  for (Design d : c.designs) {
    for (int n : c.photons) {
      PlotSeries series{std::string(to_string(d)) + " N=" + std::to_string(n), {}};
      for (double eta : etas) {
        const DistillationResult r = distill_simulate({n, d, eta, std::nullopt, c.herald_rule}, c.par);
        const double closed = d == Design::kRectangular ? lambda_rect_closed(n, eta) : lambda_tri_closed(n, eta);
        const std::string ps_closed = d == Design::kRectangular ? format_double(ps_rect_closed(n, eta)) : "";
        const bool has_lambda = !r.degenerate && std::isfinite(r.lambda);
        t.rows.push_back({std::string(to_string(d)), std::to_string(n), format_double(eta), format_double(r.p_s),
                          has_lambda ? format_double(r.lambda) : "", format_double(closed), ps_closed,
                          has_lambda ? format_double(std::abs(r.lambda - closed)) : ""});
        if (has_lambda) series.points.emplace_back(eta, r.lambda);
      }
      plot.series.push_back(std::move(series));
    }
  }
  std::string ns;
  for (int n : c.photons) ns += (ns.empty() ? "" : ",") + std::to_string(n);
  const Provenance p = make_provenance(
      c, {{"designs", design_list(c.designs)},
          {"photons", ns},
          {"etas", grid_string(etas)},
          {"herald", c.herald_rule == HeraldRule::kValidPatterns ? "valid-patterns" : "all-ones"}});
  detail::emit_table(os, t, c.format, p, plot);
}

// -- GHZ -----------------------------------------------------------------------------

inline Json ghz_point_json(const GhzReport& r, double eta) {
  Json j = Json::object();
  j["eta"] = round12(eta);
  j["loss_db"] = round12(eta > 0.0 ? -10.0 * std::log10(eta) : INFINITY);
  j["degenerate"] = r.degenerate;
  j["p_s"] = round12(r.p_s);
  if (r.degenerate) return j;
  j["qubit_lambdas"] = Json::array({round12(r.qubit_lambdas[0]), round12(r.qubit_lambdas[1]), round12(r.qubit_lambdas[2])});
  j["spectator_occupation"] = round12(r.spectator_occupation);
  j["dualrail_prob"] = round12(r.dualrail_prob);
  j["purity"] = round12(r.purity);
  j["f"] = round12(r.fidelity);
  j["infidelity"] = round12(1.0 - r.fidelity);
  j["alpha"] = round12(r.alpha);
  j["mixed_warning"] = r.mixed_warning;
  Json errs = Json::array();
  for (const auto& [s, e] : r.stabilizer_errors) errs.push_back(Json{{"stabilizer", to_string(s)}, {"p_error", round12(e)}});
  j["stabilizer_errors"] = errs;
  return j;
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  body(f);
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

inline void run_ghz(const RunConfig& c, std::ostream& os) {
  if (!c.etas.empty() && !c.loss_db.empty()) throw ConfigError("give either --etas or --loss-db, not both");
  std::vector<double> etas;
  if (!c.loss_db.empty()) {
    detail::require_losses(c.loss_db);
    for (double l : c.loss_db) etas.push_back(eta_from_db(l));
  } else {
    etas = c.etas.empty() ? std::vector<double>{0.9848} : c.etas;
    detail::require_etas(etas);
  }
  if (c.designs.size() != 1) throw ConfigError("ghz takes a single --design (rect or tri)");
  if ((!c.rho_out.empty() || !c.transfer_out.empty()) && etas.size() != 1) {
    throw ConfigError("--rho-out and --transfer-out need a single grid point");
  }
  GhzSpec base;
  base.source = c.source;
  base.design = c.designs.front();
  base.encoding = c.encoding;
  base.herald_spectator_vacuum = c.spectator_vacuum;
  if (c.ports) base.input_ports = *c.ports;

  Json assignment = nullptr;
  if (c.search_assignment) {
    GhzSpec probe = base;
    probe.eta = etas.front();
    const GhzAssignment best = best_input_assignment(probe, c.par);
    base.input_ports = best.ports;
    assignment = Json{{"ports", best.ports}, {"mean_lambda", round12(best.mean_lambda)}, {"evaluated", best.evaluated}};
  }

  std::vector<GhzReport> reports(etas.size());
  parallel_for(etas.size(), c.par, [&](std::size_t k) {
    GhzSpec s = base;
    s.eta = etas[k];
    reports[k] = ghz_pipeline(s);
  });

  Json points = Json::array();
  std::vector<std::pair<double, double>> fit_data;
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const GhzReport& r = reports[k];
    if (!r.degenerate) detail::require_finite(r.fidelity, "GHZ fidelity");
    points.push_back(ghz_point_json(r, etas[k]));
    const double l = etas[k] > 0.0 ? -10.0 * std::log10(etas[k]) : INFINITY;
    if (r.degenerate) {
      warnings.push_back("degenerate herald at eta=" + format_double(etas[k]));
    } else if (r.mixed_warning) {
      warnings.push_back("mixed post-selected state at eta=" + format_double(etas[k]));
    }
    if (!r.degenerate && l > 0.0 && std::isfinite(l) && 1.0 - r.fidelity > 0.0) fit_data.emplace_back(l, 1.0 - r.fidelity);
  }

  std::string ports;
  for (int p : base.input_ports) ports += (ports.empty() ? "" : ",") + std::to_string(p);
  const Provenance p = make_provenance(
      c, {{"design", std::string(to_string(base.design))},
          {"etas", grid_string(etas)},
          {"source", c.source == UsubSource::kPrinted ? "printed" : "exact"},
          {"encoding", c.encoding == RailEncoding::kFirstModeOne ? "first-mode-one" : "first-mode-zero"},
          {"ports", ports},
          {"spectator_vacuum", c.spectator_vacuum ? "true" : "false"}});

  std::optional<FitResult> fit;
  if (etas.size() > 1 && fit_data.size() >= 3) fit = power_law_fit(fit_data);

  switch (c.format) {
    case Format::kJson: {
      Json doc = Json::object();
      doc["provenance"] = detail::provenance_json(p);
      doc["orthonormalized"] = reports.front().orthonormalized;
      doc["input_ports"] = base.input_ports;
      if (!assignment.is_null()) doc["assignment_search"] = assignment;
      doc["points"] = points;
      if (fit) {
        doc["fit"] = Json{{"coefficient", round12(fit->coefficient)},
                          {"exponent", round12(fit->exponent)},
                          {"residual", round12(fit->residual)},
                          {"points", fit_data.size()}};
      }
      doc["warnings"] = warnings;
      os << doc.dump(2) << '\n';
      break;
    }
    case Format::kCsv: {
      CsvWriter w(os, p,
                  {"eta", "loss_db", "degenerate", "p_s", "lambda_q1", "lambda_q2", "lambda_q3", "spectator_occupation",
                   "dualrail_prob", "purity", "f", "alpha"});
      for (std::size_t k = 0; k < etas.size(); ++k) {
        const GhzReport& r = reports[k];
        const double l = -10.0 * std::log10(etas[k]);
        w.row({format_double(etas[k]), format_double(l), r.degenerate ? "1" : "0", format_double(r.p_s),
               format_double(r.qubit_lambdas[0]), format_double(r.qubit_lambdas[1]), format_double(r.qubit_lambdas[2]),
               format_double(r.spectator_occupation), format_double(r.dualrail_prob), format_double(r.purity),
               format_double(r.fidelity), format_double(r.alpha)});
      }
      break;
    }
    case Format::kSvg: {
      PlotSpec plot{"GHZ infidelity", "loss per unit cell [dB]", "1 - f", {{std::string(to_string(base.design)), fit_data}}};
      write_svg(os, plot, p);
      break;
    }
  }

  if (!c.rho_out.empty()) {
    write_file(c.rho_out, [&](std::ostream& f) { write_density_csv(f, reports.front().state.rho, p); });
  }
  if (!c.transfer_out.empty()) {
    write_file(c.transfer_out, [&](std::ostream& f) { write_matrix_csv(f, reports.front().transfer, p); });
  }
}

/// Runs the invariant suite; returns false if any check failed.
inline bool run_selftest_command(const RunConfig& c, std::ostream& os) {
  const auto results = run_selftest();
  bool ok = true;
  const Provenance p = make_provenance(c, {});
  if (c.format == Format::kJson) {
    Json arr = Json::array();
    for (const auto& r : results) {
      arr.push_back(Json{{"check", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"bound", r.bound}, {"cases", r.cases}});
      ok = ok && r.passed;
    }
    os << Json{{"provenance", detail::provenance_json(p)}, {"checks", arr}}.dump(2) << '\n';
  } else {
    CsvWriter w(os, p, {"check", "status", "worst", "bound", "cases"});
    for (const auto& r : results) {
      w.row({r.name, r.passed ? "PASS" : "FAIL", format_double(r.worst), format_double(r.bound), std::to_string(r.cases)});
      ok = ok && r.passed;
    }
  }
  return ok;
}

}  // namespace qloss::cli

#endif  // QLOSS_TOOLS_COMMANDS_HPP_
