#pragma once

// N-scans over the three estimation strategies and the two realistic
// measurements, the cross-route validation suite, and report emission.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fieldest/classical_fim.hpp"
#include "fieldest/large_n.hpp"
#include "fieldest/qfim.hpp"

namespace fieldest {

enum class ReportFormat { csv, json };

struct ScanConfig {
  FieldParams phi{1e-4, 2e-4, 3e-4};
  std::vector<int> n_values{24, 48, 96, 192, 384, 768};
  std::vector<int> povm_families{1, 2};
  Phases povm_deltas = kDefaultPovmPhases;
  Phases probe_deltas{0.0, 0.0, 0.0};
  Backend backend = Backend::automatic;
  std::string output_path;
  ReportFormat format = ReportFormat::csv;
};

inline void validate_config(const ScanConfig& c) {
  if (c.n_values.empty()) throw ConfigError("n_values must not be empty");
  for (int n : c.n_values) {
    if (n < 3) throw ConfigError("every N must be at least 3 (got " + std::to_string(n) + ")");
  }
  for (int f : c.povm_families) {
    if (f != 1 && f != 2) throw ConfigError("POVM families must be 1 or 2 (got " + std::to_string(f) + ")");
  }
  const int n_max = *std::max_element(c.n_values.begin(), c.n_values.end());
  if (c.backend == Backend::dense && n_max > config().dense_cap) {
    throw ConfigError("dense backend requested for N=" + std::to_string(n_max) + " above the dense cap " +
                      std::to_string(config().dense_cap));
  }
}

struct ScenarioRecord {
  int n = 0;
  std::optional<double> var_sep_ind;
  std::optional<double> var_ent_ind;
  std::optional<double> var_ent_sim;
  std::optional<double> var_fim_povm1;
  std::optional<double> var_fim_povm2;
  bool exact = false;  // N ≡ 0 (mod 8): the probe marginals are exact
  std::string error;
};

namespace detail {

inline void append_error(std::string& errors, const std::string& msg) {
  if (!errors.empty()) errors += "; ";
  errors += msg;
}

inline ScenarioRecord scan_one(const ScanConfig& c, int n) {
  ScenarioRecord r;
  r.n = n;
  r.exact = n % 8 == 0;
  try {
    const VarianceTriple v = scenario_variances(n, c.phi);
    r.var_sep_ind = v.sep_individual;
    r.var_ent_ind = v.ent_individual;
    r.var_ent_sim = v.ent_simultaneous;
  } catch (const Error& e) {
    append_error(r.error, e.what());
  }
  for (int family : c.povm_families) {
    try {
      if (family == 1 && n % 2 != 0) throw DomainError("POVM 1 needs even N");
      const double var = total_variance(large_n_fim(n, c.phi, family, c.povm_deltas, c.probe_deltas, c.backend));
      (family == 1 ? r.var_fim_povm1 : r.var_fim_povm2) = var;
    } catch (const Error& e) {
      append_error(r.error, "povm" + std::to_string(family) + ": " + e.what());
    }
  }
  return r;
}

}  // namespace detail

/// One record per N, in the order given. Per-N failures are recorded in the
/// row and the scan continues.
inline std::vector<ScenarioRecord> run_scan(const ScanConfig& c) {
  validate_config(c);
  std::vector<ScenarioRecord> out;
  out.reserve(c.n_values.size());
  for (int n : c.n_values) out.push_back(detail::scan_one(c, n));
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// Rounds to the 12 significant digits used in the CSV so both formats carry
/// the same values.
inline nlohmann::json json_field(const std::optional<double>& v) {
  if (!v) return nullptr;
  return std::stod(format_real(*v));
}

}  // namespace detail

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{"n",          "var_sep_ind",   "var_ent_ind", "var_ent_sim",
                                             "var_fim_povm1", "var_fim_povm2", "exact",       "error"};
  return cols;
}

inline std::string format_report(const std::vector<ScenarioRecord>& records, ReportFormat format) {
  if (records.empty()) throw DomainError("no records to report");
  if (format == ReportFormat::json) {
    // One object per line, keys in CSV column order.
    std::string out = "[\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      nlohmann::ordered_json row;
      row["n"] = r.n;
      row["var_sep_ind"] = detail::json_field(r.var_sep_ind);
      row["var_ent_ind"] = detail::json_field(r.var_ent_ind);
      row["var_ent_sim"] = detail::json_field(r.var_ent_sim);
      row["var_fim_povm1"] = detail::json_field(r.var_fim_povm1);
      row["var_fim_povm2"] = detail::json_field(r.var_fim_povm2);
      row["exact"] = r.exact;
      row["error"] = r.error;
      out += "  " + row.dump() + (i + 1 < records.size() ? ",\n" : "\n");
    }
    return out + "]\n";
  }
  std::ostringstream out;
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records) {
    out << r.n << ',' << detail::csv_field(r.var_sep_ind) << ',' << detail::csv_field(r.var_ent_ind) << ','
        << detail::csv_field(r.var_ent_sim) << ',' << detail::csv_field(r.var_fim_povm1) << ','
        << detail::csv_field(r.var_fim_povm2) << ',' << (r.exact ? "true" : "false") << ','
        << detail::csv_escape(r.error) << "\n";
  }
  return out.str();
}

/// Writes the report to c.output_path.
inline void emit_report(const std::vector<ScenarioRecord>& records, const ScanConfig& c) {
  const std::string text = format_report(records, c.format);
  std::ofstream f(c.output_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + c.output_path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw Error("failed writing '" + c.output_path + "'");
}

// ---------------------------------------------------------------------------
// Validation suite

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
  }
};

inline const std::vector<int>& default_validation_sizes() {
  static const std::vector<int> sizes{8, 12};
  return sizes;
}

namespace detail {

inline double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({1e-300, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

template <class F>
void run_check(ValidationReport& report, const std::string& name, F&& body) {
  try {
    std::string detail;
    const bool ok = body(detail);
    report.checks.push_back({name, ok, detail});
  } catch (const std::exception& e) {
    report.checks.push_back({name, false, e.what()});
  }
}

}  // namespace detail

/// QFIM route agreement, POVM validity, classical-vs-quantum CRB ordering
/// and dense/superposition backend equivalence at each N. The POVM phases
/// are taken as given (no fallback search), so an invalid choice shows up
/// as a failure.
inline ValidationReport validate(const ScanConfig& c, const std::vector<int>& sizes = default_validation_sizes()) {
  if (sizes.empty()) throw ConfigError("validation needs at least one N");
  for (int f : c.povm_families) {
    if (f != 1 && f != 2) throw ConfigError("POVM families must be 1 or 2");
  }
  ValidationReport report;
  const FieldParams& phi = c.phi;
  for (int n : sizes) {
    if (n < 2 || n > std::min(kAutoDenseLimit, config().dense_cap)) {
      throw ConfigError("validation sizes must lie in [2, " + std::to_string(kAutoDenseLimit) + "]");
    }
    const std::string tag = "N=" + std::to_string(n) + " ";
    const ProductStateSuperposition probe = triple_ghz_probe(n, c.probe_deltas);
    const PureState dense = dense_statevector(probe);

    detail::run_check(report, tag + "qfim routes agree", [&](std::string& msg) {
      const auto qd = qfim_dense(dense, phi).matrix();
      const auto qf = qfim_fd_oracle(dense, phi).matrix();
      const DensityMatrix rho1(engine::site_marginal(probe, 1));
      const DensityMatrix rho2(engine::site_marginal(probe, 2));
      const auto qr = qfim_reduced(rho1, rho2, phi, n).matrix();
      double worst = std::max(detail::relative_difference(qd, qf), detail::relative_difference(qd, qr));
      if (n % 8 == 0) worst = std::max(worst, detail::relative_difference(qd, qfim_closed_form(phi, n).matrix()));
      msg = "max relative difference " + format_real(worst);
      return worst <= 1e-5;
    });

    for (int family : c.povm_families) {
      const std::string ftag = tag + "povm" + std::to_string(family) + " ";
      if (family == 1 && n % 2 != 0) continue;
      detail::run_check(report, ftag + "valid", [&](std::string& msg) {
        const Povm povm = povm_family(family, n, c.povm_deltas, PhasePolicy::strict);
        const PovmValidity v = povm_validity(povm);
        msg = "min eigenvalue " + format_real(v.min_eigenvalue) + ", completeness defect " +
              format_real(v.completeness_defect);
        return v.valid;
      });
      detail::run_check(report, ftag + "crb ordering", [&](std::string& msg) {
        const Povm povm = povm_family(family, n, c.povm_deltas, PhasePolicy::strict);
        const double classical = total_variance(classical_fim(probe, phi, povm, Backend::dense));
        const double quantum = total_variance(qfim_dense(dense, evaluation_point(phi)));
        msg = "Tr F^-1 = " + format_real(classical) + ", Tr I^-1 = " + format_real(quantum);
        return classical >= quantum - 1e-8;
      });
      detail::run_check(report, ftag + "backend equivalence", [&](std::string& msg) {
        const Povm povm = povm_family(family, n, c.povm_deltas, PhasePolicy::strict);
        const FieldParams at = evaluation_point(phi);
        const auto gens = GeneratorSet::pauli();
        const auto d = evaluate_outcomes(probe, gens, at.span(), povm, Backend::dense);
        const auto s = evaluate_outcomes(probe, gens, at.span(), povm, Backend::superposition);
        const double dp = (d.probs.probs() - s.probs.probs()).cwiseAbs().maxCoeff();
        const double dg = (d.gradients - s.gradients).cwiseAbs().maxCoeff();
        const double df = detail::relative_difference(classical_fim(d).matrix(), classical_fim(s).matrix());
        msg = "|dp| " + format_real(dp) + ", |dgrad| " + format_real(dg) + ", FIM relative " + format_real(df);
        return dp <= 1e-9 && dg <= 1e-9 && df <= 1e-9;
      });
    }
  }
  return report;
}

}  // namespace fieldest
