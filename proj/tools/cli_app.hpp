#pragma once

// Command-line front end, kept separate from main() so tests can drive it
// with their own streams.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fieldest/scenarios.hpp"

namespace fieldest::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kConfigError = 2 };

namespace detail {

inline FieldParams to_params(const std::vector<double>& v) {
  if (v.size() != 3) throw ConfigError("--phi needs exactly three values");
  return FieldParams(v[0], v[1], v[2]);
}

inline Phases to_phases(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw ConfigError(std::string(flag) + " needs exactly three values");
  return {v[0], v[1], v[2]};
}

inline void print_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "  ") << format_real(m(i, j));
    out << "\n";
  }
}

inline void print_fisher(std::ostream& out, const FisherMatrix& f) {
  print_matrix(out, f.matrix());
  for (const auto& w : f.warnings()) out << "  warning: " << w << "\n";
  try {
    out << "  total variance " << format_real(total_variance(f)) << "\n";
  } catch (const RankDeficiencyError& e) {
    out << "  total variance undefined: " << e.what() << "\n";
  }
}

// Flags shared by every subcommand; raw values are converted after parsing.
struct Options {
  std::vector<double> phi{1e-4, 2e-4, 3e-4};
  std::vector<int> n_values;
  std::vector<int> families{1, 2};
  std::vector<double> deltas{kDefaultPovmPhases.begin(), kDefaultPovmPhases.end()};
  std::vector<double> probe_deltas{0.0, 0.0, 0.0};
  Backend backend = Backend::automatic;
  std::string out;
  ReportFormat format = ReportFormat::csv;
  std::string route = "closed";
};

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--phi", o.phi, "field parameters x,y,z")->delimiter(',')->expected(1, 3);
  sub->add_option("--n-list", o.n_values, "comma-separated particle numbers")->delimiter(',');
  sub->add_option("--povm", o.families, "POVM families (1, 2)")->delimiter(',');
  sub->add_option("--deltas", o.deltas, "measurement phases a,b,c")->delimiter(',')->expected(1, 3);
  sub->add_option("--probe-deltas", o.probe_deltas, "probe phases a,b,c")->delimiter(',')->expected(1, 3);
  const std::map<std::string, Backend> backends{
      {"dense", Backend::dense}, {"superposition", Backend::superposition}, {"auto", Backend::automatic}};
  sub->add_option("--backend", o.backend, "dense | superposition | auto")
      ->transform(CLI::CheckedTransformer(backends, CLI::ignore_case));
}

inline ScanConfig to_config(const Options& o) {
  ScanConfig c;
  c.phi = to_params(o.phi);
  if (!o.n_values.empty()) c.n_values = o.n_values;
  c.povm_families = o.families;
  c.povm_deltas = to_phases(o.deltas, "--deltas");
  c.probe_deltas = to_phases(o.probe_deltas, "--probe-deltas");
  c.backend = o.backend;
  c.output_path = o.out;
  c.format = o.format;
  return c;
}

inline int cmd_scan(const Options& o, std::ostream& out) {
  const ScanConfig c = to_config(o);
  const auto records = run_scan(c);
  if (c.output_path.empty()) {
    out << format_report(records, c.format);
  } else {
    emit_report(records, c);
    out << "wrote " << records.size() << " rows to " << c.output_path << "\n";
  }
  return kOk;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  const ScanConfig c = to_config(o);
  const auto report = validate(c, o.n_values.empty() ? default_validation_sizes() : o.n_values);
  for (const auto& check : report.checks) {
    out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << "\n";
  }
  out << (report.all_passed() ? "all checks passed" : "validation failed") << "\n";
  return report.all_passed() ? kOk : kValidationFailure;
}

inline FisherMatrix qfim_by_route(const std::string& route, int n, const ScanConfig& c) {
  const FieldParams at = evaluation_point(c.phi);
  if (route == "closed") return qfim_closed_form(at, n);
  const auto probe = triple_ghz_probe(n, c.probe_deltas);
  if (route == "reduced" && n > config().dense_cap) {
    const DensityMatrix rho1(CMatrix(CMatrix::Identity(2, 2) / 2.0));
    return qfim_reduced(rho1, probe_rdm2(n).rho, at, n);
  }
  const PureState psi = dense_statevector(probe);
  if (route == "dense") return qfim_dense(psi, at);
  if (route == "fd") return qfim_fd_oracle(psi, at);
  return qfim_reduced(reduced_density_matrix(psi, {0}), reduced_density_matrix(psi, {0, 1}), at, n);
}

inline int cmd_qfim(const Options& o, std::ostream& out) {
  const ScanConfig c = to_config(o);
  validate_config(c);
  for (int n : c.n_values) {
    out << "N=" << n << " route=" << o.route << "\n";
    print_fisher(out, qfim_by_route(o.route, n, c));
  }
  return kOk;
}

inline int cmd_fim(const Options& o, std::ostream& out) {
  const ScanConfig c = to_config(o);
  validate_config(c);
  for (int n : c.n_values) {
    for (int family : c.povm_families) {
      out << "N=" << n << " povm" << family << " backend=" << backend_name(resolve_backend(c.backend, n)) << "\n";
      try {
        const Povm povm = povm_family(family, n, c.povm_deltas);
        if (povm.phases()) {
          const auto& d = *povm.phases();
          out << "  phases " << format_real(d[0]) << "," << format_real(d[1]) << "," << format_real(d[2]) << "\n";
        }
        print_fisher(out, classical_fim(triple_ghz_probe(n, c.probe_deltas), c.phi, povm, c.backend));
      } catch (const DomainError& e) {
        out << "  skipped: " << e.what() << "\n";
      }
    }
  }
  return kOk;
}

inline int cmd_povm_check(const Options& o, std::ostream& out) {
  const ScanConfig c = to_config(o);
  validate_config(c);
  bool ok = true;
  for (int n : c.n_values) {
    for (int family : c.povm_families) {
      out << "N=" << n << " povm" << family << ": ";
      try {
        const auto v = povm_validity(povm_family(family, n, c.povm_deltas, PhasePolicy::strict));
        out << (v.valid ? "valid" : "INVALID") << " (min eigenvalue " << format_real(v.min_eigenvalue)
            << ", completeness defect " << format_real(v.completeness_defect) << (v.dense ? ", dense" : ", gram")
            << ")\n";
        ok = ok && v.valid;
      } catch (const PovmInvalidError& e) {
        out << "INVALID (" << e.what() << ")\n";
        ok = false;
      } catch (const DomainError& e) {
        out << "skipped (" << e.what() << ")\n";
      }
    }
  }
  return ok ? kOk : kValidationFailure;
}

}  // namespace detail

/// Runs the tool; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simultaneous 3D field estimation: QFIM, classical FIM and N-scans", "fieldest"};
  app.require_subcommand(1);
  detail::Options o;

  auto* scan = app.add_subcommand("scan", "scan N and emit the variance report");
  detail::add_common(scan, o);
  scan->add_option("--out", o.out, "output file (stdout when omitted)");
  const std::map<std::string, ReportFormat> formats{{"csv", ReportFormat::csv}, {"json", ReportFormat::json}};
  scan->add_option("--format", o.format, "csv | json")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  auto* val = app.add_subcommand("validate", "cross-check QFIM routes, POVMs and backends");
  detail::add_common(val, o);

  auto* qfim = app.add_subcommand("qfim", "print the QFIM of the triple-GHZ probe");
  detail::add_common(qfim, o);
  qfim->add_option("--route", o.route, "closed | dense | fd | reduced")
      ->check(CLI::IsMember({"closed", "dense", "fd", "reduced"}));

  auto* fim = app.add_subcommand("fim", "print the classical FIM for each POVM family");
  detail::add_common(fim, o);

  auto* check = app.add_subcommand("povm-check", "check POVM completeness and positivity");
  detail::add_common(check, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (scan->parsed()) return detail::cmd_scan(o, out);
    if (val->parsed()) return detail::cmd_validate(o, out);
    if (qfim->parsed()) {
      if (o.n_values.empty()) o.n_values = {8};
      return detail::cmd_qfim(o, out);
    }
    if (fim->parsed()) {
      if (o.n_values.empty()) o.n_values = {8};
      return detail::cmd_fim(o, out);
    }
    if (o.n_values.empty()) o.n_values = {8};
    return detail::cmd_povm_check(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
}

}  // namespace fieldest::cli
