// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from the test-side oracles, not the library.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fieldest/large_n.hpp"
#include "fieldest/scenarios.hpp"
#include "oracles.hpp"

using namespace fieldest;

namespace {

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "[" << what << "] ";
    }
  }
};

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1: all QFIM routes reproduce (4/3)N(N+2)·1 near φ = 0.
void closed_form_qfim(Outcome& o) {
  const int n = 8;
  const FieldParams p(1e-7, 1e-7, 1e-7);
  const Eigen::MatrixXd want = Eigen::Matrix3d::Identity() * (320.0 / 3.0);
  const PureState psi(dense_amplitudes(triple_ghz_probe(n)));
  const CVector& v = psi.amplitudes();
  const DensityMatrix rho1(oracle::leading_marginal(v, 1, n)), rho2(oracle::leading_marginal(v, 2, n));
  const double e_dense = rel(qfim_dense(psi, p).matrix(), want);
  const double e_reduced = rel(qfim_reduced(rho1, rho2, p, n).matrix(), want);
  const double e_closed = rel(qfim_closed_form(p, n).matrix(), want);
  const double e_fd = rel(qfim_fd_oracle(psi, p).matrix(), want);
  o.detail << "dense " << e_dense << ", reduced " << e_reduced << ", closed " << e_closed << ", fd " << e_fd << " ";
  o.require(e_dense <= 1e-9, "dense");
  o.require(e_reduced <= 1e-9, "reduced");
  o.require(e_closed <= 1e-9, "closed form");
  o.require(e_fd <= 1e-5, "finite difference");
}

// 2: the three scenario variances follow their scaling formulas.
void scaling_laws(Outcome& o) {
  const FieldParams p = FieldParams::near_zero();
  const double s2 = detail::sinc_squared(p.magnitude());
  double worst = 0.0;
  for (int n : {24, 48, 96}) {
    const auto v = scenario_variances(n, p);
    const double errs[] = {rel(v.sep_individual, 9.0 / (4.0 * n)), rel(v.ent_individual, 27.0 / (4.0 * n * n)),
                           rel(v.ent_simultaneous, (3.0 + 6.0 / s2) / (4.0 * n * (n + 2.0))),
                           rel(v.ent_individual / v.ent_simultaneous, 3.0 * (n + 2.0) / n)};
    for (double e : errs) worst = std::max(worst, e);
  }
  o.detail << "max relative error " << worst << " ";
  o.require(worst <= 1e-6, "formula mismatch");
}

// 3: Tr I^{-1} of the closed-form QFIM.
void total_variance_formula(Outcome& o) {
  std::mt19937 rng(2024);
  double worst = 0.0;
  for (int n : {8, 16, 64}) {
    for (int trial = 0; trial < 50; ++trial) {
      const FieldParams p(oracle::random_phi(rng, 1.0));
      const double xi = p.magnitude();
      const double s = std::sin(xi) / xi;
      const double want = (3.0 + 6.0 / (s * s)) / (4.0 * n * (n + 2.0));
      worst = std::max(worst, std::abs(total_variance(qfim_closed_form(p, n)) - want));
    }
  }
  o.detail << "max abs error " << worst << " ";
  o.require(worst <= 1e-10, "total variance");
}

// 4: commuting SLD expectations and a saturating POVM.
void attainability(Outcome& o) {
  const PureState psi = dense_statevector(triple_ghz_probe(8));
  double worst = 0.0;
  for (auto [k, l] : {std::pair{Axis::x, Axis::y}, std::pair{Axis::x, Axis::z}, std::pair{Axis::y, Axis::z}}) {
    worst = std::max(worst, std::abs(commutator_expectation(psi, FieldParams(1e-4, 2e-4, 3e-4), k, l)));
  }
  const FieldParams p(1e-4, 2e-4, 3e-4);
  const double e = rel(optimal_povm_fim(psi, p).matrix(), qfim_dense(psi, p).matrix());
  o.detail << "max |commutator| " << worst << ", FIM vs QFIM " << e << " ";
  o.require(worst <= 1e-10, "commutator");
  o.require(e <= 1e-4, "saturation");
}

// 5: product probes lose a direction.
void rank_bound(Outcome& o) {
  const PureState plus(oracle::product_state(pauli_eigenvector(Axis::x, 1), 6));
  const auto f = qfim_dense(plus, FieldParams(1e-4, 2e-4, 3e-4));
  const int rank = numerical_rank(f);
  bool raised = false;
  try {
    total_variance(f);
  } catch (const RankDeficiencyError&) {
    raised = true;
  }
  o.detail << "rank " << rank << ", rank-deficiency error " << (raised ? "raised" : "not raised") << " ";
  o.require(rank <= 2, "rank");
  o.require(raised, "error");
}

// 6: closed-form W_k against quadrature of its defining double integral.
void w_closed_forms(Outcome& o) {
  std::mt19937 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto phi = oracle::random_phi(rng, 2.0 * std::numbers::pi);
    const FieldParams p(phi);
    for (int k = 0; k < 3; ++k) worst = std::max(worst, oracle::max_abs(w_operator(p, k).matrix() - oracle::w_operator(phi, k)));
  }
  o.detail << "max elementwise error " << worst << " ";
  o.require(worst <= 1e-8, "W mismatch");
}

// 7: probe marginals.
void marginals(Outcome& o) {
  const CVector v8 = dense_amplitudes(triple_ghz_probe(8));
  CMatrix rdm2 = CMatrix::Zero(4, 4);
  for (int k = 0; k < 3; ++k) rdm2 += oracle::kron(oracle::pauli(k), oracle::pauli(k));
  rdm2 = (CMatrix::Identity(4, 4) + rdm2 / 3.0) / 4.0;
  const double e1 = oracle::max_abs(oracle::leading_marginal(v8, 1, 8) - CMatrix::Identity(2, 2) / 2.0);
  const double e2 = oracle::max_abs(oracle::leading_marginal(v8, 2, 8) - rdm2);
  const double e2_lib = oracle::max_abs(probe_rdm2_matrix() - rdm2);
  const CVector v12 = dense_amplitudes(triple_ghz_probe(12));
  const double dev = (oracle::leading_marginal(v12, 2, 12) - rdm2).norm();
  o.detail << "N=8 rho1 " << e1 << ", rho2 " << e2 << "; N=12 deviation " << dev << " ";
  o.require(e1 <= 1e-12 && e2 <= 1e-12 && e2_lib <= 1e-12, "N=8");
  o.require(dev > 0.0 && dev <= std::pow(2.0, -12 / 2.0 + 3.0), "N=12");
}

// 8: scan properties over the default grid.
void figure_properties(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScanConfig c;
  const auto rows = run_scan(c);
  std::vector<double> ns, sim, sep;
  bool ordered = true, bracketed = true, complete = true;
  for (const auto& r : rows) {
    if (!r.var_sep_ind || !r.var_ent_ind || !r.var_ent_sim || !r.var_fim_povm1 || !r.var_fim_povm2) {
      complete = false;
      continue;
    }
    ordered = ordered && *r.var_ent_sim <= *r.var_ent_ind && *r.var_ent_ind <= *r.var_sep_ind;
    for (double v : {*r.var_fim_povm1, *r.var_fim_povm2}) bracketed = bracketed && *r.var_ent_sim <= v && v <= *r.var_sep_ind;
    ns.push_back(r.n);
    sim.push_back(*r.var_ent_sim);
    sep.push_back(*r.var_sep_ind);
  }
  const double s_sim = log_log_slope(ns, sim), s_sep = log_log_slope(ns, sep);

  double backend_worst = 0.0;
  for (int n : {8, 12}) {
    for (int family : {1, 2}) {
      const auto probe = triple_ghz_probe(n);
      const Povm povm = povm_family(family, n);
      const auto d = classical_fim(probe, c.phi, povm, Backend::dense).matrix();
      const auto s = classical_fim(probe, c.phi, povm, Backend::superposition).matrix();
      backend_worst = std::max(backend_worst, rel(d, s));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.detail << "sim slope " << s_sim << ", sep slope " << s_sep << ", backend FIM relative " << backend_worst
           << ", " << secs << " s ";
  o.require(complete, "missing columns");
  o.require(ordered, "sim <= ind <= sep");
  o.require(bracketed, "POVM variances between sim and sep");
  o.require(std::abs(s_sim + 2.0) <= 0.05, "sim slope");
  o.require(std::abs(s_sep + 1.0) <= 0.05, "sep slope");
  o.require(backend_worst <= 1e-9, "backend equivalence");
  o.require(secs < 120.0, "runtime");
}

// 9: single-parameter limits.
void single_parameter(Outcome& o) {
  const FieldParams p = FieldParams::near_zero();
  const double ghz = single_param_qfi(Axis::z, 4, SingleParameterStrategy::ghz, p);
  const double prod = single_param_qfi(Axis::z, 4, SingleParameterStrategy::product, p);
  const double ghz_dense = qfim_dense(dense_statevector(ghz_state(Axis::z, 4)), p)(2, 2);
  const PureState plus(oracle::product_state(pauli_eigenvector(Axis::x, 1), 4));
  const double prod_dense = qfim_dense(plus, p)(2, 2);
  o.detail << "GHZ " << ghz << " (dense " << ghz_dense << "), product " << prod << " (dense " << prod_dense << ") ";
  o.require(std::abs(ghz - 64.0) <= 1e-6 && std::abs(ghz - ghz_dense) <= 1e-6, "GHZ");
  o.require(std::abs(prod - 16.0) <= 1e-6 && std::abs(prod - prod_dense) <= 1e-6, "product");
}

// 10: both POVM families at N = 8, checked with explicitly built matrices.
void povm_validity_dense(Outcome& o) {
  const int n = 8;
  const Eigen::Index dim = Eigen::Index{1} << n;
  auto check = [&](const std::vector<CMatrix>& elements, const char* name) {
    CMatrix sum = CMatrix::Zero(dim, dim);
    double min_ev = 1.0;
    for (const auto& e : elements) {
      sum += e;
      min_ev = std::min(min_ev, Eigen::SelfAdjointEigenSolver<CMatrix>(e, Eigen::EigenvaluesOnly).eigenvalues().minCoeff());
    }
    const double defect = oracle::max_abs(sum - CMatrix::Identity(dim, dim));
    o.detail << name << " min eigenvalue " << min_ev << ", completeness " << defect << "; ";
    o.require(min_ev >= -1e-10 && defect <= 1e-10, name);
  };

  const Povm ghz = povm_ghz_projectors(n);
  std::vector<CMatrix> e1;
  CMatrix rest = CMatrix::Identity(dim, dim);
  for (const auto& el : ghz.elements()) {
    if (const auto* s = std::get_if<SuperpositionProjector>(&el)) {
      const CVector t = dense_amplitudes(s->target);
      e1.push_back(t * t.adjoint());
      rest -= e1.back();
    }
  }
  e1.push_back(rest);
  check(e1, "povm1");

  std::vector<CMatrix> e2;
  for (int k = 0; k < 3; ++k) {
    const CMatrix string = oracle::tensor_power(oracle::pauli(k), n);
    for (double sign : {1.0, -1.0}) e2.push_back((CMatrix::Identity(dim, dim) + sign * string) / 6.0);
  }
  check(e2, "povm2");
  o.require(ghz.size() == 4 && povm_pauli_strings(n).size() == 6, "element counts");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"closed-form QFIM reproduction", closed_form_qfim},
      {"scaling laws", scaling_laws},
      {"total-variance formula", total_variance_formula},
      {"attainability", attainability},
      {"rank bound", rank_bound},
      {"W operator closed forms", w_closed_forms},
      {"probe marginals", marginals},
      {"field-scan properties", figure_properties},
      {"single-parameter limits", single_parameter},
      {"POVM validity", povm_validity_dense},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s(%.2f s)\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str(),
                secs);
    failures += o.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
