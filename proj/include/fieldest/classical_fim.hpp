#pragma once

// Realistic measurements and their classical Fisher information.
//
// Two POVM families act on the N-particle probe after the field:
//   1. projectors onto the three GHZ states Ψ_k plus the complement,
//   2. (1 ± σ_k^{⊗N}) / 6 for k = 1, 2, 3.
// Probabilities and their φ-gradients come either from dense state vectors
// or from the product-superposition engine. The gradient uses
// ∂_k |ψ_φ> = -i U A_k |ψ>, so ∂_k p = 2 Im[<ψ_φ|Π U A_k|ψ>].

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "fieldest/povm.hpp"
#include "fieldest/probe_states.hpp"
#include "fieldest/qfim.hpp"
#include "fieldest/superposition_engine.hpp"

namespace fieldest {

enum class Backend { dense, superposition, automatic };

inline std::string backend_name(Backend b) {
  switch (b) {
    case Backend::dense: return "dense";
    case Backend::superposition: return "superposition";
    case Backend::automatic: return "auto";
  }
  return "?";
}

/// Largest N evaluated densely by Backend::automatic.
inline constexpr int kAutoDenseLimit = 12;

inline Backend resolve_backend(Backend b, int n_sites) {
  if (b != Backend::automatic) return b;
  return n_sites <= std::min(kAutoDenseLimit, config().dense_cap) ? Backend::dense : Backend::superposition;
}

/// Outcome probabilities. Entries slightly outside [0, 1] are clamped.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(Eigen::VectorXd p) : p_(std::move(p)) {
    const auto& t = tol();
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (!(p_(i) >= -t.probability_slack && p_(i) <= 1.0 + t.probability_slack)) {
        throw PovmInvalidError("outcome " + std::to_string(i) + " has probability " + std::to_string(p_(i)));
      }
      p_(i) = std::clamp(p_(i), 0.0, 1.0);
    }
    if (std::abs(p_.sum() - 1.0) > t.povm_completeness) {
      throw PovmInvalidError("outcome probabilities sum to " + std::to_string(p_.sum()));
    }
  }

  Eigen::Index size() const { return p_.size(); }
  const Eigen::VectorXd& probs() const { return p_; }
  double operator[](Eigen::Index i) const { return p_(i); }

 private:
  Eigen::VectorXd p_;
};

// ---------------------------------------------------------------------------
// POVM families

enum class PhasePolicy {
  strict,              // use the requested δ or fail
  nearest_admissible,  // fall back to the closest admissible grid point
};

/// Gram matrix <Ψ_i|Ψ_j> of the three GHZ measurement states.
inline Eigen::Matrix3cd ghz_povm_gram(int n_sites, const Phases& deltas) {
  std::vector<ProductStateSuperposition> psi;
  for (Axis k : kAxes) psi.push_back(ghz_state(k, n_sites, deltas[index(k)]));
  Eigen::Matrix3cd g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = engine::overlap(psi[i], psi[j]);
  return g;
}

/// 1 - Σ|Ψ_k><Ψ_k| is PSD iff the Gram matrix has λ_max <= 1.
inline double ghz_povm_complement_min_eigenvalue(int n_sites, const Phases& deltas) {
  const Eigen::Matrix3cd g = ghz_povm_gram(n_sites, deltas);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(g, Eigen::EigenvaluesOnly);
  return 1.0 - es.eigenvalues().maxCoeff();
}

inline bool ghz_povm_admissible(int n_sites, const Phases& deltas) {
  return ghz_povm_complement_min_eigenvalue(n_sites, deltas) >= -tol().povm_psd;
}

namespace detail {

inline double circular_distance(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

inline double phase_distance(const Phases& a, const Phases& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += circular_distance(a[k], b[k]) * circular_distance(a[k], b[k]);
  return s;
}

}  // namespace detail

/// Resolves the measurement phases for POVM1 at this N.
inline Phases resolve_ghz_phases(int n_sites, const Phases& requested, PhasePolicy policy) {
  if (ghz_povm_admissible(n_sites, requested)) return requested;
  if (policy == PhasePolicy::strict) {
    throw PovmInvalidError("GHZ projector POVM is invalid at N=" + std::to_string(n_sites) +
                           " for the requested phases (complement min eigenvalue " +
                           std::to_string(ghz_povm_complement_min_eigenvalue(n_sites, requested)) + ")");
  }
  auto grid = phase_grid();
  std::stable_sort(grid.begin(), grid.end(), [&](const Phases& a, const Phases& b) {
    return detail::phase_distance(a, requested) < detail::phase_distance(b, requested) - 1e-12;
  });
  for (const auto& d : grid) {
    if (ghz_povm_admissible(n_sites, d)) return d;
  }
  throw PovmInvalidError("no admissible GHZ projector phases on the grid at N=" + std::to_string(n_sites));
}

/// Default requested phases for POVM1.
inline constexpr Phases kDefaultPovmPhases{std::numbers::pi, std::numbers::pi, std::numbers::pi};

/// POVM1: |Ψ_1><Ψ_1|, |Ψ_2><Ψ_2|, |Ψ_3><Ψ_3|, 1 - Σ.
inline Povm povm_ghz_projectors(int n_sites, const Phases& deltas = kDefaultPovmPhases,
                                PhasePolicy policy = PhasePolicy::nearest_admissible) {
  if (n_sites < 2 || n_sites % 2 != 0) throw DomainError("GHZ projector POVM needs even N >= 2");
  const Phases used = resolve_ghz_phases(n_sites, deltas, policy);
  std::vector<PovmElement> elements;
  std::vector<std::string> labels;
  for (Axis k : kAxes) {
    elements.emplace_back(SuperpositionProjector{ghz_state(k, n_sites, used[index(k)])});
    labels.push_back("ghz_" + axis_name(k));
  }
  elements.emplace_back(Complement{});
  labels.emplace_back("complement");
  Povm p(n_sites, std::move(elements), std::move(labels));
  p.set_phases(used);
  return p;
}

/// POVM2: (1 ± σ_k^{⊗N}) / 6.
inline Povm povm_pauli_strings(int n_sites) {
  if (n_sites < 1) throw DomainError("Pauli-string POVM needs N >= 1");
  std::vector<PovmElement> elements;
  std::vector<std::string> labels;
  for (Axis k : kAxes) {
    for (int sign : {+1, -1}) {
      elements.emplace_back(PauliStringElement{k, sign});
      labels.push_back("pauli_" + axis_name(k) + (sign > 0 ? "+" : "-"));
    }
  }
  return Povm(n_sites, std::move(elements), std::move(labels));
}

inline Povm povm_family(int family, int n_sites, const Phases& deltas = kDefaultPovmPhases,
                        PhasePolicy policy = PhasePolicy::nearest_admissible) {
  switch (family) {
    case 1: return povm_ghz_projectors(n_sites, deltas, policy);
    case 2: return povm_pauli_strings(n_sites);
    default: throw DomainError("POVM family must be 1 or 2");
  }
}

// ---------------------------------------------------------------------------
// Validity

struct PovmValidity {
  double min_eigenvalue;       // smallest eigenvalue over all elements
  double completeness_defect;  // max |Σ Π - 1|
  bool dense;                  // full matrices were built
  bool valid;
};

namespace detail {

inline CVector element_target(const PovmElement& e) {
  if (const auto* s = std::get_if<SuperpositionProjector>(&e)) return dense_amplitudes(s->target);
  return std::get<DenseProjector>(e).target;
}

inline CMatrix dense_element(const PovmElement& e, int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (const auto* p = std::get_if<PauliStringElement>(&e)) {
    CMatrix string = CMatrix::Identity(1, 1);
    const CMatrix s = pauli_matrix(index(p->axis));
    for (int i = 0; i < n; ++i) string = kron2(string, s);
    return p->weight * (CMatrix::Identity(dim, dim) + static_cast<double>(p->sign) * string);
  }
  const CVector v = element_target(e);
  return v * v.adjoint();
}

}  // namespace detail

/// Checks PSD and completeness. Full 2^N x 2^N matrices up to the operator
/// cap; above it the complement is checked through the Gram matrix of the
/// projector targets (the Pauli family is complete and PSD algebraically).
inline PovmValidity povm_validity(const Povm& povm) {
  const int n = povm.n_sites();
  const auto& t = tol();
  if (n <= config().operator_cap) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix sum = CMatrix::Zero(dim, dim);
    double min_ev = std::numeric_limits<double>::infinity();
    for (const auto& e : povm.elements()) {
      const CMatrix m = std::holds_alternative<Complement>(e) ? CMatrix(CMatrix::Identity(dim, dim) - sum)
                                                              : detail::dense_element(e, n);
      const Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
      min_ev = std::min(min_ev, es.eigenvalues().minCoeff());
      sum += m;
    }
    const double defect = fieldest::detail::max_abs(sum - CMatrix::Identity(dim, dim));
    return {min_ev, defect, true, min_ev >= -t.povm_psd && defect <= t.povm_completeness};
  }

  std::vector<ProductStateSuperposition> targets;
  bool has_complement = false, has_pauli = false;
  for (const auto& e : povm.elements()) {
    if (const auto* s = std::get_if<SuperpositionProjector>(&e)) targets.push_back(s->target);
    else if (std::holds_alternative<DenseProjector>(e)) throw DomainError("dense projector above the operator cap");
    else if (std::holds_alternative<Complement>(e)) has_complement = true;
    else has_pauli = true;
  }
  if (has_pauli && !targets.empty()) throw DomainError("mixed POVM families are not supported above the cap");
  if (has_pauli) return {0.0, 0.0, false, true};
  const auto m = static_cast<Eigen::Index>(targets.size());
  CMatrix g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = engine::overlap(targets[i], targets[j]);
  const double lmax = Eigen::SelfAdjointEigenSolver<CMatrix>(g, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double min_ev = has_complement ? std::min(0.0, 1.0 - lmax) : 0.0;
  const double defect = has_complement ? 0.0 : std::abs(lmax - 1.0);
  return {min_ev, defect, false, min_ev >= -t.povm_psd && defect <= t.povm_completeness};
}

// ---------------------------------------------------------------------------
// Probabilities and gradients

/// p(n|φ) and ∂_k p(n|φ); gradients are d x outcomes.
struct OutcomeEvaluation {
  ProbabilityVector probs;
  Eigen::MatrixXd gradients;
};

namespace detail {

inline OutcomeEvaluation finish_outcomes(const Povm& povm, Eigen::VectorXd p, Eigen::MatrixXd g) {
  const auto outcomes = static_cast<Eigen::Index>(povm.size());
  if (std::holds_alternative<Complement>(povm.elements().back())) {
    const Eigen::Index last = outcomes - 1;
    p(last) = 1.0 - p.head(last).sum();
    g.col(last) = -g.leftCols(last).rowwise().sum();
    if (p(last) < -tol().probability_slack) {
      throw PovmInvalidError("complement outcome has negative probability " + std::to_string(p(last)));
    }
  }
  return {ProbabilityVector(std::move(p)), std::move(g)};
}

/// Dense evaluation given ψ_φ = U|ψ> and χ_k = U A_k|ψ>.
inline OutcomeEvaluation evaluate_dense(const CVector& evolved, const std::vector<CVector>& chi, const Povm& povm) {
  const auto outcomes = static_cast<Eigen::Index>(povm.size());
  const auto d = static_cast<Eigen::Index>(chi.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(outcomes);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, outcomes);
  for (Eigen::Index o = 0; o < outcomes; ++o) {
    const auto& e = povm.elements()[static_cast<std::size_t>(o)];
    if (std::holds_alternative<Complement>(e)) continue;
    if (const auto* ps = std::get_if<PauliStringElement>(&e)) {
      const CVector flipped = apply_uniform(pauli_matrix(index(ps->axis)), evolved);
      p(o) = ps->weight * (1.0 + ps->sign * evolved.dot(flipped).real());
      for (Eigen::Index k = 0; k < d; ++k) g(k, o) = ps->weight * ps->sign * 2.0 * flipped.dot(chi[k]).imag();
      continue;
    }
    const CVector t = element_target(e);
    const cplx amp = t.dot(evolved);
    p(o) = std::norm(amp);
    for (Eigen::Index k = 0; k < d; ++k) g(k, o) = 2.0 * (std::conj(amp) * t.dot(chi[k])).imag();
  }
  return finish_outcomes(povm, std::move(p), std::move(g));
}

inline void check_povm_sites(const Povm& povm, int n_sites) {
  if (povm.n_sites() != n_sites) throw DomainError("POVM and probe have different site counts");
}

}  // namespace detail

/// Dense evaluation on an arbitrary N-qubit pure state.
inline OutcomeEvaluation evaluate_outcomes(const PureState& psi, const GeneratorSet& gens,
                                           std::span<const double> params, const Povm& povm) {
  detail::check_params(gens, params);
  detail::check_povm_sites(povm, psi.n_sites());
  check_dense_cap(psi.n_sites());
  const auto ops = detail::local_operators(gens, params);
  const CVector evolved = apply_uniform(ops.u, psi.amplitudes());
  std::vector<CVector> chi;
  for (const auto& img : detail::generator_images(psi.amplitudes(), ops.a)) chi.push_back(apply_uniform(ops.u, img));
  return detail::evaluate_dense(evolved, chi, povm);
}

/// Evaluation on a product-superposition probe with either backend.
inline OutcomeEvaluation evaluate_outcomes(const ProductStateSuperposition& probe, const GeneratorSet& gens,
                                           std::span<const double> params, const Povm& povm,
                                           Backend backend = Backend::automatic) {
  detail::check_params(gens, params);
  detail::check_povm_sites(povm, probe.n_sites());
  if (!probe.normalized()) throw DomainError("probe must be normalized");
  if (resolve_backend(backend, probe.n_sites()) == Backend::dense) {
    return evaluate_outcomes(dense_statevector(probe), gens, params, povm);
  }

  const auto ops = detail::local_operators(gens, params);
  const UnitaryOperator u(ops.u);
  const ProductStateSuperposition evolved = engine::apply_local_unitary(probe, u);
  // U A_k U^† = Σ_n (u a_k u^†)^{[n]}
  std::vector<Mat2> rotated;
  for (const auto& a : ops.a) rotated.push_back(ops.u * a * ops.u.adjoint());

  const auto outcomes = static_cast<Eigen::Index>(povm.size());
  const auto d = static_cast<Eigen::Index>(rotated.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(outcomes);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, outcomes);
  for (Eigen::Index o = 0; o < outcomes; ++o) {
    const auto& e = povm.elements()[static_cast<std::size_t>(o)];
    if (std::holds_alternative<Complement>(e)) continue;
    if (std::holds_alternative<DenseProjector>(e)) {
      throw DomainError("dense projectors require the dense backend");
    }
    if (const auto* ps = std::get_if<PauliStringElement>(&e)) {
      const Mat2 s = pauli_matrix(index(ps->axis));
      std::vector<ProductTerm> terms = evolved.terms();
      for (auto& t : terms) t.local = s * t.local;
      const ProductStateSuperposition flipped(evolved.n_sites(), std::move(terms), false);
      p(o) = ps->weight * (1.0 + ps->sign * engine::overlap(evolved, flipped).real());
      for (Eigen::Index k = 0; k < d; ++k) {
        g(k, o) = ps->weight * ps->sign * 2.0 * engine::inserted_sum_overlap(flipped, evolved, rotated[k]).imag();
      }
      continue;
    }
    const auto& target = std::get<SuperpositionProjector>(e).target;
    const cplx amp = engine::overlap(target, evolved);
    p(o) = std::norm(amp);
    for (Eigen::Index k = 0; k < d; ++k) {
      g(k, o) = 2.0 * (std::conj(amp) * engine::inserted_sum_overlap(target, evolved, rotated[k])).imag();
    }
  }
  return detail::finish_outcomes(povm, std::move(p), std::move(g));
}

inline ProbabilityVector outcome_probabilities(const ProductStateSuperposition& probe, const FieldParams& p,
                                               const Povm& povm, Backend backend = Backend::automatic) {
  return evaluate_outcomes(probe, GeneratorSet::pauli(), p.span(), povm, backend).probs;
}

inline Eigen::MatrixXd probability_gradients(const ProductStateSuperposition& probe, const GeneratorSet& gens,
                                             std::span<const double> params, const Povm& povm,
                                             Backend backend = Backend::automatic) {
  return evaluate_outcomes(probe, gens, params, povm, backend).gradients;
}

inline Eigen::MatrixXd probability_gradients(const ProductStateSuperposition& probe, const FieldParams& p,
                                             const Povm& povm, Backend backend = Backend::automatic) {
  return probability_gradients(probe, GeneratorSet::pauli(), p.span(), povm, backend);
}

// ---------------------------------------------------------------------------
// Fisher information

/// F_kl = Σ_n ∂_k p_n ∂_l p_n / p_n. Outcomes below the probability floor
/// are kept (with p floored) only when their gradient is negligible;
/// otherwise they are dropped and reported as singular.
inline FisherMatrix classical_fim(const ProbabilityVector& probs, const Eigen::MatrixXd& grads) {
  if (grads.cols() != probs.size()) throw DomainError("gradient matrix does not match the outcome count");
  const auto& t = tol();
  const Eigen::Index d = grads.rows();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d, d);
  std::vector<std::string> warnings;
  for (Eigen::Index o = 0; o < probs.size(); ++o) {
    double p = probs[o];
    const Eigen::VectorXd g = grads.col(o);
    if (p < t.probability_floor) {
      p = t.probability_floor;
      if (g.cwiseAbs().maxCoeff() > std::sqrt(p) * t.gradient_consistency) {
        warnings.push_back("singular outcome " + std::to_string(o) + ": p ~ 0 with gradient norm " +
                           std::to_string(g.norm()));
        continue;
      }
    }
    f += g * g.transpose() / p;
  }
  return FisherMatrix(0.5 * (f + f.transpose()), std::move(warnings));
}

inline FisherMatrix classical_fim(const OutcomeEvaluation& e) { return classical_fim(e.probs, e.gradients); }

/// Parameters at which "φ = 0" is evaluated: exactly zero maps to the
/// symmetric offset.
inline FieldParams evaluation_point(const FieldParams& p) {
  return p.magnitude() == 0.0 ? FieldParams::near_zero() : p;
}

inline FisherMatrix classical_fim(const ProductStateSuperposition& probe, const FieldParams& p, const Povm& povm,
                                  Backend backend = Backend::automatic) {
  const FieldParams at = evaluation_point(p);
  return classical_fim(evaluate_outcomes(probe, GeneratorSet::pauli(), at.span(), povm, backend));
}

/// Classical FIM of the saturating POVM. Exactly at its construction point
/// the FIM is 0/0 (every outcome but one has p = 0 and ∂p = 0), so the POVM
/// is built a step `offset` away along every parameter and evaluated at φ.
inline FisherMatrix optimal_povm_fim(const PureState& psi, const FieldParams& p, double offset = 1e-6) {
  const FieldParams at = evaluation_point(p);
  const FieldParams built(at[0] - offset, at[1] - offset, at[2] - offset);
  const Povm povm = optimal_povm(psi, built);
  return classical_fim(evaluate_outcomes(psi, GeneratorSet::pauli(), at.span(), povm));
}

}  // namespace fieldest
