#pragma once

// Quantum Fisher information matrix for N particles evolving under
// U = exp(-i Σ_n h^{[n]}), computed along independent routes:
//   * correlation matrix of A_k = Σ_n a_k^{[n]} on a dense state,
//   * finite differences of U(φ)|ψ> (test oracle, no A-operators involved),
//   * one- and two-body marginals of a permutation-invariant state,
//   * the closed form for the triple-GHZ probe.
// Plus the SLDs, the attainability condition, the saturating POVM built
// from {U|ψ>, U A_k|ψ>}, and the three estimation-strategy variances.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fieldest/hamiltonian.hpp"
#include "fieldest/povm.hpp"
#include "fieldest/probe_states.hpp"

namespace fieldest {

/// Real symmetric positive semidefinite d x d matrix (quantum or classical
/// Fisher information). Diagnostic warnings from its construction travel
/// with it.
class FisherMatrix {
 public:
  explicit FisherMatrix(Eigen::MatrixXd m, std::vector<std::string> warnings = {})
      : m_(std::move(m)), warnings_(std::move(warnings)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) throw DomainError("FisherMatrix must be square and non-empty");
    if (!m_.allFinite()) throw DomainError("FisherMatrix has non-finite entries");
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (asym > tol().fisher_symmetry * scale) throw DomainError("FisherMatrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol().fisher_min_eigenvalue * scale) {
      throw DomainError("FisherMatrix is not positive semidefinite (min eigenvalue " +
                        std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  Eigen::VectorXd eigenvalues() const {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m_, Eigen::EigenvaluesOnly).eigenvalues();
  }

 private:
  Eigen::MatrixXd m_;
  std::vector<std::string> warnings_;
};

/// Total variance bounds of the three strategies for estimating φ with N
/// particles.
struct VarianceTriple {
  double sep_individual;    // product states, N/3 particles per component
  double ent_individual;    // GHZ states, N/3 particles per component
  double ent_simultaneous;  // triple-GHZ probe, all N particles, Tr[I^{-1}]
};

/// Number of eigenvalues above rank_relative * λ_max.
inline int numerical_rank(const FisherMatrix& f) {
  const Eigen::VectorXd ev = f.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (!(lmax > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev(i) > tol().rank_relative * lmax ? 1 : 0;
  return rank;
}

/// Tr[F^{-1}]. A numerically singular F raises RankDeficiencyError naming
/// the null directions; no pseudo-inverse is taken.
inline double total_variance(const FisherMatrix& f) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  std::vector<Eigen::VectorXd> null;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(lmax > 0.0) || ev(i) <= tol().rank_relative * lmax) null.push_back(es.eigenvectors().col(i));
  }
  if (!null.empty()) {
    std::ostringstream msg;
    msg << "Fisher matrix is rank deficient (rank " << ev.size() - static_cast<Eigen::Index>(null.size()) << " of "
        << ev.size() << "); null directions:";
    for (const auto& v : null) {
      msg << " [";
      for (Eigen::Index i = 0; i < v.size(); ++i) msg << (i ? ", " : "") << v(i);
      msg << "]";
    }
    throw RankDeficiencyError(msg.str(), std::move(null));
  }
  return (1.0 / ev.array()).sum();
}

namespace detail {

inline Mat2 as_mat2(const HermitianOperator& h) {
  if (h.dim() != 2) throw DomainError("expected a 2x2 operator");
  return h.matrix();
}

inline void require_qubit_generators(const GeneratorSet& gens) {
  if (gens.dim() != 2) throw DomainError("dense N-particle routes require two-level generators");
}

/// a_k for every parameter, and u = exp(-i h).
struct LocalOperators {
  std::vector<Mat2> a;
  Mat2 u;
};

inline LocalOperators local_operators(const GeneratorSet& gens, std::span<const double> params) {
  require_qubit_generators(gens);
  LocalOperators out;
  for (int k = 0; k < gens.size(); ++k) out.a.push_back(as_mat2(a_local(gens, params, k)));
  out.u = unitary_from_hamiltonian(single_particle_h(gens, params)).matrix();
  return out;
}

/// A_k|ψ> for every k.
inline std::vector<CVector> generator_images(const CVector& psi, const std::vector<Mat2>& a) {
  std::vector<CVector> out;
  out.reserve(a.size());
  for (const auto& ak : a) out.push_back(apply_local_sum(ak, psi));
  return out;
}


inline CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Marginals of a 4x4 two-qubit operator on the first and second factor.
inline std::pair<CMatrix, CMatrix> two_site_marginals(const CMatrix& rho2) {
  CMatrix first = CMatrix::Zero(2, 2), second = CMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int b = 0; b < 2; ++b) {
        first(i, j) += rho2(2 * i + b, 2 * j + b);
        second(i, j) += rho2(2 * b + i, 2 * b + j);
      }
    }
  }
  return {first, second};
}

inline void check_params(const GeneratorSet& gens, std::span<const double> params) {
  if (static_cast<int>(params.size()) != gens.size()) throw DomainError("parameter count mismatch");
}

}  // namespace detail

/// I_kl = 4 Re[<A_k A_l> - <A_k><A_l>] on |ψ> with A_k = Σ_n a_k^{[n]}.
inline FisherMatrix qfim_dense(const PureState& psi, const GeneratorSet& gens, std::span<const double> params) {
  detail::check_params(gens, params);
  check_dense_cap(psi.n_sites());
  const auto ops = detail::local_operators(gens, params);
  const CVector& v = psi.amplitudes();
  const auto images = detail::generator_images(v, ops.a);
  const int d = gens.size();
  Eigen::VectorXd mean(d);
  for (int k = 0; k < d; ++k) mean(k) = v.dot(images[k]).real();
  Eigen::MatrixXd f(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) f(k, l) = 4.0 * (images[k].dot(images[l]).real() - mean(k) * mean(l));
  return FisherMatrix(std::move(f));
}

inline FisherMatrix qfim_dense(const PureState& psi, const FieldParams& p) {
  return qfim_dense(psi, GeneratorSet::pauli(), p.span());
}

/// Independent oracle: I_kl = 4 Re[<∂_kψ_φ|∂_lψ_φ> - <∂_kψ_φ|ψ_φ><ψ_φ|∂_lψ_φ>]
/// with central differences of U(φ)|ψ>.
inline FisherMatrix qfim_fd_oracle(const PureState& psi, const GeneratorSet& gens, std::span<const double> params,
                                   double step = 1e-4) {
  detail::check_params(gens, params);
  detail::require_qubit_generators(gens);
  check_dense_cap(psi.n_sites());
  if (!(step >= 1e-6 && step <= 1e-3)) throw DomainError("finite-difference step must lie in [1e-6, 1e-3]");
  std::vector<double> point(params.begin(), params.end());
  auto evolve = [&](const std::vector<double>& at) {
    const Mat2 u = unitary_from_hamiltonian(single_particle_h(gens, at)).matrix();
    return apply_uniform(u, psi.amplitudes());
  };
  const CVector base = evolve(point);
  const int d = gens.size();
  std::vector<CVector> deriv;
  for (int k = 0; k < d; ++k) {
    auto plus = point, minus = point;
    plus[k] += step;
    minus[k] -= step;
    deriv.push_back((evolve(plus) - evolve(minus)) / (2.0 * step));
  }
  Eigen::MatrixXd f(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      f(k, l) = 4.0 * (deriv[k].dot(deriv[l]) - deriv[k].dot(base) * base.dot(deriv[l])).real();
  return FisherMatrix(0.5 * (f + f.transpose()));
}

inline FisherMatrix qfim_fd_oracle(const PureState& psi, const FieldParams& p, double step = 1e-4) {
  return qfim_fd_oracle(psi, GeneratorSet::pauli(), p.span(), step);
}

/// One- and two-body parts of the permutation-invariant decomposition
/// I = 4N I^[1] + 4N(N-1) I^[2].
struct ReducedQfim {
  Eigen::MatrixXd one_body;
  Eigen::MatrixXd two_body;
  FisherMatrix total;
};

inline ReducedQfim qfim_reduced_parts(const DensityMatrix& rho1, const DensityMatrix& rho2, const GeneratorSet& gens,
                                      std::span<const double> params, int n_sites) {
  detail::check_params(gens, params);
  detail::require_qubit_generators(gens);
  if (rho1.dim() != 2 || rho2.dim() != 4) throw DomainError("qfim_reduced expects 2x2 and 4x4 marginals");
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  const auto [first, second] = detail::two_site_marginals(rho2.matrix());
  const double defect =
      std::max(fieldest::detail::max_abs(first - rho1.matrix()), fieldest::detail::max_abs(second - rho1.matrix()));
  if (defect > tol().marginal_consistency) {
    throw DomainError("one-body marginal inconsistent with the two-body marginal (defect " + std::to_string(defect) +
                      ")");
  }
  const auto ops = detail::local_operators(gens, params);
  const int d = gens.size();
  Eigen::VectorXd mean(d);
  for (int k = 0; k < d; ++k) mean(k) = (rho1.matrix() * ops.a[k]).trace().real();
  Eigen::MatrixXd one(d, d), two(d, d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      one(k, l) = (rho1.matrix() * ops.a[k] * ops.a[l]).trace().real() - mean(k) * mean(l);
      two(k, l) = (rho2.matrix() * detail::kron2(ops.a[k], ops.a[l])).trace().real() - mean(k) * mean(l);
    }
  }
  const double n = n_sites;
  Eigen::MatrixXd total = 4.0 * n * one + 4.0 * n * (n - 1.0) * two;
  return {one, two, FisherMatrix(0.5 * (total + total.transpose()))};
}

inline FisherMatrix qfim_reduced(const DensityMatrix& rho1, const DensityMatrix& rho2, const FieldParams& p,
                                 int n_sites) {
  return qfim_reduced_parts(rho1, rho2, GeneratorSet::pauli(), p.span(), n_sites).total;
}

/// (4/3) N (N+2) [(1 - sinc²ξ) η_k η_l + δ_kl sinc²ξ].
inline FisherMatrix qfim_closed_form(const FieldParams& p, int n_sites) {
  if (n_sites < 2) throw DomainError("qfim_closed_form needs N >= 2");
  const double xi = p.magnitude();
  const double s2 = detail::sinc_squared(xi);
  const double g = detail::one_minus_sinc2_over_x2(xi);
  const double n = n_sites;
  const double scale = 4.0 / 3.0 * n * (n + 2.0);
  Eigen::Matrix3d f;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) f(k, l) = scale * (g * p[k] * p[l] + (k == l ? s2 : 0.0));
  return FisherMatrix(f);
}

/// (λ1, λ2, λ3) = (4N(N+2)/3, 4N(N+2)sinc²ξ/3, 4N(N+2)sinc²ξ/3).
inline std::array<double, 3> qfim_closed_form_eigenvalues(const FieldParams& p, int n_sites) {
  const double n = n_sites;
  const double l1 = 4.0 * n * (n + 2.0) / 3.0;
  const double l2 = l1 * detail::sinc_squared(p.magnitude());
  return {l1, l2, l2};
}

/// (λ_max(a_k) - λ_min(a_k))², the per-particle single-parameter information.
inline double local_gap_squared(const FieldParams& p, Axis k) {
  const auto ev = hermitian_eig(a_local(p, k)).values;
  const double gap = ev.maxCoeff() - ev.minCoeff();
  return gap * gap;
}

enum class SingleParameterStrategy { product, ghz };

/// N g (optimal product probe) or N² g (GHZ probe), g = (λmax(a_k) - λmin(a_k))².
inline double single_param_qfi(Axis k, int n_sites, SingleParameterStrategy strategy, const FieldParams& p) {
  if (n_sites < 1) throw DomainError("single_param_qfi needs N >= 1");
  const double g = local_gap_squared(p, k);
  const double n = n_sites;
  return strategy == SingleParameterStrategy::product ? n * g : n * n * g;
}

/// Total variances of the three strategies. The two block strategies
/// split N into three blocks of N/3 particles, one per component.
inline VarianceTriple scenario_variances(int n_sites, const FieldParams& p) {
  if (n_sites < 3 || n_sites % 3 != 0) throw DomainError("N not divisible by 3");
  const int block = n_sites / 3;
  VarianceTriple v{0.0, 0.0, 0.0};
  for (Axis k : kAxes) {
    v.sep_individual += 1.0 / single_param_qfi(k, block, SingleParameterStrategy::product, p);
    v.ent_individual += 1.0 / single_param_qfi(k, block, SingleParameterStrategy::ghz, p);
  }
  v.ent_simultaneous = total_variance(qfim_closed_form(p, n_sites));
  return v;
}

/// L_k = 2i U [|ψ><ψ|, A_k] U^†, as full matrices.
inline std::vector<HermitianOperator> build_slds(const PureState& psi, const GeneratorSet& gens,
                                                 std::span<const double> params) {
  detail::check_params(gens, params);
  check_operator_cap(psi.n_sites());
  const auto ops = detail::local_operators(gens, params);
  const CVector evolved = apply_uniform(ops.u, psi.amplitudes());
  std::vector<HermitianOperator> out;
  for (const auto& img : detail::generator_images(psi.amplitudes(), ops.a)) {
    const CVector chi = apply_uniform(ops.u, img);
    const CMatrix l = 2.0 * kI * (evolved * chi.adjoint() - chi * evolved.adjoint());
    out.push_back(HermitianOperator::hermitian_part(l));
  }
  return out;
}

/// <ψ_φ|[L_k, L_l]|ψ_φ> = 8i Im <ψ|A_k A_l|ψ>.
inline cplx commutator_expectation(const PureState& psi, const GeneratorSet& gens, std::span<const double> params,
                                   int k, int l) {
  detail::check_params(gens, params);
  check_dense_cap(psi.n_sites());
  if (k < 0 || l < 0 || k >= gens.size() || l >= gens.size()) throw DomainError("parameter index out of range");
  const auto ops = detail::local_operators(gens, params);
  const CVector ak = apply_local_sum(ops.a[k], psi.amplitudes());
  const CVector al = apply_local_sum(ops.a[l], psi.amplitudes());
  return 8.0 * kI * ak.dot(al).imag();
}

inline cplx commutator_expectation(const PureState& psi, const FieldParams& p, Axis k, Axis l) {
  return commutator_expectation(psi, GeneratorSet::pauli(), p.span(), index(k), index(l));
}

/// Gram matrix of {U|ψ>, U A_1|ψ>, ..., U A_d|ψ>}; U drops out.
inline CMatrix saturating_gramian(const PureState& psi, const GeneratorSet& gens, std::span<const double> params) {
  detail::check_params(gens, params);
  check_dense_cap(psi.n_sites());
  const auto ops = detail::local_operators(gens, params);
  std::vector<CVector> vecs{psi.amplitudes()};
  for (auto& img : detail::generator_images(psi.amplitudes(), ops.a)) vecs.push_back(std::move(img));
  const auto m = static_cast<Eigen::Index>(vecs.size());
  CMatrix g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = vecs[i].dot(vecs[j]);
  return g;
}

/// POVM saturating the quantum Cramér-Rao bound: projectors onto the
/// Gram-Schmidt orthonormalization of {U|ψ>, U A_k|ψ>} (starting from
/// U|ψ>) plus the complement, d + 2 elements in total.
///
/// Requires vanishing commutator expectations and a full-rank QFIM.
inline Povm optimal_povm(const PureState& psi, const GeneratorSet& gens, std::span<const double> params) {
  detail::check_params(gens, params);
  const int n = psi.n_sites();
  check_dense_cap(n);
  const int d = gens.size();
  const auto& t = tol();

  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) {
      const double c = std::abs(commutator_expectation(psi, gens, params, k, l));
      if (c > t.attainability) {
        throw AttainabilityError("commutator expectation for parameters (" + std::to_string(k) + ", " +
                                 std::to_string(l) + ") is " + std::to_string(c) + ", bound cannot be attained");
      }
    }
  }
  const FisherMatrix f = qfim_dense(psi, gens, params);
  if (numerical_rank(f) < d) throw AttainabilityError("QFIM is rank deficient; no saturating POVM is constructed");

  // Schur complement of the leading 1 in the Gramian: C - B B^T = I / 4.
  const CMatrix g = saturating_gramian(psi, gens, params);
  const CMatrix schur = g.bottomRightCorner(d, d) - g.col(0).tail(d) * g.row(0).tail(d);
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(0.5 * (schur + schur.adjoint())), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= t.rank_relative * std::max(1.0, es.eigenvalues().maxCoeff())) {
    throw LinearDependenceError("Gramian Schur complement is not positive definite");
  }

  const auto ops = detail::local_operators(gens, params);
  std::vector<CVector> raw{apply_uniform(ops.u, psi.amplitudes())};
  for (const auto& img : detail::generator_images(psi.amplitudes(), ops.a)) raw.push_back(apply_uniform(ops.u, img));

  // Modified Gram-Schmidt, two passes per vector.
  std::vector<CVector> basis;
  for (const auto& v : raw) {
    CVector w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) w -= e.dot(w) * e;
    }
    if (w.norm() < t.gram_schmidt_reorthogonalize * v.norm()) {
      throw LinearDependenceError("Gram-Schmidt vector collapsed; vectors are numerically dependent");
    }
    basis.push_back(w / w.norm());
  }

  std::vector<PovmElement> elements;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    elements.emplace_back(DenseProjector{basis[i]});
    labels.push_back("xi" + std::to_string(i));
  }
  elements.emplace_back(Complement{});
  labels.emplace_back("complement");
  return Povm(n, std::move(elements), std::move(labels));
}

inline Povm optimal_povm(const PureState& psi, const FieldParams& p) {
  return optimal_povm(psi, GeneratorSet::pauli(), p.span());
}

struct RankCheck {
  int rank;
  int bound;  // 2 (D - 1)
};

/// Numerical rank of the QFIM of |φ>^{⊗N}, with the bound 2(D - 1).
inline RankCheck product_probe_rank_check(const Vec2& local_state, const GeneratorSet& gens,
                                          std::span<const double> params, int n_sites) {
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  check_dense_cap(n_sites);
  const ProductStateSuperposition product(n_sites, {{cplx{1.0}, local_state}}, true);
  const FisherMatrix f = qfim_dense(dense_statevector(product), gens, params);
  return {numerical_rank(f), 2 * (static_cast<int>(gens.dim()) - 1)};
}

}  // namespace fieldest
