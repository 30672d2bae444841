#pragma once

// Exact large-N evaluation for superpositions of uniform product states.
//
// Every quantity reduces to sums over term pairs (j, j') of single-site
// scalars raised to the N-th (or (N-1)-th) power. Powers are taken in the
// log domain so N up to 10^5 is exact to double precision; the per-pair
// cost is independent of N.

#include <string>
#include <vector>

#include "fieldest/log_complex.hpp"
#include "fieldest/product_superposition.hpp"

namespace fieldest::engine {

namespace detail {

inline void check_same_sites(const ProductStateSuperposition& a, const ProductStateSuperposition& b) {
  if (a.n_sites() != b.n_sites()) {
    throw DomainError("superpositions have different site counts (" + std::to_string(a.n_sites()) + " vs " +
                      std::to_string(b.n_sites()) + ")");
  }
}

/// c^n, with 0^0 = 1.
inline cplx power(cplx c, long long n) { return LogComplex::from_complex(c).pow(n).to_complex(); }

}  // namespace detail

/// <a|b> = Σ conj(w_j) w'_j' <α_j|β_j'>^N.
inline cplx overlap(const ProductStateSuperposition& a, const ProductStateSuperposition& b) {
  detail::check_same_sites(a, b);
  const long long n = a.n_sites();
  cplx total{};
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      const LogComplex w = LogComplex::from_complex(std::conj(ta.weight) * tb.weight);
      total += (w * LogComplex::from_complex(ta.local.dot(tb.local)).pow(n)).to_complex();
    }
  }
  return total;
}

/// u^{⊗N} applied to every term.
inline ProductStateSuperposition apply_local_unitary(const ProductStateSuperposition& s, const UnitaryOperator& u) {
  if (u.dim() != 2) throw DomainError("apply_local_unitary expects a 2x2 unitary");
  const Mat2 m = u.matrix();
  std::vector<ProductTerm> terms = s.terms();
  for (auto& t : terms) {
    t.local = m * t.local;
    t.local.normalize();
  }
  return {s.n_sites(), std::move(terms), false};
}

/// <s|σ_k^{⊗N}|s>.
inline double pauli_string_expectation(const ProductStateSuperposition& s, Axis k) {
  const Mat2 sigma = pauli_matrix(index(k));
  const long long n = s.n_sites();
  cplx total{};
  for (const auto& ta : s.terms()) {
    for (const auto& tb : s.terms()) {
      const LogComplex w = LogComplex::from_complex(std::conj(ta.weight) * tb.weight);
      total += (w * LogComplex::from_complex(ta.local.dot(sigma * tb.local)).pow(n)).to_complex();
    }
  }
  return total.real();
}

/// <a| Σ_n op^{[n]} |b>. Each term pair contributes
/// N <α|op|β> <α|β>^{N-1}; a vanishing single-site overlap makes the pair
/// vanish for N >= 2.
inline cplx inserted_sum_overlap(const ProductStateSuperposition& a, const ProductStateSuperposition& b,
                                 const CMatrix& op) {
  detail::check_same_sites(a, b);
  if (op.rows() != 2 || op.cols() != 2) throw DomainError("inserted operator must be 2x2");
  const Mat2 m = op;
  const long long n = a.n_sites();
  cplx total{};
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      const cplx single = ta.local.dot(tb.local);
      if (single == cplx{} && n >= 2) continue;
      const LogComplex pair = LogComplex::from_complex(std::conj(ta.weight) * tb.weight) *
                              LogComplex::from_complex(static_cast<double>(n) * ta.local.dot(m * tb.local)) *
                              LogComplex::from_complex(single).pow(n - 1);
      total += pair.to_complex();
    }
  }
  return total;
}

inline cplx inserted_sum_overlap(const ProductStateSuperposition& a, const ProductStateSuperposition& b,
                                 const HermitianOperator& op) {
  return inserted_sum_overlap(a, b, op.matrix());
}

/// One- or two-site reduced density matrix of a uniform superposition
/// (identical for every choice of sites by permutation symmetry).
inline CMatrix site_marginal(const ProductStateSuperposition& s, int n_marginal_sites) {
  if (n_marginal_sites != 1 && n_marginal_sites != 2) throw DomainError("marginal must cover one or two sites");
  if (n_marginal_sites > s.n_sites()) throw DomainError("marginal larger than the system");
  const long long rest = s.n_sites() - n_marginal_sites;
  const Eigen::Index dim = Eigen::Index{1} << n_marginal_sites;
  CMatrix rho = CMatrix::Zero(dim, dim);
  for (const auto& ta : s.terms()) {
    for (const auto& tb : s.terms()) {
      // |α_a><α_b| on the kept sites times <α_b|α_a>^{rest}.
      const cplx env = detail::power(tb.local.dot(ta.local), rest);
      const cplx w = ta.weight * std::conj(tb.weight) * env;
      if (w == cplx{}) continue;
      if (n_marginal_sites == 1) {
        rho += w * CMatrix(ta.local * tb.local.adjoint());
      } else {
        CVector ka(4), kb(4);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            ka(2 * i + j) = ta.local(i) * ta.local(j);
            kb(2 * i + j) = tb.local(i) * tb.local(j);
          }
        }
        rho += w * ka * kb.adjoint();
      }
    }
  }
  return rho / rho.trace().real();
}

}  // namespace fieldest::engine
