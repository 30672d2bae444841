#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldest/hamiltonian.hpp"
#include "fieldest/log_complex.hpp"
#include "fieldest/operator_core.hpp"

namespace fieldest {

/// One term w · |α>^{⊗N} of a uniform product-state superposition.
struct ProductTerm {
  cplx weight;
  Vec2 local;
};

/// Σ_j w_j |α_j>^{⊗N}: GHZ states, the triple-GHZ probe and the GHZ
/// measurement vectors all have this form with at most six terms.
class ProductStateSuperposition {
 public:
  ProductStateSuperposition(int n_sites, std::vector<ProductTerm> terms, bool normalized)
      : n_(n_sites), terms_(std::move(terms)), normalized_(normalized) {
    if (n_ < 1) throw DomainError("n_sites must be positive");
    if (terms_.empty()) throw DomainError("superposition needs at least one term");
    for (const auto& t : terms_) {
      if (std::abs(t.local.squaredNorm() - 1.0) > tol().local_state_norm) {
        throw DomainError("local states of a product superposition must have unit norm");
      }
    }
    if (normalized_) {
      const double err = std::abs(norm_squared() - 1.0);
      if (err > tol().superposition_norm) {
        throw DomainError("superposition flagged normalized has |norm^2 - 1| = " + std::to_string(err));
      }
    }
  }

  int n_sites() const { return n_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }
  bool normalized() const { return normalized_; }

  /// <s|s> from the Gram matrix of the product terms.
  double norm_squared() const {
    cplx total{};
    for (const auto& a : terms_) {
      for (const auto& b : terms_) {
        total += std::conj(a.weight) * b.weight * LogComplex::from_complex(a.local.dot(b.local)).pow(n_).to_complex();
      }
    }
    return total.real();
  }

  /// Rescales the weights so that the state has unit norm.
  ProductStateSuperposition normalized_copy() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw DomainError("cannot normalize a zero superposition");
    std::vector<ProductTerm> t = terms_;
    for (auto& term : t) term.weight /= std::sqrt(n2);
    return {n_, std::move(t), true};
  }

 private:
  int n_;
  std::vector<ProductTerm> terms_;
  bool normalized_;
};

/// Eigenvector of σ_axis with eigenvalue `sign` (±1), in the fixed phase
/// convention: first component real and positive.
///   σ3: (1,0), (0,1);  σ1: (1,±1)/√2;  σ2: (1,±i)/√2.
inline Vec2 pauli_eigenvector(Axis axis, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("eigenvalue sign must be +1 or -1");
  const double r = 1.0 / std::sqrt(2.0);
  Vec2 v;
  switch (axis) {
    case Axis::x: v << r, sign * r; break;
    case Axis::y: v << r, cplx{0.0, sign * r}; break;
    case Axis::z:
      if (sign > 0) v << 1.0, 0.0;
      else v << 0.0, 1.0;
      break;
  }
  return v;
}

}  // namespace fieldest
