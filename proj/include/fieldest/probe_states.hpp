#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "fieldest/product_superposition.hpp"
#include "fieldest/superposition_engine.hpp"

namespace fieldest {

using Phases = std::array<double, 3>;

/// (|φ_k^+>^{⊗N} + e^{iδ} |φ_k^->^{⊗N}) / √2.
inline ProductStateSuperposition ghz_state(Axis k, int n_sites, double delta = 0.0) {
  if (n_sites < 1) throw DomainError("ghz_state needs at least one site");
  const double r = 1.0 / std::sqrt(2.0);
  return {n_sites,
          {{cplx{r}, pauli_eigenvector(k, +1)}, {std::polar(r, delta), pauli_eigenvector(k, -1)}},
          true};
}

/// M for the unnormalized six-term sum Σ_{k,±} |φ_k^±>^{⊗N}, i.e. the
/// positive root of 1 = M² [6 + 4((1+i)/2)^N + 4((1-i)/2)^N + 10(1/√2)^N
///                          + 2(-1/√2)^N + 2(i/√2)^N + 2(-i/√2)^N].
inline double probe_normalization(int n_sites) {
  if (n_sites < 1) throw DomainError("probe_normalization needs N >= 1");
  const double r = 1.0 / std::sqrt(2.0);
  auto p = [n_sites](cplx c) { return engine::detail::power(c, n_sites); };
  const cplx bracket = 6.0 + 4.0 * p({0.5, 0.5}) + 4.0 * p({0.5, -0.5}) + 10.0 * p({r, 0.0}) +
                       2.0 * p({-r, 0.0}) + 2.0 * p({0.0, r}) + 2.0 * p({0.0, -r});
  if (!(bracket.real() > 0.0)) throw DomainError("normalization bracket is not positive");
  return 1.0 / std::sqrt(bracket.real());
}

/// N (e^{iδ1}|Φ1> + e^{iδ2}|Φ2> + e^{iδ3}|Φ3>) with the normalization taken
/// from the exact 6x6 Gram matrix of the product terms.
inline ProductStateSuperposition triple_ghz_probe(int n_sites, const Phases& deltas = {0.0, 0.0, 0.0}) {
  if (n_sites < 2) throw DomainError("triple_ghz_probe needs N >= 2");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<ProductTerm> terms;
  for (Axis k : kAxes) {
    const cplx w = std::polar(r, deltas[index(k)]);
    terms.push_back({w, pauli_eigenvector(k, +1)});
    terms.push_back({w, pauli_eigenvector(k, -1)});
  }
  return ProductStateSuperposition(n_sites, std::move(terms), false).normalized_copy();
}

/// Analytic two-body marginal 1/4 1⊗1 + 1/12 Σ_k σ_k⊗σ_k of the triple-GHZ
/// probe; `exact` holds for N ≡ 0 (mod 8), otherwise the true marginal
/// differs by terms of order 2^{-N/2}.
struct TwoBodyMarginal {
  DensityMatrix rho;
  bool exact;
};

inline CMatrix probe_rdm2_matrix() {
  CMatrix rho = CMatrix::Identity(4, 4) / 4.0;
  for (int k = 0; k < 3; ++k) {
    const CMatrix s = pauli_matrix(k);
    CMatrix ss(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) ss.block(2 * i, 2 * j, 2, 2) = s(i, j) * s;
    rho += ss / 12.0;
  }
  return rho;
}

inline TwoBodyMarginal probe_rdm2(int n_sites) {
  if (n_sites < 2) throw DomainError("probe_rdm2 needs N >= 2");
  return {DensityMatrix(probe_rdm2_matrix()), n_sites % 8 == 0};
}

/// Σ_j w_j ⊗_sites |α_j>, site 0 most significant.
inline CVector dense_amplitudes(const ProductStateSuperposition& s) {
  check_dense_cap(s.n_sites());
  const Eigen::Index dim = Eigen::Index{1} << s.n_sites();
  CVector out = CVector::Zero(dim);
  for (const auto& t : s.terms()) {
    CVector v(1);
    v(0) = t.weight;
    for (int site = 0; site < s.n_sites(); ++site) {
      CVector next(v.size() * 2);
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        next(2 * i) = v(i) * t.local(0);
        next(2 * i + 1) = v(i) * t.local(1);
      }
      v.swap(next);
    }
    out += v;
  }
  return out;
}

/// Dense state vector of a normalized superposition.
inline PureState dense_statevector(const ProductStateSuperposition& s) {
  if (!s.normalized()) throw DomainError("dense_statevector requires a normalized superposition");
  return PureState(dense_amplitudes(s));
}

/// The grid {0, π/2, π, 3π/2}³ in lexicographic order.
inline std::vector<Phases> phase_grid() {
  constexpr double q = std::numbers::pi / 2.0;
  std::vector<Phases> grid;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) grid.push_back({a * q, b * q, c * q});
  return grid;
}

/// Deviation of the probe's single-site marginal from 1/2 (max abs entry).
inline double probe_marginal_defect(int n_sites, const Phases& deltas) {
  const CMatrix rho1 = engine::site_marginal(triple_ghz_probe(n_sites, deltas), 1);
  return fieldest::detail::max_abs(rho1 - CMatrix::Identity(2, 2) / 2.0);
}

/// First grid phase triple for which the probe's single-site marginal is
/// maximally mixed within `tolerance`, or nullopt.
inline std::optional<Phases> admissible_probe_phases(int n_sites, double tolerance = 1e-10) {
  for (const auto& d : phase_grid()) {
    if (probe_marginal_defect(n_sites, d) <= tolerance) return d;
  }
  return std::nullopt;
}

}  // namespace fieldest
