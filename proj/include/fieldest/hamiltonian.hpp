#pragma once

// Single-particle Hamiltonian h = Σ_k φ_k h_k, the local generator operators
// a_k = ∫_0^1 e^{iαh} h_k e^{-iαh} dα, and their closed forms for the
// magnetic-field case h = φ·σ.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fieldest/operator_core.hpp"

namespace fieldest {

enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

inline constexpr int index(Axis a) { return static_cast<int>(a); }

inline std::string axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

/// Field phases φ_k = μ B_k / 2.
class FieldParams {
 public:
  explicit FieldParams(std::array<double, 3> phi) : phi_(phi) {
    for (double v : phi_) {
      if (!std::isfinite(v)) throw DomainError("field parameters must be finite");
    }
  }
  FieldParams(double p1, double p2, double p3) : FieldParams(std::array<double, 3>{p1, p2, p3}) {}

  /// The symmetric offset used for "φ -> 0" evaluations.
  static FieldParams near_zero() {
    const double e = config().phi_zero_offset;
    return FieldParams(e, e, e);
  }

  const std::array<double, 3>& phi() const { return phi_; }
  double operator[](int k) const { return phi_.at(static_cast<std::size_t>(k)); }
  std::span<const double> span() const { return phi_; }

  /// ξ = |φ|.
  double magnitude() const { return std::sqrt(phi_[0] * phi_[0] + phi_[1] * phi_[1] + phi_[2] * phi_[2]); }

  /// η = φ/|φ|; undefined (throws) at φ = 0.
  std::array<double, 3> direction() const {
    const double xi = magnitude();
    if (xi == 0.0) throw DomainError("field direction is undefined at phi = 0");
    return {phi_[0] / xi, phi_[1] / xi, phi_[2] / xi};
  }

 private:
  std::array<double, 3> phi_;
};

/// Parameter-independent single-particle generators h_k, all of dimension D.
class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<HermitianOperator> generators) : gens_(std::move(generators)) {
    if (gens_.empty()) throw DomainError("GeneratorSet needs at least one generator");
    for (const auto& g : gens_) {
      if (g.dim() != gens_.front().dim()) throw DomainError("generators must share one dimension");
    }
  }

  /// {σ1, σ2, σ3}: the magnetic-field generators.
  static GeneratorSet pauli() {
    auto p = pauli_operators();
    return GeneratorSet({p[0], p[1], p[2]});
  }

  int size() const { return static_cast<int>(gens_.size()); }
  Eigen::Index dim() const { return gens_.front().dim(); }
  const HermitianOperator& operator[](int k) const { return gens_.at(static_cast<std::size_t>(k)); }
  const std::vector<HermitianOperator>& generators() const { return gens_; }

 private:
  std::vector<HermitianOperator> gens_;
};

/// Σ_j φ_j h_j.
inline HermitianOperator single_particle_h(const GeneratorSet& gens, std::span<const double> params) {
  if (static_cast<int>(params.size()) != gens.size()) {
    throw DomainError("expected " + std::to_string(gens.size()) + " parameters, got " +
                      std::to_string(params.size()));
  }
  CMatrix h = CMatrix::Zero(gens.dim(), gens.dim());
  for (int j = 0; j < gens.size(); ++j) h += params[static_cast<std::size_t>(j)] * gens[j].matrix();
  return HermitianOperator::hermitian_part(h);
}

/// Σ_k φ_k σ_k.
inline HermitianOperator single_particle_h(const FieldParams& p) {
  return single_particle_h(GeneratorSet::pauli(), p.span());
}

/// f(x) = ∫_0^1 e^{iαx} dα = (e^{ix} - 1)/(ix), with f(0) = 1.
///
/// Away from the origin it is evaluated as e^{ix/2} sin(x/2)/(x/2), which has
/// no cancellation; near the origin the Taylor series 1 + ix/2 - x²/6 is used.
inline cplx phase_filter(double x) {
  if (std::abs(x) < tol().filter_series) return {1.0 - x * x / 6.0, x / 2.0};
  const double half = 0.5 * x;
  return std::exp(kI * half) * (std::sin(half) / half);
}

/// a_k = ∫_0^1 e^{iαh} h_k e^{-iαh} dα, evaluated exactly in the eigenbasis of h.
inline HermitianOperator a_local(const GeneratorSet& gens, std::span<const double> params, int k) {
  if (k < 0 || k >= gens.size()) throw DomainError("parameter index out of range");
  const auto eig = hermitian_eig(single_particle_h(gens, params));
  const CMatrix& v = eig.vectors.matrix();
  CMatrix hk = v.adjoint() * gens[k].matrix() * v;
  for (Eigen::Index m = 0; m < hk.rows(); ++m) {
    for (Eigen::Index n = 0; n < hk.cols(); ++n) {
      hk(m, n) *= phase_filter(eig.values(m) - eig.values(n));
    }
  }
  return HermitianOperator::hermitian_part(v * hk * v.adjoint());
}

inline HermitianOperator a_local(const FieldParams& p, int k) {
  return a_local(GeneratorSet::pauli(), p.span(), k);
}

inline HermitianOperator a_local(const FieldParams& p, Axis k) { return a_local(p, index(k)); }

namespace detail {

/// sin(x)/x.
inline double sinc(double x) {
  if (std::abs(x) < tol().sinc_series) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

inline double sinc_squared(double x) {
  const double s = sinc(x);
  return s * s;
}

/// (1 - sinc²x)/x², finite at x = 0.
inline double one_minus_sinc2_over_x2(double x) {
  if (std::abs(x) < tol().sinc_series) {
    const double x2 = x * x;
    return 1.0 / 3.0 - 2.0 * x2 / 45.0 + x2 * x2 / 315.0;
  }
  return (1.0 - sinc_squared(x)) / (x * x);
}

}  // namespace detail

/// Pauli-basis coefficients of W_k: row k holds the σ_1, σ_2, σ_3
/// coefficients of W_k, so Tr[σ_l W_k] = 2 C(k, l).
///
/// The (1 - sinc²ξ) η_k η_l products are formed as ((1 - sinc²ξ)/ξ²) φ_k φ_l,
/// which reduces to W_k = σ_k at φ = 0.
inline Eigen::Matrix3d w_coefficients(const FieldParams& p) {
  const double xi = p.magnitude();
  const double s2 = detail::sinc_squared(xi);
  const double g = detail::one_minus_sinc2_over_x2(xi);
  const auto& phi = p.phi();
  Eigen::Matrix3d c;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      if (k == l) {
        double signed_sum = 0.0;  // φ_k² - Σ_{j≠k} φ_j²
        for (int j = 0; j < 3; ++j) signed_sum += (j == k ? 1.0 : -1.0) * phi[j] * phi[j];
        c(k, l) = (1.0 + s2 + g * signed_sum) / 2.0;
      } else {
        c(k, l) = g * phi[k] * phi[l];
      }
    }
  }
  return c;
}

/// W_k = ∫∫ dα dβ e^{i(α-β)h} σ_k e^{-i(α-β)h} in closed form.
inline HermitianOperator w_operator(const FieldParams& p, int k) {
  if (k < 0 || k > 2) throw DomainError("w_operator index must be 0, 1 or 2");
  const Eigen::Matrix3d c = w_coefficients(p);
  CMatrix w = CMatrix::Zero(2, 2);
  for (int l = 0; l < 3; ++l) w += c(k, l) * CMatrix(pauli_matrix(l));
  return HermitianOperator(std::move(w));
}

/// Tr[a_k a_l] = Tr[σ_l W_k].
inline double trace_pair(const FieldParams& p, int k, int l) {
  if (k < 0 || k > 2 || l < 0 || l > 2) throw DomainError("trace_pair indices must be 0, 1 or 2");
  return 2.0 * w_coefficients(p)(k, l);
}

/// Decomposition of h = Σ_j φ_j h_j (two-level generators) in the
/// unnormalized Pauli basis: h = Σ_k c_k σ_k + identity_component · 1.
/// The identity component only contributes an unobservable global phase.
/// Coefficients in the normalized basis P_l = σ_l/√2 are √2 · c_l.
struct PauliReduction {
  std::array<double, 3> coefficients;
  double identity_component;
};

inline PauliReduction pauli_reduce(const GeneratorSet& gens, std::span<const double> params) {
  if (gens.dim() != 2) throw DomainError("pauli_reduce requires two-level generators");
  if (static_cast<int>(params.size()) != gens.size()) throw DomainError("parameter count mismatch");
  PauliReduction r{{0.0, 0.0, 0.0}, 0.0};
  for (int j = 0; j < gens.size(); ++j) {
    const CMatrix& hj = gens[j].matrix();
    const double phi = params[static_cast<std::size_t>(j)];
    for (int k = 0; k < 3; ++k) r.coefficients[k] += phi * (CMatrix(pauli_matrix(k)) * hj).trace().real() / 2.0;
    r.identity_component += phi * hj.trace().real() / 2.0;
  }
  return r;
}

}  // namespace fieldest
