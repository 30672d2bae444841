#pragma once

// Dense complex linear algebra on qubit registers.
//
// Qubit ordering: site 0 is the leftmost tensor factor, i.e. the most
// significant bit of a computational-basis index. Every dense routine in the
// library follows this convention.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fieldest/config.hpp"
#include "fieldest/errors.hpp"

namespace fieldest {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr cplx kI{0.0, 1.0};

namespace detail {

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const CMatrix& m) { return max_abs(m - m.adjoint()); }

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(Eigen::Index n) {
  int bits = 0;
  while ((Eigen::Index{1} << bits) < n) ++bits;
  return bits;
}

}  // namespace detail

inline void check_dense_cap(int n_sites) {
  if (n_sites > config().dense_cap) throw DenseCapExceeded(n_sites, config().dense_cap);
}

inline void check_operator_cap(int n_sites) {
  if (n_sites > config().operator_cap) throw DenseCapExceeded(n_sites, config().operator_cap);
}

/// Dense Hermitian matrix. Construction verifies Hermiticity.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
      throw DomainError("HermitianOperator must be a non-empty square matrix");
    }
    if (const double defect = detail::hermiticity_defect(m_); defect > tol().hermiticity) {
      throw DomainError("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
    }
  }

  /// Hermitian part of a matrix that is Hermitian up to roundoff.
  static HermitianOperator hermitian_part(const CMatrix& m) {
    return HermitianOperator(CMatrix(0.5 * (m + m.adjoint())));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  HermitianOperator operator-() const { return HermitianOperator(CMatrix(-m_)); }

 private:
  CMatrix m_;
};

class UnitaryOperator {
 public:
  explicit UnitaryOperator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
      throw DomainError("UnitaryOperator must be a non-empty square matrix");
    }
    const CMatrix id = CMatrix::Identity(m_.rows(), m_.cols());
    if (const double defect = detail::max_abs(m_ * m_.adjoint() - id); defect > tol().unitarity) {
      throw DomainError("matrix is not unitary (defect " + std::to_string(defect) + ")");
    }
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// Normalized state vector.
class PureState {
 public:
  explicit PureState(CVector amplitudes) : a_(std::move(amplitudes)) {
    if (a_.size() < 1) throw DomainError("PureState must have at least one amplitude");
    if (const double err = std::abs(a_.squaredNorm() - 1.0); err > tol().state_norm) {
      throw DomainError("state is not normalized (|norm^2 - 1| = " + std::to_string(err) + ")");
    }
  }

  static PureState normalized(CVector v) {
    const double n = v.norm();
    if (n == 0.0) throw DomainError("cannot normalize the zero vector");
    return PureState(CVector(v / n));
  }

  Eigen::Index dim() const { return a_.size(); }
  const CVector& amplitudes() const { return a_; }

  /// Number of qubits; throws if dim is not a power of two.
  int n_sites() const {
    if (!detail::is_power_of_two(a_.size())) throw DomainError("state dimension is not a power of two");
    return detail::log2_exact(a_.size());
  }

 private:
  CVector a_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {
    const auto& t = tol();
    if (m_.rows() < 1 || m_.rows() != m_.cols()) throw DomainError("DensityMatrix must be square");
    if (detail::hermiticity_defect(m_) > t.hermiticity) throw DomainError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx{1.0}) > t.density_trace) {
      throw DomainError("density matrix trace differs from 1");
    }
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigenSolverError("density matrix eigensolver failed");
    if (es.eigenvalues().minCoeff() < t.density_min_eigenvalue) {
      throw DomainError("density matrix has a negative eigenvalue " +
                        std::to_string(es.eigenvalues().minCoeff()));
    }
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// Unnormalized Pauli matrix sigma_{k+1} for k in {0,1,2}.
inline Mat2 pauli_matrix(int k) {
  Mat2 m;
  switch (k) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, -kI, kI, 0; break;
    case 2: m << 1, 0, 0, -1; break;
    default: throw DomainError("Pauli index must be 0, 1 or 2");
  }
  return m;
}

/// {sigma_1, sigma_2, sigma_3, identity}. Divide by sqrt(2) for the
/// normalized basis P_l.
inline std::array<HermitianOperator, 4> pauli_operators() {
  return {HermitianOperator(CMatrix(pauli_matrix(0))), HermitianOperator(CMatrix(pauli_matrix(1))),
          HermitianOperator(CMatrix(pauli_matrix(2))), HermitianOperator(CMatrix(Mat2::Identity()))};
}

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  UnitaryOperator vectors;  // columns are eigenvectors
};

inline EigenDecomposition hermitian_eig(const HermitianOperator& h) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw EigenSolverError("Hermitian eigensolver did not converge");
  return {es.eigenvalues(), UnitaryOperator(es.eigenvectors())};
}

/// exp(-i H) through the spectral decomposition of H.
inline UnitaryOperator unitary_from_hamiltonian(const HermitianOperator& h) {
  const auto eig = hermitian_eig(h);
  const CMatrix& v = eig.vectors.matrix();
  CVector phases(eig.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(-kI * eig.values(i));
  return UnitaryOperator(CMatrix(v * phases.asDiagonal() * v.adjoint()));
}

/// identity ⊗ ... ⊗ op (at `site`) ⊗ ... ⊗ identity as a full 2^N matrix.
inline HermitianOperator embed_local(const HermitianOperator& op, int site, int n_sites) {
  if (op.dim() != 2) throw DomainError("embed_local expects a 2x2 operator");
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  if (site < 0 || site >= n_sites) throw DomainError("site " + std::to_string(site) + " out of range");
  check_operator_cap(n_sites);
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (n_sites - site - 1);
  const Eigen::Index dim = left * 2 * right;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index l = 0; l < left; ++l) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const cplx v = op(a, b);
        if (v == cplx{}) continue;
        for (Eigen::Index r = 0; r < right; ++r) {
          out((l * 2 + a) * right + r, (l * 2 + b) * right + r) = v;
        }
      }
    }
  }
  return HermitianOperator(std::move(out));
}

/// Applies a 2x2 matrix to one qubit of a state vector without forming the
/// full operator.
inline CVector apply_local(const Mat2& op, int site, const CVector& amplitudes) {
  const int n = detail::log2_exact(amplitudes.size());
  if (!detail::is_power_of_two(amplitudes.size())) throw DomainError("state dimension is not a power of two");
  if (site < 0 || site >= n) throw DomainError("site out of range");
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - site);
  CVector out(amplitudes.size());
  for (Eigen::Index block = 0; block < amplitudes.size(); block += 2 * stride) {
    for (Eigen::Index i = block; i < block + stride; ++i) {
      const cplx a = amplitudes(i);
      const cplx b = amplitudes(i + stride);
      out(i) = op(0, 0) * a + op(0, 1) * b;
      out(i + stride) = op(1, 0) * a + op(1, 1) * b;
    }
  }
  return out;
}

/// op^{⊗N} applied to a state vector.
inline CVector apply_uniform(const Mat2& op, const CVector& amplitudes) {
  const int n = detail::log2_exact(amplitudes.size());
  CVector out = amplitudes;
  for (int site = 0; site < n; ++site) out = apply_local(op, site, out);
  return out;
}

/// Σ_n op^{[n]} applied to a state vector.
inline CVector apply_local_sum(const Mat2& op, const CVector& amplitudes) {
  const int n = detail::log2_exact(amplitudes.size());
  CVector out = CVector::Zero(amplitudes.size());
  for (int site = 0; site < n; ++site) out += apply_local(op, site, amplitudes);
  return out;
}

/// Partial trace of |psi><psi| onto one or two sites. The first listed site
/// becomes the most significant factor of the result.
inline DensityMatrix reduced_density_matrix(const PureState& psi, const std::vector<int>& sites) {
  const int n = psi.n_sites();
  check_dense_cap(n);
  if (sites.empty() || sites.size() > 2) throw DomainError("reduced_density_matrix takes one or two sites");
  for (int s : sites) {
    if (s < 0 || s >= n) throw DomainError("site " + std::to_string(s) + " out of range");
  }
  if (sites.size() == 2 && sites[0] == sites[1]) throw DomainError("sites must be distinct");

  const int k = static_cast<int>(sites.size());
  const Eigen::Index sub = Eigen::Index{1} << k;
  const Eigen::Index rest = Eigen::Index{1} << (n - k);

  std::vector<int> others;
  for (int s = 0; s < n; ++s) {
    if (std::find(sites.begin(), sites.end(), s) == sites.end()) others.push_back(s);
  }
  auto bit_of = [n](int site) { return Eigen::Index{1} << (n - 1 - site); };

  const CVector& a = psi.amplitudes();
  CMatrix rho = CMatrix::Zero(sub, sub);
  CVector slice(sub);
  for (Eigen::Index env = 0; env < rest; ++env) {
    Eigen::Index base = 0;
    for (int j = 0; j < n - k; ++j) {
      if ((env >> (n - k - 1 - j)) & 1) base |= bit_of(others[j]);
    }
    for (Eigen::Index s = 0; s < sub; ++s) {
      Eigen::Index idx = base;
      for (int j = 0; j < k; ++j) {
        if ((s >> (k - 1 - j)) & 1) idx |= bit_of(sites[j]);
      }
      slice(s) = a(idx);
    }
    rho.noalias() += slice * slice.adjoint();
  }
  return DensityMatrix(CMatrix(0.5 * (rho + rho.adjoint())));
}

inline cplx expectation(const CVector& psi, const CVector& op_psi) { return psi.dot(op_psi); }

}  // namespace fieldest
