#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fieldest {

/// Numerical tolerances shared by every module. Values are absolute unless
/// the field name says otherwise.
struct Tolerances {
  double hermiticity = 1e-12;            // max |M - M^dagger| elementwise
  double unitarity = 1e-12;              // max |U U^dagger - 1| elementwise
  double state_norm = 1e-12;             // | <psi|psi> - 1 |
  double density_trace = 1e-12;
  double density_min_eigenvalue = -1e-10;
  double local_state_norm = 1e-12;
  double superposition_norm = 1e-10;
  double fisher_symmetry = 1e-10;
  double fisher_min_eigenvalue = -1e-8;  // relative to max(1, lambda_max)
  double rank_relative = 1e-10;          // eigenvalues below this * lambda_max count as zero
  double filter_series = 1e-6;           // |x| below which f(x) = (e^{ix}-1)/(ix) uses its Taylor series
  double sinc_series = 1e-4;             // xi below which sinc terms use Taylor series
  double attainability = 1e-8;           // max |<[L_k, L_l]>| accepted by the optimal POVM
  double marginal_consistency = 1e-8;
  double povm_completeness = 1e-10;
  double povm_psd = 1e-10;
  double probability_slack = 1e-12;
  double probability_floor = 1e-14;
  double gradient_consistency = 1e-4;    // |dp| <= sqrt(p) * this for p below the floor
  double gram_schmidt_reorthogonalize = 1e-8;
};

struct Config {
  Tolerances tol;
  /// Largest qubit count for which dense state vectors are built.
  int dense_cap = 14;
  /// Largest qubit count for which full 2^N x 2^N operators are materialized.
  int operator_cap = 10;
  /// Symmetric offset used wherever a quantity is quoted "at phi -> 0".
  double phi_zero_offset = 1e-7;
};

/// Builds a configuration from defaults plus the FIELDEST_DENSE_CAP
/// environment variable, when set.
inline Config load_config() {
  Config c;
  if (const char* cap = std::getenv("FIELDEST_DENSE_CAP"); cap != nullptr && *cap != '\0') {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end == cap || *end != '\0' || v < 1 || v > 26) {
      throw std::invalid_argument("FIELDEST_DENSE_CAP must be an integer in [1, 26], got '" +
                                  std::string(cap) + "'");
    }
    c.dense_cap = static_cast<int>(v);
    if (c.operator_cap > c.dense_cap) c.operator_cap = c.dense_cap;
  }
  return c;
}

inline const Config& config() {
  static const Config c = load_config();
  return c;
}

inline const Tolerances& tol() { return config().tol; }

}  // namespace fieldest
