#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fieldest {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DenseCapExceeded : public Error {
 public:
  DenseCapExceeded(int n_sites, int cap)
      : Error("dense representation requested for " + std::to_string(n_sites) +
              " sites, cap is " + std::to_string(cap)),
        n_sites_(n_sites),
        cap_(cap) {}
  int n_sites() const { return n_sites_; }
  int cap() const { return cap_; }

 private:
  int n_sites_;
  int cap_;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

/// Thrown when a Fisher matrix cannot be inverted. Carries the eigenvectors
/// spanning the numerically null subspace.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& what, std::vector<Eigen::VectorXd> null_directions)
      : Error(what), null_directions_(std::move(null_directions)) {}
  const std::vector<Eigen::VectorXd>& null_directions() const { return null_directions_; }

 private:
  std::vector<Eigen::VectorXd> null_directions_;
};

class AttainabilityError : public Error {
 public:
  using Error::Error;
};

class LinearDependenceError : public Error {
 public:
  using Error::Error;
};

class PovmInvalidError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fieldest
