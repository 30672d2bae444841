#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fieldest/product_superposition.hpp"

namespace fieldest {

/// |Ψ><Ψ| with Ψ a product-state superposition.
struct SuperpositionProjector {
  ProductStateSuperposition target;
};

/// |e><e| with e a dense unit vector.
struct DenseProjector {
  CVector target;
};

/// (1 + sign · σ_axis^{⊗N}) · weight; weight 1/6 in the Pauli-string family.
struct PauliStringElement {
  Axis axis;
  int sign;
  double weight = 1.0 / 6.0;
};

/// 1 - Σ (all other elements). At most one per POVM, always last.
struct Complement {};

using PovmElement = std::variant<SuperpositionProjector, DenseProjector, PauliStringElement, Complement>;

class Povm {
 public:
  Povm(int n_sites, std::vector<PovmElement> elements, std::vector<std::string> labels)
      : n_(n_sites), elements_(std::move(elements)), labels_(std::move(labels)) {
    if (elements_.size() != labels_.size()) throw DomainError("one label per POVM element required");
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      if (std::holds_alternative<Complement>(elements_[i]) && i + 1 != elements_.size()) {
        throw DomainError("the complement element must come last");
      }
      if (const auto* p = std::get_if<SuperpositionProjector>(&elements_[i]); p && p->target.n_sites() != n_) {
        throw DomainError("projector target has the wrong number of sites");
      }
      if (const auto* p = std::get_if<DenseProjector>(&elements_[i]);
          p && p->target.size() != (Eigen::Index{1} << n_)) {
        throw DomainError("dense projector target has the wrong dimension");
      }
    }
  }

  int n_sites() const { return n_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<PovmElement>& elements() const { return elements_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Relative phases δ_k of the GHZ projector family, when applicable.
  const std::optional<std::array<double, 3>>& phases() const { return phases_; }
  Povm& set_phases(std::array<double, 3> p) {
    phases_ = p;
    return *this;
  }

 private:
  int n_;
  std::vector<PovmElement> elements_;
  std::vector<std::string> labels_;
  std::optional<std::array<double, 3>> phases_;
};

}  // namespace fieldest
