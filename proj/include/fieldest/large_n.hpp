#pragma once

#include "fieldest/classical_fim.hpp"

namespace fieldest {

/// Classical FIM of the triple-GHZ probe under POVM family 1 or 2, using
/// the product-superposition engine; cost does not grow with N.
inline FisherMatrix large_n_fim(int n_sites, const FieldParams& p, int family,
                                const Phases& povm_deltas = kDefaultPovmPhases,
                                const Phases& probe_deltas = {0.0, 0.0, 0.0},
                                Backend backend = Backend::superposition) {
  if (family == 1 && n_sites % 2 != 0) throw DomainError("POVM family 1 needs even N");
  const Povm povm = povm_family(family, n_sites, povm_deltas);
  return classical_fim(triple_ghz_probe(n_sites, probe_deltas), p, povm, backend);
}

}  // namespace fieldest
