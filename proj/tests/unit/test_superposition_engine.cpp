#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fieldest/probe_states.hpp"
#include "fieldest/superposition_engine.hpp"
#include "oracles.hpp"

using namespace fieldest;

namespace {

ProductStateSuperposition uniform(Axis k, int sign, int n) {
  return {n, {{cplx{1.0}, pauli_eigenvector(k, sign)}}, true};
}

ProductStateSuperposition branch(Axis k, int n) {
  return {n, {{cplx{1.0}, pauli_eigenvector(k, 1)}, {cplx{1.0}, pauli_eigenvector(k, -1)}}, false};
}

UnitaryOperator field_unitary(const FieldParams& p) { return unitary_from_hamiltonian(single_particle_h(p)); }

}  // namespace

TEST(Overlap, Examples) {
  for (int n : {1, 2, 7, 64}) {
    const auto g = ghz_state(Axis::z, n);
    EXPECT_NEAR(std::abs(engine::overlap(g, g) - 1.0), 0.0, 1e-14);
  }
  const int n = 100;
  const cplx v = engine::overlap(uniform(Axis::z, 1, n), uniform(Axis::x, 1, n));
  const double expected = std::pow(2.0, -n / 2.0);
  EXPECT_LE(std::abs(v - expected), 1e-12 * expected);

  const CVector phi1 = dense_amplitudes(branch(Axis::x, 8));
  const CVector phi3 = dense_amplitudes(branch(Axis::z, 8));
  EXPECT_LT(std::abs(engine::overlap(branch(Axis::x, 8), branch(Axis::z, 8)) - phi1.dot(phi3)), 1e-12);
  EXPECT_THROW(engine::overlap(uniform(Axis::z, 1, 3), uniform(Axis::z, 1, 4)), DomainError);
}

TEST(Overlap, HugeNUnderflowsGracefully) {
  const cplx v = engine::overlap(uniform(Axis::z, 1, 10000), uniform(Axis::x, 1, 10000));
  EXPECT_EQ(v, cplx{});
  const auto g = triple_ghz_probe(10000);
  EXPECT_NEAR(engine::overlap(g, g).real(), 1.0, 1e-10);
}

TEST(ApplyLocalUnitary, Examples) {
  const auto g = triple_ghz_probe(6);
  const auto same = engine::apply_local_unitary(g, UnitaryOperator(CMatrix(CMatrix::Identity(2, 2))));
  EXPECT_LT((dense_amplitudes(same) - dense_amplitudes(g)).norm(), 1e-15);
  EXPECT_EQ(same.terms().size(), g.terms().size());

  // e^{-iθσ3} on GHZ_3 picks up a relative phase e^{2iNθ} between the branches.
  const int n = 6;
  const double theta = 0.13;
  const auto rotated = engine::apply_local_unitary(ghz_state(Axis::z, n), field_unitary(FieldParams(0, 0, theta)));
  const CVector expected = dense_amplitudes(ghz_state(Axis::z, n, 2.0 * n * theta));
  const cplx phase = expected.dot(dense_amplitudes(rotated));
  EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);

  const auto probe = triple_ghz_probe(9);
  const auto moved = engine::apply_local_unitary(probe, field_unitary(FieldParams(0.3, -0.2, 0.5)));
  EXPECT_NEAR(moved.norm_squared(), 1.0, 1e-12);
}

TEST(ApplyLocalUnitary, MatchesDense) {
  const FieldParams p(0.2, 0.1, -0.4);
  const auto u = field_unitary(p);
  for (int n : {4, 6, 8}) {
    const auto probe = triple_ghz_probe(n);
    const CVector dense = apply_uniform(u.matrix(), dense_amplitudes(probe));
    EXPECT_LT((dense_amplitudes(engine::apply_local_unitary(probe, u)) - dense).norm(), 1e-12);
  }
}

TEST(ApplyLocalUnitary, CommutesWithOverlap) {
  const auto u = field_unitary(FieldParams(0.7, -0.1, 0.25));
  for (int n : {5, 24, 301}) {
    const auto a = triple_ghz_probe(n);
    const auto b = ghz_state(Axis::y, n, 0.4);
    const cplx before = engine::overlap(a, b);
    const cplx after = engine::overlap(engine::apply_local_unitary(a, u), engine::apply_local_unitary(b, u));
    EXPECT_LE(std::abs(before - after), 1e-11) << n;
  }
}

TEST(PauliStringExpectation, Examples) {
  for (int n : {2, 4, 8, 100}) EXPECT_NEAR(engine::pauli_string_expectation(ghz_state(Axis::z, n), Axis::z), 1.0, 1e-14);
  for (int n : {1, 3, 8, 51}) EXPECT_NEAR(engine::pauli_string_expectation(ghz_state(Axis::z, n), Axis::x), 1.0, 1e-14);
  const auto probe = triple_ghz_probe(8);
  const CVector v = dense_amplitudes(probe);
  for (Axis k : kAxes) {
    const double dense = v.dot(apply_uniform(pauli_matrix(index(k)), v)).real();
    EXPECT_NEAR(engine::pauli_string_expectation(probe, k), dense, 1e-10);
  }
}

TEST(InsertedSumOverlap, Examples) {
  const int n = 9;
  const auto zeros = uniform(Axis::z, 1, n);
  EXPECT_LT(std::abs(engine::inserted_sum_overlap(zeros, zeros, pauli_matrix(0))), 1e-15);
  EXPECT_LT(std::abs(engine::inserted_sum_overlap(zeros, zeros, pauli_matrix(2)) - static_cast<double>(n)), 1e-13);

  const FieldParams p(1e-4, 2e-4, 3e-4);
  const auto probe = triple_ghz_probe(8);
  const CVector v = dense_amplitudes(probe);
  for (int k = 0; k < 3; ++k) {
    const Mat2 a = a_local(p, k).matrix();
    const cplx dense = v.dot(apply_local_sum(a, v));
    EXPECT_LT(std::abs(engine::inserted_sum_overlap(probe, probe, a) - dense), 1e-10);
  }
}

TEST(InsertedSumOverlap, ZeroSingleSiteOverlapPairsVanish) {
  // <0|1> = 0 so every pair term is 0·(...) for N >= 2, but N = 1 keeps <0|op|1>.
  const auto a = uniform(Axis::z, 1, 1), b = uniform(Axis::z, -1, 1);
  EXPECT_LT(std::abs(engine::inserted_sum_overlap(a, b, pauli_matrix(0)) - 1.0), 1e-15);
  const auto a2 = uniform(Axis::z, 1, 2), b2 = uniform(Axis::z, -1, 2);
  EXPECT_EQ(engine::inserted_sum_overlap(a2, b2, pauli_matrix(0)), cplx{});
}

TEST(SiteMarginal, MatchesDenseReduction) {
  for (int n : {4, 6, 8, 10, 12}) {
    const auto probe = triple_ghz_probe(n);
    const PureState psi = dense_statevector(probe);
    EXPECT_LT(oracle::max_abs(engine::site_marginal(probe, 1) - reduced_density_matrix(psi, {0}).matrix()), 1e-12);
    EXPECT_LT(oracle::max_abs(engine::site_marginal(probe, 2) - reduced_density_matrix(psi, {0, 1}).matrix()), 1e-12);
  }
  EXPECT_THROW(engine::site_marginal(triple_ghz_probe(4), 3), DomainError);
}

TEST(EngineDenseEquivalence, RandomSuperpositions) {
  std::mt19937 rng(41);
  std::normal_distribution<double> g;
  auto random_local = [&] {
    Vec2 v;
    v << cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)};
    return Vec2(v.normalized());
  };
  for (int n : {4, 6, 8, 10, 12}) {
    std::vector<ProductTerm> ta, tb;
    for (int i = 0; i < 4; ++i) ta.push_back({cplx{g(rng), g(rng)}, random_local()});
    for (int i = 0; i < 3; ++i) tb.push_back({cplx{g(rng), g(rng)}, random_local()});
    const ProductStateSuperposition a(n, ta, false), b(n, tb, false);
    const CVector va = dense_amplitudes(a), vb = dense_amplitudes(b);
    const double scale = va.norm() * vb.norm();
    EXPECT_LE(std::abs(engine::overlap(a, b) - va.dot(vb)), 1e-9 * scale);
    CMatrix m(2, 2);
    m << g(rng), cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}, g(rng);
    EXPECT_LE(std::abs(engine::inserted_sum_overlap(a, b, m) - va.dot(apply_local_sum(m, vb))), 1e-9 * scale * n);
    const ProductStateSuperposition an = a.normalized_copy();
    EXPECT_NEAR(dense_amplitudes(an).norm(), 1.0, 1e-9);
  }
}
