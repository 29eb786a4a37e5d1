#include <gtest/gtest.h>

#include <cmath>

#include "rgt/phasor.hpp"
#include "rgt/random.hpp"

using namespace rgt;

TEST(MassVector, UnitVoltage) {
  const auto m = mass_vector(NetworkState::global({NodeState{{1, 0}, {0, 0}, 0.0}}));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], (MassPair{1.0, 0.0}));
}

TEST(MassVector, SymmetricPair) {
  const auto m = mass_vector(
      NetworkState::global({NodeState{{0.5, 0}, {0.5, 0}, 0.0}, NodeState{{0.5, 0}, {0.5, 0}, 0.0}}));
  EXPECT_EQ(m[0], (MassPair{0.25, 0.25}));
  EXPECT_EQ(m[1], (MassPair{0.25, 0.25}));
}

TEST(MassVector, ThreeFourFive) {
  const auto m = mass_vector(NetworkState::global({NodeState{{0.6, 0}, {0, 0.8}, kPi / 2}}));
  EXPECT_NEAR(m[0].v2, 0.36, 1e-15);
  EXPECT_NEAR(m[0].i2, 0.64, 1e-15);
}

TEST(NetworkState, RejectsMassOffSimplex) {
  EXPECT_THROW(NetworkState::global({NodeState{{0.6, 0}, {0, 0.7}, 0.0}}), DomainError);
  EXPECT_NO_THROW(NetworkState::global({NodeState{{0.6, 0}, {0, std::sqrt(0.64 + 5e-10)}, 0.0}}));
}

TEST(NetworkState, RejectsBadPartition) {
  std::vector<NodeState> nodes(2, make_node(0.25, 0.25, 0.0));
  EXPECT_THROW(NetworkState(nodes, {Subgroup{{0}}}), DomainError);
  EXPECT_THROW(NetworkState(nodes, {Subgroup{{0, 1}}, Subgroup{{1}}}), DomainError);
  EXPECT_THROW(NetworkState(nodes, {Subgroup{{0, 2}}}), DomainError);
  EXPECT_THROW(NetworkState::global({}), DomainError);
}

TEST(NetworkState, SubgroupsEachSumToOne) {
  std::vector<NodeState> nodes{make_node(0.3, 0.7, 1.0), make_node(0.1, 0.2, 1.0), make_node(0.4, 0.3, 1.0)};
  const NetworkState s(nodes, {Subgroup{{0}}, Subgroup{{1, 2}}});
  EXPECT_LT(s.conservation_residual(), 1e-12);
  EXPECT_EQ(s.group_of(), (std::vector<std::size_t>{0, 1, 1}));
}

TEST(Renormalize, DriftIsRemoved) {
  auto s = NetworkState::unchecked({make_node(0.5, 0.5000000001, 0.3, 0.7)}, {Subgroup{{0}}});
  const double angle = phase(s[0].v);
  s = renormalize(s);
  EXPECT_NEAR(s.group_mass(0), 1.0, 2.3e-16);
  EXPECT_DOUBLE_EQ(phase(s[0].v), angle);
}

TEST(Renormalize, NormalizedStateUnchanged) {
  const auto s = NetworkState::global({make_node(0.25, 0.75, 0.3)});
  const auto r = renormalize(s);
  EXPECT_NEAR(r[0].v.real(), s[0].v.real(), 4e-16);
  EXPECT_NEAR(r[0].i.imag(), s[0].i.imag(), 4e-16);
}

TEST(Renormalize, ProportionalScaling) {
  auto s = NetworkState::unchecked({make_node(3.0, 0.0, 0.0), make_node(0.0, 1.0, 0.0)}, {Subgroup{{0, 1}}});
  s = renormalize(s);
  EXPECT_NEAR(s[0].mass(), 0.75, 1e-15);
  EXPECT_NEAR(s[1].mass(), 0.25, 1e-15);
}

TEST(Renormalize, ZeroMassThrows) {
  auto s = NetworkState::unchecked({make_node(0.0, 0.0, 0.0)}, {Subgroup{{0}}});
  EXPECT_THROW(renormalize(s), ZeroMassError);
}

TEST(Renormalize, PerSubgroupResidualWithinOneUlp) {
  Rng r(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<NodeState> nodes;
    for (int k = 0; k < 6; ++k) nodes.push_back(make_node(r.uniform(0, 3), r.uniform(0, 3), 0.1, r.uniform(-3, 3)));
    auto s = renormalize(NetworkState::unchecked(nodes, {Subgroup{{0, 3}}, Subgroup{{1, 2, 4, 5}}}));
    EXPECT_LE(s.conservation_residual(), 4.5e-16);
  }
}

TEST(BoundedToSimplex, Examples) {
  EXPECT_EQ(bounded_to_simplex(1.0), std::make_pair(1.0, 0.0));
  EXPECT_EQ(bounded_to_simplex(0.0), std::make_pair(0.5, 0.5));
  EXPECT_EQ(bounded_to_simplex(-0.5), std::make_pair(0.25, 0.75));
  EXPECT_THROW(bounded_to_simplex(1.0000001), DomainError);
}

TEST(BoundedToSimplex, DifferenceRoundTrips) {
  Rng r(6);
  for (int t = 0; t < 1000; ++t) {
    const double x = r.uniform(-1, 1);
    const auto [p, m] = bounded_to_simplex(x);
    EXPECT_NEAR(p - m, x, 1e-15);
    EXPECT_NEAR(p + m, 1.0, 1e-15);
  }
}

TEST(Phase, RoundTripAndRange) {
  Rng r(7);
  for (int t = 0; t < 1000; ++t) {
    const double mag = std::pow(10.0, r.uniform(-29, 3));
    const double ang = r.uniform(-kPi, kPi);
    const Phasor p = from_polar(mag, ang);
    EXPECT_NEAR(std::abs(p), mag, 1e-12 * mag);
    EXPECT_NEAR(phase(p), ang, 1e-12);
  }
  EXPECT_EQ(phase(Phasor{0, 0}), 0.0);
  EXPECT_EQ(phase(Phasor{-1, -0.0}), kPi);
  EXPECT_EQ(phase(Phasor{-1, 0}), kPi);
}

TEST(Rng, MatchesReferenceGenerator) {
  Rng a(42);
  EXPECT_EQ(a.next(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(a.next(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(a.next(), 0xae17533239e499a1ULL);
  Rng b(7, 3);
  EXPECT_EQ(b.next(), 0xd88d886bb833247cULL);
  EXPECT_EQ(b.next(), 0xcae3895e9c256b2dULL);
  EXPECT_EQ(Rng(42).uniform(), 0.08386297105988216);
}

TEST(Rng, UniformMoments) {
  Rng u(1);
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double x = u.uniform();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / 1e5, 0.5, 0.005);
  EXPECT_NEAR(sq / 1e5 - 0.25, 1.0 / 12.0, 0.003);
}
