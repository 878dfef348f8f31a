#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "qsynth/circuit.hpp"
#include "qsynth/grape.hpp"

using namespace qsynth;

namespace {

GateConfiguration random_config(const ConfigSpace& space, int N, Rng& rng) {
  return space.decode(rng.below(space.size(N)), N);
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

TEST(ConfigSpace, KnownCounts) {
  EXPECT_EQ(ConfigSpace(3, 2).size(14), 4'782'969u);
  EXPECT_EQ(ConfigSpace(4, 2).size(6), 46'656u);
  EXPECT_EQ(ConfigSpace(3, 2).size(6), 729u);
  for (int N = 0; N < 5; ++N) EXPECT_EQ(ConfigSpace(4, 4).size(N), 1u);
  EXPECT_EQ(ConfigSpace(3, 2, EntanglerKind::controlled_u).size(4), 1296u);
}

TEST(ConfigSpace, CountIsBinomialPower) {
  for (int n = 2; n <= 4; ++n) {
    for (int m = 2; m <= n; ++m) {
      for (int N = 0; N <= 8; ++N) {
        EXPECT_EQ(ConfigSpace(n, m).size(N), ipow(oracle::binomial(n, m), N));
        const auto view = enumerate_configs(ConfigSpace(n, m), std::min(N, 3));
        EXPECT_EQ(static_cast<std::uint64_t>(std::ranges::distance(view)), ipow(oracle::binomial(n, m), std::min(N, 3)));
      }
    }
  }
}

TEST(ConfigSpace, CapEnforced) { EXPECT_THROW(ConfigSpace(4, 2).size(20), std::overflow_error); }

TEST(ConfigSpace, EncodeDecodeRoundTripAndCanonical) {
  const ConfigSpace space(4, 2);
  std::set<std::string> seen;
  for (const auto& c : enumerate_configs(space, 3)) {
    EXPECT_EQ(space.decode(space.encode(c), 3), c);
    for (const auto& g : c.gates) {
      ASSERT_EQ(g.size(), 2u);
      EXPECT_LT(g[0], g[1]);
    }
    seen.insert(to_text(c));
  }
  EXPECT_EQ(seen.size(), 216u);
  // Gate 0 is the least significant digit.
  EXPECT_EQ(space.decode(1, 2).gates[0], (std::vector<int>{0, 2}));
  EXPECT_EQ(space.decode(1, 2).gates[1], (std::vector<int>{0, 1}));
}

TEST(ConfigText, RoundTrip) {
  const auto c = parse_config("6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)", 4);
  EXPECT_EQ(c.size(), 6);
  EXPECT_EQ(to_text(c), "6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)");
  const auto cu = parse_config("2@cu: (1,2)(2,0)", 3);
  EXPECT_EQ(cu.kind, EntanglerKind::controlled_u);
  EXPECT_EQ(parse_config(to_text(cu), 3), cu);
  EXPECT_THROW(parse_config("2@2: (0,0)(0,1)", 3), std::invalid_argument);
  EXPECT_THROW(parse_config("1@2: (0,5)", 3), std::out_of_range);
}

TEST(Depth, Examples) {
  EXPECT_EQ(depth(parse_config("6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)", 4)), 4);
  EXPECT_EQ(depth(parse_config("4@2: (1,2)(1,2)(1,2)(1,2)", 4)), 4);
  Rng rng(1);
  const ConfigSpace s3(3, 2);
  for (int t = 0; t < 50; ++t) {
    const int N = 1 + static_cast<int>(rng.below(8));
    EXPECT_EQ(depth(random_config(s3, N, rng)), N);
  }
}

TEST(Depth, BoundsAndOracle) {
  Rng rng(2);
  for (int m = 2; m <= 4; ++m) {
    const ConfigSpace space(4, m);
    for (int t = 0; t < 100; ++t) {
      const int N = static_cast<int>(rng.below(9));
      const auto c = random_config(space, N, rng);
      const int d = depth(c);
      EXPECT_EQ(d, oracle::asap_depth(c));
      EXPECT_LE(d, N);
      EXPECT_GE(d, (N * m + 3) / 4);
      EXPECT_EQ(depth(reverse(c)), oracle::asap_depth(reverse(c)));
      EXPECT_EQ(depth(reverse(c)), d);
    }
  }
}

TEST(Permute, IdentityInverseAndOrbitSize) {
  const ConfigSpace space(4, 2);
  Rng rng(3);
  const auto perms = all_permutations(4);
  ASSERT_EQ(perms.size(), 24u);
  for (int t = 0; t < 30; ++t) {
    const auto c = random_config(space, 5, rng);
    EXPECT_EQ(permute(c, {0, 1, 2, 3}), c);
    const auto& p = perms[rng.below(24)];
    std::vector<int> inv(4);
    for (int q = 0; q < 4; ++q) inv[p[q]] = q;
    EXPECT_EQ(permute(permute(c, p), inv), c);
    std::set<std::uint64_t> orbit;
    for (const auto& q : perms) orbit.insert(space.encode(permute(c, q)));
    EXPECT_EQ(24 % orbit.size(), 0u);
  }
}

TEST(Reverse, InvolutionAndPalindrome) {
  const auto c = parse_config("3@2: (0,1)(1,2)(0,2)", 3);
  EXPECT_EQ(reverse(reverse(c)), c);
  EXPECT_EQ(to_text(reverse(c)), "3@2: (0,2)(1,2)(0,1)");
  const auto pal = parse_config("3@2: (0,1)(1,2)(0,1)", 3);
  EXPECT_EQ(reverse(pal), pal);
}

TEST(ParamCircuit, RotationCounts) {
  const auto c = parse_config("6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)", 4);
  EXPECT_EQ(ParamCircuit::rotation_count(c), 16u);
  EXPECT_EQ(ParamCircuit::rotation_count(parse_config("5@cu: (1,2)(0,1)(1,2)(0,1)(0,2)", 3)), 3u + 15u);
  EXPECT_EQ(ParamCircuit::gate_offset(c, 0), 4u);
  EXPECT_EQ(ParamCircuit::gate_offset(c, 2), 8u);
}

TEST(Compose, EmptyAndBareGate) {
  GateConfiguration empty{3, 2, EntanglerKind::cz, {}};
  EXPECT_LT(max_abs_diff(compose(ParamCircuit::identity(empty)), Matrix::identity(8)), 1e-15);
  const auto one = parse_config("1@3: (0,1,2)", 3);
  EXPECT_LT(max_abs_diff(compose(ParamCircuit::identity(one)), multi_cz(3, {0, 1, 2})), 1e-15);
}

TEST(Compose, UnitaryAndMatchesStatePropagation) {
  Rng rng(4);
  for (auto kind : {EntanglerKind::cz, EntanglerKind::controlled_u}) {
    for (int n = 2; n <= 4; ++n) {
      const ConfigSpace space(n, 2, kind);
      const auto c = random_config(space, 4, rng);
      const ParamCircuit pc = init_rotations(c, rng);
      const Matrix u = compose(pc);
      EXPECT_LT(unitarity_defect(u), 1e-10);
      for (std::size_t b = 0; b < u.cols(); ++b) {
        const StateVector col = apply_to_state(pc, StateVector::basis(n, b));
        for (std::size_t r = 0; r < u.rows(); ++r) EXPECT_LT(std::abs(col[r] - u(r, b)), 1e-12);
      }
    }
  }
}

TEST(ApplyToState, IdentityAndNorm) {
  Rng rng(5);
  const auto c = parse_config("3@2: (0,1)(1,2)(0,2)", 3);
  const StateVector psi = random_state(3, rng);
  EXPECT_LT(max_abs_diff(apply_to_state(ParamCircuit::identity(c), psi), multi_cz(3, {0, 1}) * (multi_cz(3, {1, 2}) * (multi_cz(3, {0, 2}) * psi))), 1e-14);
  GateConfiguration empty{3, 2, EntanglerKind::cz, {}};
  EXPECT_LT(max_abs_diff(apply_to_state(ParamCircuit::identity(empty), psi), psi), 1e-15);
  const ParamCircuit pc = init_rotations(c, rng);
  EXPECT_NEAR(apply_to_state(pc, psi).norm(), 1.0, 1e-12);
}
