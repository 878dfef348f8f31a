#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qsynth/linalg.hpp"
#include "qsynth/rng.hpp"

using namespace qsynth;

namespace {

Matrix random_matrix(std::size_t dim, Rng& rng) {
  Matrix a(dim, dim);
  for (auto& x : a.data()) x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return a;
}

Su2 random_su2(Rng& rng) { return su2_exp(rng.uniform(0, 6.3), rng.uniform(0, 6.3), rng.uniform(0, 6.3)); }

}  // namespace

TEST(Kron, IdentityTimesIdentity) { EXPECT_EQ(kron(Matrix::identity(2), Matrix::identity(2)), Matrix::identity(4)); }

TEST(Kron, PauliXTensorIdentityIsPermutation) {
  const Matrix k = kron(pauli_x(), Matrix::identity(2));
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const bool one = (r == 0 && c == 2) || (r == 1 && c == 3) || (r == 2 && c == 0) || (r == 3 && c == 1);
      EXPECT_EQ(k(r, c), Complex(one ? 1.0 : 0.0)) << r << "," << c;
    }
  }
}

TEST(Kron, ZTensorZ) {
  const std::vector<Complex> d{1.0, -1.0, -1.0, 1.0};
  EXPECT_EQ(kron(pauli_z(), pauli_z()), Matrix::diagonal(d));
}

TEST(Kron, Associative) {
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    const Matrix a = random_matrix(2, rng), b = random_matrix(2, rng), c = random_matrix(4, rng);
    EXPECT_LT(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-13);
  }
}

TEST(Kron, RejectsOversizedResult) {
  EXPECT_THROW(kron(Matrix::identity(8), Matrix::identity(8)), std::length_error);
}

TEST(EmbedSingle, ZOnQubitZeroIsMostSignificant) {
  const std::vector<Complex> d{1.0, 1.0, -1.0, -1.0};
  EXPECT_EQ(embed_single(pauli_z(), 0, 2), Matrix::diagonal(d));
}

TEST(EmbedSingle, IdentityAnywhere) {
  for (int n = 1; n <= 4; ++n) {
    for (int k = 0; k < n; ++k) EXPECT_EQ(embed_single(Matrix::identity(2), k, n), Matrix::identity(1u << n));
  }
}

TEST(EmbedSingle, XOnQubitOneFlipsLowBit) {
  const StateVector out = embed_single(pauli_x(), 1, 2) * StateVector::zero(2);
  EXPECT_LT(max_abs_diff(out, StateVector::basis(2, 1)), 1e-15);
}

TEST(EmbedSingle, DifferentQubitsCommute) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = embed_single(random_matrix(2, rng), 0, 3);
    const Matrix b = embed_single(random_matrix(2, rng), 2, 3);
    EXPECT_LT(max_abs_diff(a * b, b * a), 1e-13);
  }
}

TEST(Su2Exp, ZeroIsIdentity) { EXPECT_LT(max_abs_diff(su2_exp(0, 0, 0).to_matrix(), Matrix::identity(2)), 1e-15); }

TEST(Su2Exp, HalfTurnAboutX) {
  const Matrix expected = pauli_x() * Complex{0.0, -1.0};
  EXPECT_LT(max_abs_diff(su2_exp(std::numbers::pi / 2, 0, 0).to_matrix(), expected), 1e-15);
}

TEST(Su2Exp, MatchesTaylorSeries) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    double v[3];
    do {
      for (auto& x : v) x = rng.uniform(-1, 1);
    } while (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] > 1.0);
    const Matrix exact = su2_exp(v[0], v[1], v[2]).to_matrix();
    EXPECT_LT(max_abs_diff(exact, oracle::taylor_exp(v[0], v[1], v[2], 20)), 1e-12);
    // The 12th-order series is itself only good to its remainder, ||v||^13 / 13!.
    EXPECT_LT(max_abs_diff(exact, oracle::taylor_exp(v[0], v[1], v[2], 12)), 2.0 / 6227020800.0);
  }
}

TEST(Su2Exp, Unitary) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) EXPECT_LT(unitarity_defect(random_su2(rng)), 1e-12);
}

TEST(Su2, ReunitarizeBoundsDriftOverManyProducts) {
  Rng rng(9);
  Su2 u;
  for (int i = 1; i <= 1'000'000; ++i) {
    u = su2_exp(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)) * u;
    if (i % 10'000 == 0) u.reunitarize();
  }
  EXPECT_LT(unitarity_defect(u), 1e-10);
}

TEST(TraceInner, Examples) {
  EXPECT_EQ(trace_inner(Matrix::identity(4), Matrix::identity(4)), Complex(4.0));
  EXPECT_EQ(trace_inner(pauli_x(), pauli_y()), Complex(0.0));
}

TEST(TraceInner, SelfIsFrobeniusNormSquared) {
  Rng rng(2);
  const Matrix a = random_matrix(8, rng);
  double frob = 0.0;
  for (const auto& x : a.data()) frob += std::norm(x);
  const Complex t = trace_inner(a, a);
  EXPECT_NEAR(t.real(), frob, 1e-12);
  EXPECT_NEAR(t.imag(), 0.0, 1e-12);
}

TEST(Kernels, ApplySingleMatchesEmbeddedMatrix) {
  Rng rng(13);
  for (int n = 1; n <= 5; ++n) {
    const std::size_t dim = std::size_t{1} << n;
    Matrix block = random_matrix(dim, rng);
    for (int q = 0; q < n; ++q) {
      const Su2 u = random_su2(rng);
      const Matrix expected = embed_single(u, q, n) * block;
      apply_single(block.data(), dim, n, q, u);
      EXPECT_LT(max_abs_diff(block, expected), 1e-13);
    }
  }
}

TEST(Kernels, ApplyControlledMatchesProjectorSum) {
  Rng rng(17);
  const int n = 3;
  const Matrix p1 = Matrix::diagonal(std::vector<Complex>{0.0, 1.0});
  const Matrix p0 = Matrix::diagonal(std::vector<Complex>{1.0, 0.0});
  for (int c = 0; c < n; ++c) {
    for (int t = 0; t < n; ++t) {
      if (c == t) continue;
      const Su2 u = random_su2(rng);
      const Matrix cu = embed_single(p0, c, n) + embed_single(p1, c, n) * embed_single(u, t, n);
      Matrix block = random_matrix(8, rng);
      const Matrix expected = cu * block;
      apply_controlled(block.data(), 8, n, c, t, u);
      EXPECT_LT(max_abs_diff(block, expected), 1e-13);
    }
  }
}

TEST(Kernels, PhaseFlipOnMask) {
  Matrix block = Matrix::identity(4);
  apply_phase_flip(block.data(), 4, 0b11);
  EXPECT_EQ(block, Matrix::diagonal(std::vector<Complex>{1.0, 1.0, 1.0, -1.0}));
}

TEST(StateVector, RejectsNonPowerOfTwo) {
  EXPECT_THROW(StateVector(std::vector<Complex>(3, 1.0)), std::invalid_argument);
}

TEST(Determinant, DiagonalAndPermutation) {
  EXPECT_NEAR(std::abs(determinant(pauli_x()) + Complex(1.0)), 0.0, 1e-15);
  const std::vector<Complex> d{2.0, Complex(0, 1), 3.0, 1.0};
  EXPECT_NEAR(std::abs(determinant(Matrix::diagonal(d)) - Complex(0, 6)), 0.0, 1e-14);
}
