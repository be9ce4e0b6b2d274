// Copyright 2026 The qloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qloss/numerics.hpp"

namespace qloss {
namespace {

using oracle::C;

TEST(Permanent, SmallClosedForms) {
  EXPECT_EQ(permanent(ComplexMatrix(0, 0)), Complex(1.0));
  ComplexMatrix a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  EXPECT_NEAR(std::abs(permanent(a) - Complex(10.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(permanent(ComplexMatrix::Identity(3, 3)) - Complex(1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(permanent(ComplexMatrix::Ones(4, 4)) - Complex(24.0)), 0.0, 1e-12);
}

TEST(Permanent, UnnormalizedDftOfThreeIsMinusThree) {
  ComplexMatrix w(3, 3);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) w(j, k) = std::polar(1.0, 2.0 * std::numbers::pi * j * k / 3.0);
  const C brute = oracle::permanent_bruteforce(w);
  EXPECT_NEAR(std::abs(brute - C(-3.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(permanent_ryser(w) - brute), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(permanent_glynn(w) - brute), 0.0, 1e-12);
}

TEST(Permanent, RyserAndGlynnMatchBruteForce) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const ComplexMatrix m = oracle::random_matrix(n, rng);
      const C ref = oracle::permanent_bruteforce(m);
      const double scale = std::max(1.0, std::abs(ref));
      EXPECT_LT(std::abs(permanent_ryser(m) - ref) / scale, 1e-10) << "n=" << n;
      EXPECT_LT(std::abs(permanent_glynn(m) - ref) / scale, 1e-10) << "n=" << n;
    }
  }
}

TEST(Permanent, InvariantUnderRowAndColumnPermutation) {
  std::mt19937_64 rng(11);
  const ComplexMatrix m = oracle::random_matrix(6, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(6), q(6);
  p.setIdentity();
  q.setIdentity();
  std::vector<int> idx = {3, 0, 5, 1, 4, 2};
  for (int i = 0; i < 6; ++i) p.indices()[i] = idx[static_cast<std::size_t>(i)];
  std::reverse(idx.begin(), idx.end());
  for (int i = 0; i < 6; ++i) q.indices()[i] = idx[static_cast<std::size_t>(i)];
  const ComplexMatrix pm = p * m * q;
  EXPECT_LT(std::abs(permanent(pm) - permanent(m)), 1e-10 * std::max(1.0, std::abs(permanent(m))));
  EXPECT_LT(std::abs(permanent(ComplexMatrix(m.transpose())) - permanent(m)), 1e-10 * std::max(1.0, std::abs(permanent(m))));
}

TEST(Permanent, MultilinearInEachRow) {
  std::mt19937_64 rng(13);
  const ComplexMatrix a = oracle::random_matrix(5, rng);
  const ComplexMatrix b = oracle::random_matrix(5, rng);
  const C alpha(0.3, -1.2), beta(-0.7, 0.4);
  for (int row = 0; row < 5; ++row) {
    ComplexMatrix ma = a, mb = a, mc = a;
    mb.row(row) = b.row(row);
    mc.row(row) = alpha * a.row(row) + beta * b.row(row);
    const C lhs = permanent(mc);
    const C rhs = alpha * permanent(ma) + beta * permanent(mb);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Permanent, RejectsBadShapes) {
  EXPECT_THROW(permanent(ComplexMatrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(permanent(ComplexMatrix::Zero(kMaxPermanentSize + 1, kMaxPermanentSize + 1)), std::invalid_argument);
  EXPECT_THROW(permanent_glynn(ComplexMatrix(3, 2)), std::invalid_argument);
}

TEST(Haar, UnitaryAndDeterministic) {
  for (int m : {1, 2, 5, 10, 30}) {
    const ComplexMatrix u = haar_unitary(m, 42);
    EXPECT_TRUE(is_unitary(u)) << m;
    EXPECT_EQ((u - haar_unitary(m, 42)).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_GT((haar_unitary(5, 1) - haar_unitary(5, 2)).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_THROW(haar_unitary(0, 1), std::invalid_argument);
}

TEST(Haar, SecondAndFourthMomentsMatchHaarMeasure) {
  // E|U_ij|^2 = 1/m and E|U_ij|^4 = 2/(m(m+1)) under the Haar measure.
  constexpr int m = 5;
  constexpr int samples = 10000;
  double second = 0.0, fourth = 0.0, phase_mean_re = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ComplexMatrix u = haar_unitary(m, static_cast<std::uint64_t>(s));
    const double p = std::norm(u(1, 2));
    second += p;
    fourth += p * p;
    phase_mean_re += std::real(u(0, 0)) / std::abs(u(0, 0));
  }
  EXPECT_NEAR(second / samples, 0.200, 0.005);
  EXPECT_NEAR(fourth / samples, 2.0 / (m * (m + 1)), 0.005);
  // Diagonal phases are uniform, not biased toward the positive real axis.
  EXPECT_NEAR(phase_mean_re / samples, 0.0, 0.04);
}

TEST(Fourier, EntriesAndUnitarity) {
  EXPECT_NEAR(std::abs(fourier_unitary(1)(0, 0) - C(1.0)), 0.0, 1e-15);
  const ComplexMatrix f2 = fourier_unitary(2);
  EXPECT_NEAR(std::abs(f2(1, 1) + C(1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  const ComplexMatrix f3 = fourier_unitary(3);
  // One-based entry (2,3): exp(2 pi i * 1 * 2 / 3) / sqrt(3).
  const C expected = std::polar(1.0 / std::sqrt(3.0), 4.0 * std::numbers::pi / 3.0);
  EXPECT_NEAR(std::abs(f3(1, 2) - expected), 0.0, 1e-15);
  for (int n = 1; n <= 8; ++n) EXPECT_TRUE(is_unitary(fourier_unitary(n), 1e-12)) << n;
  EXPECT_THROW(fourier_unitary(0), std::invalid_argument);
}

TEST(Unitarity, Predicates) {
  EXPECT_TRUE(is_unitary(ComplexMatrix::Identity(4, 4)));
  EXPECT_FALSE(is_unitary(2.0 * ComplexMatrix::Identity(2, 2)));
  EXPECT_THROW(is_unitary(ComplexMatrix::Identity(2, 3)), std::invalid_argument);
  EXPECT_THROW(is_subunitary(ComplexMatrix::Identity(3, 2)), std::invalid_argument);
  EXPECT_TRUE(is_unitary(ComplexMatrix::Identity(3, 3), 1e-12));
  EXPECT_TRUE(is_subunitary(ComplexMatrix::Identity(3, 3), 1e-12));
  EXPECT_FALSE(is_unitary(0.5 * ComplexMatrix::Identity(3, 3)));
  EXPECT_TRUE(is_subunitary(0.5 * ComplexMatrix::Identity(3, 3)));
  EXPECT_FALSE(is_subunitary(1.1 * ComplexMatrix::Identity(3, 3)));
  EXPECT_TRUE(is_subunitary(0.5 * haar_unitary(4, 3)));
  EXPECT_TRUE(is_subunitary(haar_unitary(4, 3)));
  EXPECT_FALSE(is_subunitary(1.01 * haar_unitary(4, 3)));
}

TEST(Unitarity, LargestEigenvalueAgreesWithSolver) {
  std::mt19937_64 rng(5);
  const ComplexMatrix a = oracle::random_matrix(6, rng);
  const ComplexMatrix h = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  EXPECT_NEAR(largest_eigenvalue_psd(h), es.eigenvalues().maxCoeff(), 1e-9 * es.eigenvalues().maxCoeff());
}

TEST(UnitaryFamilies, MakeUnitaryDispatches) {
  EXPECT_EQ((make_unitary(HaarUnitary{9}, 4) - haar_unitary(4, 9)).norm(), 0.0);
  EXPECT_EQ(make_unitary(FourierUnitary{3}, 7).rows(), 3);
  EXPECT_EQ((make_unitary(ExplicitUnitary{ComplexMatrix::Identity(2, 2)}, 2) - ComplexMatrix::Identity(2, 2)).norm(), 0.0);
}

TEST(Combinatorics, BinomialAndFactorial) {
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(binomial(4, 0), 1.0);
  EXPECT_EQ(binomial(3, 4), 0.0);
  EXPECT_EQ(factorial(0), 1.0);
  EXPECT_EQ(factorial(6), 720.0);
}

}  // namespace
}  // namespace qloss
