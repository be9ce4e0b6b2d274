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
#include <map>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qloss/fock.hpp"

namespace qloss {
namespace {

using oracle::C;

ComplexMatrix beamsplitter() {
  ComplexMatrix b(2, 2);
  b << 1.0, 1.0, 1.0, -1.0;
  return b / std::sqrt(2.0);
}

LossyTransform lossless(const ComplexMatrix& u) {
  const int m = static_cast<int>(u.rows());
  return compose_lossy(u, gamma_rectangular(m, 1.0));
}

// -- Basis bookkeeping ---------------------------------------------------------

TEST(FockBasis, LexicographicOrderAndRank) {
  const FockBasis b(3, 2);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b[0], (FockState{0, 0, 2}));
  EXPECT_EQ(b[5], (FockState{2, 0, 0}));
  for (std::size_t i = 0; i + 1 < b.size(); ++i) EXPECT_LT(b[i], b[i + 1]);
  for (int m = 1; m <= 6; ++m) {
    for (int n = 0; n <= 5; ++n) {
      const FockBasis basis(m, n);
      EXPECT_EQ(static_cast<double>(basis.size()), FockBasis::count(m, n));
      for (std::size_t i = 0; i < basis.size(); ++i) EXPECT_EQ(basis.rank(basis[i]), i);
    }
  }
  EXPECT_EQ(to_string(FockState{1, 0, 2}), "1|0|2");
  EXPECT_THROW(FockBasis(0, 1), std::invalid_argument);
}

TEST(FockSpace, SectorsAndIndexing) {
  const FockSpace s(3, 2);
  EXPECT_EQ(s.dimension(), 1u + 3u + 6u);
  for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_EQ(s.index_of(s.state_at(i)), i);
  EXPECT_EQ(s.state_at(0), (FockState{0, 0, 0}));
  EXPECT_THROW(s.index_of(FockState{3, 0, 0}), std::out_of_range);
}

// -- Transition amplitudes -------------------------------------------------------

TEST(Transition, IdentityAndBeamsplitter) {
  EXPECT_NEAR(std::abs(transition_amplitude(ComplexMatrix::Identity(3, 3), {1, 0, 2}, {1, 0, 2}) - C(1.0)), 0.0, 1e-15);
  const ComplexMatrix b = beamsplitter();
  EXPECT_NEAR(std::abs(transition_amplitude(b, {1, 1}, {1, 1})), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(transition_amplitude(b, {1, 1}, {2, 0}) - C(1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(transition_amplitude(b, {1, 1}, {0, 2})), 0.5, 1e-15);
  EXPECT_THROW(transition_amplitude(b, {1, 1}, {1, 0}), std::invalid_argument);
}

TEST(Transition, MatchesFirstQuantizedOracle) {
  const ComplexMatrix u = haar_unitary(4, 17);
  for (const auto& in : oracle::all_patterns(4, 3)) {
    for (const auto& out : oracle::all_patterns(4, 3)) {
      const C ref = oracle::amplitude_bruteforce(u, in, out);
      EXPECT_NEAR(std::abs(transition_amplitude(u, FockState(in), FockState(out)) - ref), 0.0, 1e-12);
    }
  }
}

TEST(Evolve, FourierOnThreeSinglePhotons) {
  const FockVector out = evolve_pure(fourier_unitary(3), basis_vector({1, 1, 1}));
  EXPECT_NEAR(std::abs(out.amplitude({1, 1, 1}) - C(-1.0 / std::sqrt(3.0))), 0.0, 1e-12);
  EXPECT_NEAR(out.norm(), 1.0, 1e-12);
}

TEST(Evolve, IdentityAndNormPreservation) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    FockVector psi(std::make_shared<const FockBasis>(4, 3));
    for (Eigen::Index k = 0; k < psi.amplitudes.size(); ++k) psi.amplitudes[k] = C(g(rng), g(rng));
    psi.amplitudes.normalize();
    EXPECT_LT((evolve_pure(ComplexMatrix::Identity(4, 4), psi).amplitudes - psi.amplitudes).norm(), 1e-14);
    EXPECT_NEAR(evolve_pure(haar_unitary(4, static_cast<std::uint64_t>(trial)), psi).norm(), 1.0, 1e-9);
  }
  EXPECT_THROW(evolve_pure(ComplexMatrix::Identity(3, 3), basis_vector({1, 1})), std::invalid_argument);
}

TEST(Evolve, FockLayerUnitarity) {
  for (int m = 1; m <= 4; ++m) {
    for (int n = 0; n <= 3; ++n) {
      const ComplexMatrix u = haar_unitary(m, static_cast<std::uint64_t>(10 * m + n));
      const FockBasis basis(m, n);
      const auto d = static_cast<Eigen::Index>(basis.size());
      ComplexMatrix big(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          big(i, j) = transition_amplitude(u, basis[static_cast<std::size_t>(j)], basis[static_cast<std::size_t>(i)]);
      EXPECT_LT((big.adjoint() * big - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-9) << m << "," << n;
    }
  }
}

TEST(Evolve, ZeroTransmissionLawForFourier) {
  for (int n = 3; n <= 5; ++n) {
    const ComplexMatrix f = fourier_unitary(n);
    const std::vector<int> ones(static_cast<std::size_t>(n), 1);
    int forbidden = 0;
    for (const auto& out : oracle::all_patterns(n, n)) {
      const double p = std::norm(oracle::amplitude_bruteforce(f, ones, out));
      int index_sum = 0;
      for (int k = 0; k < n; ++k) index_sum += k * out[static_cast<std::size_t>(k)];
      const double lib = std::norm(transition_amplitude(f, FockState(ones), FockState(out)));
      if (index_sum % n != 0) {
        ++forbidden;
        EXPECT_LT(p, 1e-12);
        EXPECT_LT(lib, 1e-12);
      }
      EXPECT_NEAR(lib, p, 1e-12);
    }
    EXPECT_GT(forbidden, 0);
  }
}

// -- Loss channels -----------------------------------------------------------

TEST(InputLoss, MixtureWeights) {
  const auto none = input_loss_mixture({1, 2}, RealVector::Ones(2));
  ASSERT_EQ(none.size(), 1u);
  EXPECT_EQ(none[0].first, 1.0);
  EXPECT_EQ(none[0].second, (FockState{1, 2}));

  RealVector one(1);
  one << std::sqrt(0.9);
  const auto single = input_loss_mixture({1}, one);
  ASSERT_EQ(single.size(), 2u);
  EXPECT_NEAR(single[0].first, 0.9, 1e-15);
  EXPECT_NEAR(single[1].first, 0.1, 1e-15);

  RealVector g(2);
  g << std::sqrt(0.9), std::sqrt(0.5);
  std::map<FockState, double> w;
  for (const auto& [p, s] : input_loss_mixture({1, 1}, g)) w[s] = p;
  EXPECT_NEAR(w[FockState(std::vector<int>{1, 1})], 0.45, 1e-15);
  EXPECT_NEAR(w[FockState(std::vector<int>{1, 0})], 0.45, 1e-15);
  EXPECT_NEAR(w[FockState(std::vector<int>{0, 1})], 0.05, 1e-15);
  EXPECT_NEAR(w[FockState(std::vector<int>{0, 0})], 0.05, 1e-15);

  RealVector g3(3);
  g3 << 0.3, 0.8, 0.95;
  double total = 0.0;
  for (const auto& [p, s] : input_loss_mixture({2, 0, 3}, g3)) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(OutputLoss, KrausCoefficientAndIdentity) {
  RealVector g(1);
  g << std::sqrt(0.5);
  const FockVector out = apply_output_loss_kraus(basis_vector({2}), {1}, g);
  EXPECT_NEAR(std::abs(out.amplitude({1}) - C(std::sqrt(0.5))), 0.0, 1e-15);

  const FockVector psi = evolve_pure(haar_unitary(3, 1), basis_vector({1, 1, 0}));
  const FockVector same = apply_output_loss_kraus(psi, {0, 0, 0}, RealVector::Ones(3));
  EXPECT_LT((same.amplitudes - psi.amplitudes).norm(), 1e-15);
  EXPECT_EQ(apply_output_loss_kraus(basis_vector({1, 0}), {2, 0}, RealVector::Ones(2)).norm(), 0.0);
}

TEST(OutputLoss, ChannelCompleteness) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  RealVector g(3);
  g << 0.2, 0.7, 0.99;
  for (int n = 0; n <= 4; ++n) {
    FockVector psi(std::make_shared<const FockBasis>(3, n));
    for (Eigen::Index k = 0; k < psi.amplitudes.size(); ++k) psi.amplitudes[k] = C(gauss(rng), gauss(rng));
    double total = 0.0;
    for (const auto& lost : oracle::all_patterns(4, n)) {
      // First three entries are the loss vector; the fourth absorbs the remainder.
      const std::vector<int> l(lost.begin(), lost.begin() + 3);
      total += std::pow(apply_output_loss_kraus(psi, l, g).norm(), 2);
    }
    EXPECT_NEAR(total, std::pow(psi.norm(), 2), 1e-10 * std::max(1.0, std::pow(psi.norm(), 2)));
  }
}

// -- Conditional states --------------------------------------------------------

TEST(Conditional, IdentityHerald) {
  const ConditionalState cs = conditional_state(lossless(ComplexMatrix::Identity(2, 2)), {1, 1}, HeraldSpec({1}, std::vector<int>{1}));
  EXPECT_NEAR(cs.p_s, 1.0, 1e-15);
  EXPECT_EQ(cs.modes, std::vector<int>{0});
  EXPECT_NEAR(cs.rho.population({1}), 1.0, 1e-15);
}

TEST(Conditional, FourierThreeHeraldedSinglePhoton) {
  const ConditionalState cs = conditional_state(lossless(fourier_unitary(3)), {1, 1, 1}, HeraldSpec({1, 2}, std::vector<int>{1, 1}));
  // |perm of the unnormalized 3-point DFT|^2 / 27.
  const double expected = std::norm(C(-3.0)) / 27.0;
  EXPECT_NEAR(cs.p_s, expected, 1e-12);
  EXPECT_NEAR(cs.rho.population({1}), 1.0, 1e-12);
  EXPECT_NEAR(cs.rho.trace(), 1.0, 1e-12);
}

TEST(Conditional, ImpossibleHeraldIsDegenerate) {
  const ConditionalState cs = conditional_state(lossless(ComplexMatrix::Identity(3, 3)), {1, 0, 0}, HeraldSpec({1, 2}, std::vector<int>{1, 1}));
  EXPECT_EQ(cs.p_s, 0.0);
  EXPECT_TRUE(cs.degenerate);
  EXPECT_NEAR(cs.rho.entries(0, 0).real(), 1.0, 0.0);
  // Feasible photon count but zero amplitude.
  const ConditionalState hom = conditional_state(lossless(beamsplitter()), {1, 1}, HeraldSpec({1}, std::vector<int>{1}));
  EXPECT_TRUE(hom.degenerate);
}

TEST(Conditional, RejectsBadInput) {
  const LossyTransform tr = lossless(haar_unitary(3, 2));
  EXPECT_THROW(conditional_state(tr, {1, 1}, HeraldSpec({1}, std::vector<int>{1})), std::invalid_argument);
  EXPECT_THROW(conditional_state(tr, {1, 1, 0}, HeraldSpec({3}, std::vector<int>{1})), std::invalid_argument);
  EXPECT_THROW(conditional_state(tr, {1, 1, 0}, HeraldSpec({0, 1, 2}, std::vector<int>{1, 1, 0})), std::invalid_argument);
  EXPECT_THROW(conditional_state(tr, {9, 0, 0}, HeraldSpec({1}, std::vector<int>{1})), std::invalid_argument);
}

struct Case {
  int m;
  std::vector<int> input;
  std::vector<int> hmodes;
  std::vector<std::vector<int>> patterns;
};

std::vector<Case> small_cases() {
  return {
      {2, {1, 1}, {1}, {{1}}},
      {3, {1, 1, 1}, {1, 2}, {{1, 1}}},
      {3, {2, 1, 0}, {0}, {{1}}},
      {3, {1, 0, 1}, {2}, {{0}, {1}}},
      {4, {1, 1, 1, 0}, {2, 3}, {{1, 0}, {0, 1}}},
      {4, {1, 1, 1, 1}, {0, 3}, {{1, 1}}},
      {4, {2, 0, 1, 1}, {1}, {{2}}},
  };
}

TEST(Conditional, MatchesIndependentDilationOracle) {
  for (const auto& c : small_cases()) {
    for (Design d : {Design::kRectangular, Design::kTriangular}) {
      for (double eta : {0.5, 0.9, 1.0}) {
        const ComplexMatrix u = haar_unitary(c.m, static_cast<std::uint64_t>(c.m * 100 + c.input[0]));
        const LossyTransform tr = compose_lossy(u, make_loss_model(d, c.m, eta));
        const HeraldSpec herald(c.hmodes, c.patterns);
        const ConditionalState cs = conditional_state(tr, FockState(c.input), herald);
        const oracle::OracleResult ref = oracle::independent_oracle(u, tr.loss.in_amps, tr.loss.out_amps, c.input, c.hmodes, c.patterns);
        ASSERT_NEAR(cs.p_s, ref.p_s, 1e-12);
        if (ref.p_s == 0.0) continue;
        for (const auto& [key, v] : ref.rho) {
          EXPECT_NEAR(std::abs(cs.rho(FockState(key.first), FockState(key.second)) - v / ref.p_s), 0.0, 1e-10);
        }
        EXPECT_NEAR(cs.rho.trace(), 1.0, 1e-9);
      }
    }
  }
}

TEST(Conditional, MatchesLibraryDilatedPath) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 4);  // 2..5
    std::vector<int> input(static_cast<std::size_t>(m), 0);
    const int photons = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < photons; ++p) ++input[rng() % static_cast<std::size_t>(m)];
    const int h = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
    const int count = static_cast<int>(rng() % 2);
    const Design d = (trial % 2) ? Design::kTriangular : Design::kRectangular;
    const double eta = std::array{0.5, 0.9, 1.0}[static_cast<std::size_t>(trial % 3)];
    const LossyTransform tr = compose_lossy(haar_unitary(m, rng()), make_loss_model(d, m, eta));
    const HeraldSpec herald({h}, std::vector<int>{count});
    const ConditionalState a = conditional_state(tr, FockState(input), herald);
    const ConditionalState b = oracle_conditional_state_dilated(tr, FockState(input), herald);
    EXPECT_NEAR(a.p_s, b.p_s, 1e-12);
    EXPECT_EQ(a.degenerate, b.degenerate);
    if (!a.degenerate) {
      EXPECT_LT((a.rho.entries - b.rho.entries).cwiseAbs().maxCoeff(), 1e-10);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(Conditional, TriangularThreeModeExample) {
  const LossyTransform tr = compose_lossy(fourier_unitary(3), gamma_triangular(3, 0.8));
  const HeraldSpec herald({1, 2}, std::vector<int>{1, 1});
  const ConditionalState a = conditional_state(tr, {1, 1, 1}, herald);
  const ConditionalState b = oracle_conditional_state_dilated(tr, {1, 1, 1}, herald);
  EXPECT_NEAR(a.p_s, b.p_s, 1e-12);
  EXPECT_LT((a.rho.entries - b.rho.entries).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Conditional, ProbabilityConservationOverAllHeralds) {
  for (Design d : {Design::kRectangular, Design::kTriangular}) {
    const LossyTransform tr = compose_lossy(haar_unitary(4, 5), make_loss_model(d, 4, 0.7));
    const std::vector<int> input = {1, 1, 0, 1};
    double total = 0.0;
    for (int k = 0; k <= 3; ++k) {
      for (const auto& pat : oracle::all_patterns(2, k)) {
        total += conditional_state(tr, FockState(input), HeraldSpec({1, 3}, pat)).p_s;
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Conditional, DeterministicAcrossThreadCounts) {
  const LossyTransform tr = compose_lossy(haar_unitary(5, 8), gamma_triangular(5, 0.85));
  const HeraldSpec herald({0, 4}, std::vector<int>{1, 0});
  const ConditionalState a = conditional_state(tr, {1, 1, 1, 1, 0}, herald, Parallelism{1});
  const ConditionalState b = conditional_state(tr, {1, 1, 1, 1, 0}, herald, Parallelism{4});
  EXPECT_EQ(a.p_s, b.p_s);
  EXPECT_EQ((a.rho.entries - b.rho.entries).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Oracle, SizeGuard) {
  const LossyTransform tr = lossless(haar_unitary(11, 1));
  std::vector<int> in(11, 0);
  in[0] = 1;
  EXPECT_THROW(oracle_conditional_state_dilated(tr, FockState(in), HeraldSpec({1}, std::vector<int>{0})), std::invalid_argument);
}

// -- Partial trace -------------------------------------------------------------

TEST(PartialTrace, ProductStateAndTrace) {
  // rho_A = |1><1| mixed with |0><0|, rho_B = |+> superposition of |0>, |1>.
  FockVector a(std::make_shared<const FockBasis>(2, 1));
  a.amplitude({1, 0}) = std::sqrt(0.3);
  a.amplitude({0, 1}) = std::sqrt(0.7);
  const DensityMatrix rho = pure_density(a, 1);
  const DensityMatrix ra = partial_trace(rho, {0});
  EXPECT_NEAR(ra.population({1}), 0.3, 1e-15);
  EXPECT_NEAR(ra.population({0}), 0.7, 1e-15);
  EXPECT_NEAR(std::abs(ra({0}, {1})), 0.0, 1e-15);

  const DensityMatrix same = partial_trace(rho, {0, 1});
  EXPECT_LT((same.entries - rho.entries).cwiseAbs().maxCoeff(), 1e-15);

  // Genuine product: |1>_A (x) (|0> + |1>)/sqrt2 _B.
  DensityMatrix pr(FockSpace(2, 2));
  const std::vector<std::pair<FockState, double>> comps = {{{1, 0}, 1.0 / std::sqrt(2.0)}, {{1, 1}, 1.0 / std::sqrt(2.0)}};
  for (const auto& [s, x] : comps)
    for (const auto& [t, y] : comps) pr.entries(static_cast<Eigen::Index>(pr.space.index_of(s)), static_cast<Eigen::Index>(pr.space.index_of(t))) = x * y;
  const DensityMatrix rb = partial_trace(pr, {1});
  EXPECT_NEAR(rb.population({0}), 0.5, 1e-15);
  EXPECT_NEAR(std::real(rb({0}, {1})), 0.5, 1e-15);
  const DensityMatrix ra2 = partial_trace(pr, {0});
  EXPECT_NEAR(ra2.population({1}), 1.0, 1e-15);

  EXPECT_THROW(partial_trace(rho, {}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {0, 0}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {2}), std::invalid_argument);
}

TEST(PartialTrace, PreservesTraceOfConditionalStates) {
  const LossyTransform tr = compose_lossy(haar_unitary(5, 12), gamma_rectangular(5, 0.8));
  const ConditionalState cs = conditional_state(tr, {1, 1, 1, 0, 0}, HeraldSpec({0}, std::vector<int>{1}));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(partial_trace(cs.rho, {k}).trace(), cs.rho.trace(), 1e-12);
  EXPECT_NEAR(partial_trace(cs.rho, {3, 1}).trace(), cs.rho.trace(), 1e-12);
}

}  // namespace
}  // namespace qloss
