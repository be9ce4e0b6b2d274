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


#ifndef QLOSS_SELFTEST_HPP_
#define QLOSS_SELFTEST_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qloss/fock.hpp"
#include "qloss/loss_model.hpp"
#include "qloss/numerics.hpp"

namespace qloss {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;   // largest observed deviation
  double bound = 0.0;   // tolerance it was held to
  std::size_t cases = 0;
};

namespace selftest {

inline constexpr std::uint64_t kSeed = 20240917;

inline SelfTestResult finish(std::string name, double worst, double bound, std::size_t cases) {
  return {std::move(name), worst <= bound, worst, bound, cases};
}

/// All occupation vectors of `modes` modes with `photons` photons.
inline std::vector<std::vector<int>> patterns(int modes, int photons) {
  const FockBasis basis(modes, photons);
  std::vector<std::vector<int>> out;
  for (const auto& s : basis.states()) out.push_back(s.n);
  return out;
}

/// Kraus path against the dilated path on every (m, photons, design, eta)
/// with m <= 5 and photons <= 4, for a single-mode and a two-mode herald.
inline std::vector<SelfTestResult> oracle_equivalence() {
  double worst_p = 0.0, worst_rho = 0.0;
  std::size_t cases = 0;
  std::mt19937_64 rng(kSeed);
  for (int m = 2; m <= 5; ++m) {
    for (int n = 1; n <= 4; ++n) {
      std::vector<int> input(static_cast<std::size_t>(m), 0);
      for (int p = 0; p < n; ++p) ++input[static_cast<std::size_t>(p % m)];
      const ComplexMatrix u = haar_unitary(m, rng());
      std::vector<HeraldSpec> heralds = {HeraldSpec({m - 1}, std::vector<int>{1}),
                                         HeraldSpec({0}, std::vector<int>{0})};
      if (m >= 3) heralds.emplace_back(std::vector<int>{0, m - 1}, std::vector<std::vector<int>>{{1, 0}, {0, 1}});
      for (Design d : {Design::kRectangular, Design::kTriangular}) {
        for (double eta : {0.5, 0.9, 1.0}) {
          const LossyTransform tr = compose_lossy(u, make_loss_model(d, m, eta));
          for (const auto& h : heralds) {
            const ConditionalState a = conditional_state(tr, FockState(input), h);
            const ConditionalState b = oracle_conditional_state_dilated(tr, FockState(input), h);
            worst_p = std::max(worst_p, std::abs(a.p_s - b.p_s));
            if (a.degenerate != b.degenerate) {
              worst_rho = std::max(worst_rho, 1.0);
            } else if (!a.degenerate) {
              worst_rho = std::max(worst_rho, max_abs(a.rho.entries - b.rho.entries));
            }
            ++cases;
          }
        }
      }
    }
  }
  return {finish("oracle equivalence: p_s", worst_p, 1e-12, cases),
          finish("oracle equivalence: rho", worst_rho, 1e-10, cases)};
}

/// sum_l E_l^dagger E_l = I on each photon-number layer, entrywise.
inline SelfTestResult kraus_completeness() {
  double worst = 0.0;
  std::size_t cases = 0;
  RealVector g(3);
  g << 0.31, 0.77, 0.995;
  for (int n = 0; n <= 4; ++n) {
    auto basis = std::make_shared<const FockBasis>(3, n);
    const auto d = static_cast<Eigen::Index>(basis->size());
    // Columns: images of every basis state under each Kraus operator, stacked.
    ComplexMatrix gram = ComplexMatrix::Zero(d, d);
    for (int lost = 0; lost <= n; ++lost) {
      for (const auto& l : patterns(3, lost)) {
        std::vector<ComplexVector> images;
        for (Eigen::Index k = 0; k < d; ++k) {
          FockVector e(basis);
          e.amplitudes[k] = 1.0;
          images.push_back(apply_output_loss_kraus(e, l, g).amplitudes);
        }
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j) gram(i, j) += images[static_cast<std::size_t>(i)].dot(images[static_cast<std::size_t>(j)]);
      }
    }
    worst = std::max(worst, max_abs(gram - ComplexMatrix::Identity(d, d)));
    ++cases;
  }
  return finish("kraus completeness", worst, 1e-10, cases);
}

/// Matrix of transition amplitudes on a layer is unitary.
inline SelfTestResult fock_unitarity() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (int m = 1; m <= 4; ++m) {
    for (int n = 0; n <= 3; ++n) {
      const ComplexMatrix u = haar_unitary(m, kSeed + static_cast<std::uint64_t>(10 * m + n));
      const FockBasis basis(m, n);
      const auto d = static_cast<Eigen::Index>(basis.size());
      ComplexMatrix big(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          big(i, j) = transition_amplitude(u, basis[static_cast<std::size_t>(j)], basis[static_cast<std::size_t>(i)]);
      worst = std::max(worst, max_abs(big.adjoint() * big - ComplexMatrix::Identity(d, d)));
      ++cases;
    }
  }
  return finish("fock-layer unitarity", worst, 1e-9, cases);
}

/// Lossless Fourier(N) on |1..1>: outputs whose weighted index sum is not a
/// multiple of N are suppressed.
inline SelfTestResult zero_transmission() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (int n = 3; n <= 5; ++n) {
    const FockVector out = evolve_basis_state(fourier_unitary(n), FockState(std::vector<int>(static_cast<std::size_t>(n), 1)));
    for (std::size_t k = 0; k < out.basis->size(); ++k) {
      const FockState& s = (*out.basis)[k];
      int index_sum = 0;
      for (int i = 0; i < n; ++i) index_sum += i * s.n[static_cast<std::size_t>(i)];
      const double p = std::norm(out.amplitudes[static_cast<Eigen::Index>(k)]);
      if (index_sum % n != 0) {
        worst = std::max(worst, p);
        ++cases;
      }
    }
  }
  return finish("zero-transmission law", worst, 1e-12, cases);
}

/// Herald probabilities over every pattern of every photon count sum to one.
inline SelfTestResult herald_completeness() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (Design d : {Design::kRectangular, Design::kTriangular}) {
    for (double eta : {0.5, 0.9, 1.0}) {
      const LossyTransform tr = compose_lossy(haar_unitary(4, kSeed + 3), make_loss_model(d, 4, eta));
      const FockState input{1, 0, 2, 1};
      double total = 0.0;
      for (int k = 0; k <= input.photons(); ++k) {
        for (const auto& pat : patterns(2, k)) total += conditional_state(tr, input, HeraldSpec({1, 2}, pat)).p_s;
      }
      worst = std::max(worst, std::abs(total - 1.0));
      ++cases;
    }
  }
  return finish("herald completeness", worst, 1e-9, cases);
}

inline ComplexMatrix random_complex(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

/// Row/column permutation invariance, row multilinearity, Ryser vs Glynn.
inline SelfTestResult permanent_properties() {
  double worst = 0.0;
  std::size_t cases = 0;
  std::mt19937_64 rng(kSeed + 5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const ComplexMatrix a = random_complex(n, rng);
    const Complex pa = permanent(a);
    const double scale = std::max(1.0, std::abs(pa));
    std::vector<int> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    ComplexMatrix p(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p(i, j) = a(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    worst = std::max(worst, std::abs(permanent(p) - pa) / scale);

    const ComplexMatrix b = random_complex(n, rng);
    const int r = trial % n;
    const Complex c(0.4, -1.3);
    ComplexMatrix mixed = a, swapped = a;
    swapped.row(r) = b.row(r);
    mixed.row(r) = c * a.row(r) + b.row(r);
    const Complex lin = c * pa + permanent(swapped);
    worst = std::max(worst, std::abs(permanent(mixed) - lin) / std::max(1.0, std::abs(lin)));

    worst = std::max(worst, std::abs(permanent_glynn(a) - permanent_ryser(a)) / scale);
    cases += 3;
  }
  return finish("permanent properties", worst, 1e-10, cases);
}

}  // namespace selftest

inline std::vector<SelfTestResult> run_selftest() {
  std::vector<SelfTestResult> out = selftest::oracle_equivalence();
  out.push_back(selftest::kraus_completeness());
  out.push_back(selftest::fock_unitarity());
  out.push_back(selftest::zero_transmission());
  out.push_back(selftest::herald_completeness());
  out.push_back(selftest::permanent_properties());
  return out;
}

}  // namespace qloss

#endif  // QLOSS_SELFTEST_HPP_
