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

#ifndef QLOSS_NUMERICS_HPP_
#define QLOSS_NUMERICS_HPP_

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include <Eigen/Dense>

namespace qloss {

using Complex = std::complex<double>;

/// Dense complex matrix. Entry (i, j) couples input mode j to output mode i.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr int kMaxPermanentSize = 20;

/// Name of the pseudo-random algorithm behind every seeded draw. Written into
/// experiment output so that (algorithm, seed) pins a run.
inline constexpr const char* kRngAlgorithm = "mt19937_64/std::normal_distribution(libstdc++)";

using Rng = std::mt19937_64;

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_permanent_size(const ComplexMatrix& m) {
  require_square(m, "permanent");
  if (m.rows() > kMaxPermanentSize) {
    throw std::invalid_argument("permanent: side " + std::to_string(m.rows()) +
                                " exceeds the supported maximum of " +
                                std::to_string(kMaxPermanentSize));
  }
}

}  // namespace detail

/// Permanent by Ryser's inclusion-exclusion formula, visiting column subsets
/// in Gray-code order so that each step updates the running row sums with a
/// single column. O(2^n n).
inline Complex permanent_ryser(const ComplexMatrix& m) {
  detail::require_permanent_size(m);
  const auto n = static_cast<int>(m.rows());
  if (n == 0) return {1.0, 0.0};

  ComplexVector row_sums = ComplexVector::Zero(n);
  Complex total{0.0, 0.0};
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int col = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << col;
    gray ^= bit;
    if (gray & bit) {
      row_sums += m.col(col);
    } else {
      row_sums -= m.col(col);
    }
    Complex prod = row_sums[0];
    for (int i = 1; i < n; ++i) prod *= row_sums[i];
    // (-1)^(n - |S|)
    const int parity = (n - std::popcount(gray)) & 1;
    total += parity ? -prod : prod;
  }
  return total;
}

/// Permanent by Glynn's formula with Gray-code sign flips. Independent of
/// the Ryser route; the two must agree.
inline Complex permanent_glynn(const ComplexMatrix& m) {
  detail::require_permanent_size(m);
  const auto n = static_cast<int>(m.rows());
  if (n == 0) return {1.0, 0.0};

  // Column sums weighted by delta, delta starting at all +1.
  ComplexVector col_sums = m.colwise().sum().transpose();
  auto product = [&] {
    Complex p = col_sums[0];
    for (int j = 1; j < n; ++j) p *= col_sums[j];
    return p;
  };
  Complex total = product();
  int sign = 1;
  std::uint64_t gray = 0;
  const std::uint64_t steps = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < steps; ++k) {
    const int flip = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << flip;
    gray ^= bit;
    // Row (flip + 1) toggles its delta; row 0 stays fixed at +1.
    const int row = flip + 1;
    if (gray & bit) {
      col_sums -= 2.0 * m.row(row).transpose();
    } else {
      col_sums += 2.0 * m.row(row).transpose();
    }
    sign = -sign;
    const Complex p = product();
    total += sign > 0 ? p : -p;
  }
  return total / static_cast<double>(steps);
}

inline Complex permanent(const ComplexMatrix& m) {
  return permanent_ryser(m);
}

/// Haar-distributed m x m unitary: QR of a complex Ginibre matrix with the
/// phases of R's diagonal moved into Q. Deterministic in (m, seed).
inline ComplexMatrix haar_unitary(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("haar_unitary: mode count must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
  ComplexMatrix z(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (int j = 0; j < m; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : Complex(1.0, 0.0);
  }
  return q;
}

/// N-mode discrete Fourier matrix, U_jk = exp(2 pi i j k / N) / sqrt(N) with
/// zero-based j, k.
inline ComplexMatrix fourier_unitary(int n) {
  if (n < 1) throw std::invalid_argument("fourier_unitary: mode count must be >= 1");
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // Reduce the phase index first so large products keep full precision.
      const int idx = (j * k) % n;
      const double angle = 2.0 * std::numbers::pi * idx / n;
      f(j, k) = std::polar(scale, angle);
    }
  }
  return f;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kUnitaryTol) {
  detail::require_square(m, "is_unitary");
  const ComplexMatrix gram = m.adjoint() * m;
  return max_abs(gram - ComplexMatrix::Identity(m.rows(), m.cols())) <= tol;
}

/// Largest eigenvalue of the Hermitian positive semidefinite matrix h by
/// power iteration from a fixed start vector.
inline double largest_eigenvalue_psd(const ComplexMatrix& h, int max_iter = 2000, double rel_tol = 1e-15) {
  const auto n = h.rows();
  if (n == 0) return 0.0;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Irregular start so no eigenvector is orthogonal to it by symmetry.
    v[i] = Complex(1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i)), 0.05 * std::cos(2.0 * static_cast<double>(i)));
  }
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    ComplexVector w = h * v;
    const double next = std::real(v.dot(w));
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

/// True when T^dagger T <= I, i.e. its largest eigenvalue is at most 1 + tol.
inline bool is_subunitary(const ComplexMatrix& t, double tol = kUnitaryTol) {
  detail::require_square(t, "is_subunitary");
  const ComplexMatrix gram = t.adjoint() * t;
  return largest_eigenvalue_psd(gram) <= 1.0 + tol;
}

// Unitary families used by the experiments.
struct HaarUnitary {
  std::uint64_t seed = 0;
};
struct FourierUnitary {
  int modes = 1;
};
struct ExplicitUnitary {
  ComplexMatrix matrix;
};
using UnitaryKind = std::variant<HaarUnitary, FourierUnitary, ExplicitUnitary>;

/// Materializes a unitary family member on m modes. Fourier ignores m in
/// favour of its own size.
inline ComplexMatrix make_unitary(const UnitaryKind& kind, int m) {
  return std::visit(
      [m](const auto& k) -> ComplexMatrix {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HaarUnitary>) {
          return haar_unitary(m, k.seed);
        } else if constexpr (std::is_same_v<K, FourierUnitary>) {
          return fourier_unitary(k.modes);
        } else {
          return k.matrix;
        }
      },
      kind);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace qloss

#endif  // QLOSS_NUMERICS_HPP_
