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

#ifndef QLOSS_METRICS_HPP_
#define QLOSS_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qloss/fock.hpp"
#include "qloss/numerics.hpp"

namespace qloss {

// -- Matrix-level fidelities ------------------------------------------------

/// |tr(u^dagger t)|^2 / (tr(u^dagger u) tr(t^dagger t)). Blind to any
/// uniform attenuation of t.
inline double postselected_fidelity(const ComplexMatrix& u, const ComplexMatrix& t) {
  if (u.rows() != t.rows() || u.cols() != t.cols()) {
    throw std::invalid_argument("postselected_fidelity: dimension mismatch");
  }
  const double tt = t.squaredNorm();
  if (tt == 0.0) throw std::domain_error("postselected_fidelity: t is identically zero");
  const Complex overlap = (u.adjoint() * t).trace();
  return std::norm(overlap) / (u.squaredNorm() * tt);
}

/// Overlap of the single-photon preimages of output mode i under u and t:
/// |sum_j conj(u_ij) t_ij|^2.
inline double preimage_fidelity(const ComplexMatrix& u, const ComplexMatrix& t, int i) {
  if (u.rows() != t.rows() || u.cols() != t.cols()) {
    throw std::invalid_argument("preimage_fidelity: dimension mismatch");
  }
  if (i < 0 || i >= u.rows()) throw std::invalid_argument("preimage_fidelity: mode index out of range");
  // Eigen's dot conjugates its left operand.
  return std::norm(u.row(i).transpose().dot(t.row(i).transpose()));
}

inline double average_preimage_fidelity(const ComplexMatrix& u, const ComplexMatrix& t) {
  double sum = 0.0;
  for (int i = 0; i < u.rows(); ++i) sum += preimage_fidelity(u, t, i);
  return sum / static_cast<double>(u.rows());
}

// -- Heralded-state metrics --------------------------------------------------

/// 1 - <vac| rho' |vac>.
inline double conditional_transmittance(const ConditionalState& cs) {
  if (cs.p_s <= 0.0 || cs.degenerate) {
    throw std::domain_error("conditional_transmittance: herald has zero probability");
  }
  return 1.0 - std::real(cs.rho.entries(0, 0));
}

/// Dual-rail qubits as (mode_a, mode_b) pairs of interferometer modes, plus
/// unmeasured spectator modes outside every pair.
struct QubitLayout {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> spectators;

  std::size_t qubits() const { return pairs.size(); }
};

/// Which single-photon occupation of a pair encodes logical |0>.
enum class RailEncoding {
  kFirstModeZero,  // |10> -> |0>, |01> -> |1>
  kFirstModeOne,   // |01> -> |0>, |10> -> |1>
};

namespace detail {

inline int local_mode(const ConditionalState& cs, int mode) {
  const auto it = std::find(cs.modes.begin(), cs.modes.end(), mode);
  if (it == cs.modes.end()) {
    throw std::invalid_argument("qubit layout: mode " + std::to_string(mode) + " is not an unmeasured mode");
  }
  return static_cast<int>(std::distance(cs.modes.begin(), it));
}

inline void validate_layout(const ConditionalState& cs, const QubitLayout& layout) {
  std::vector<int> used;
  for (const auto& [a, b] : layout.pairs) {
    used.push_back(a);
    used.push_back(b);
  }
  used.insert(used.end(), layout.spectators.begin(), layout.spectators.end());
  std::vector<int> sorted = used;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("qubit layout: pairs and spectators must be disjoint");
  }
  for (int m : used) local_mode(cs, m);
}

}  // namespace detail

/// Per qubit: 1 - Pr(both rails empty), from the two-mode reduced state.
inline std::vector<double> qubit_transmittances(const ConditionalState& cs, const QubitLayout& layout) {
  detail::validate_layout(cs, layout);
  std::vector<double> out;
  for (const auto& [a, b] : layout.pairs) {
    const DensityMatrix pair = partial_trace(cs.rho, {detail::local_mode(cs, a), detail::local_mode(cs, b)});
    out.push_back(1.0 - std::real(pair.entries(0, 0)) / pair.trace());
  }
  return out;
}

/// Result of projecting the heralded state onto one photon per pair and
/// empty spectators. `probability` is relative to the heralded state.
struct DualRailState {
  double probability = 0.0;
  ComplexMatrix rho;  // 2^q x 2^q, qubit 0 is the most significant bit
  bool degenerate = false;
};

inline DualRailState dual_rail_postselect(const ConditionalState& cs, const QubitLayout& layout,
                                          RailEncoding encoding = RailEncoding::kFirstModeOne) {
  detail::validate_layout(cs, layout);
  const auto q = static_cast<int>(layout.qubits());
  std::vector<std::pair<int, int>> local_pairs;
  for (const auto& [a, b] : layout.pairs) {
    local_pairs.emplace_back(detail::local_mode(cs, a), detail::local_mode(cs, b));
  }
  // Basis index -> logical bit string, or -1 outside the code space.
  const std::size_t dim = cs.rho.space.dimension();
  std::vector<std::int64_t> logical(dim, -1);
  for (std::size_t i = 0; i < dim; ++i) {
    const FockState& s = cs.rho.space.state_at(i);
    if (s.photons() != q) continue;
    std::int64_t word = 0;
    bool ok = true;
    for (const auto& [a, b] : local_pairs) {
      const int na = s.n[static_cast<std::size_t>(a)];
      const int nb = s.n[static_cast<std::size_t>(b)];
      if (na + nb != 1) {
        ok = false;
        break;
      }
      const bool first_occupied = na == 1;
      const int bit = (encoding == RailEncoding::kFirstModeZero) ? (first_occupied ? 0 : 1) : (first_occupied ? 1 : 0);
      word = (word << 1) | bit;
    }
    // With exactly q photons and one per pair, spectators are empty.
    if (ok) logical[i] = word;
  }
  DualRailState out;
  const auto qdim = Eigen::Index{1} << q;
  out.rho = ComplexMatrix::Zero(qdim, qdim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (logical[i] < 0) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      if (logical[j] < 0) continue;
      out.rho(logical[i], logical[j]) += cs.rho.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  out.probability = std::real(out.rho.trace());
  if (out.probability > 0.0) {
    out.rho /= out.probability;
  } else {
    out.degenerate = true;
  }
  return out;
}

// -- Pauli strings and stabilizers --------------------------------------------

/// Signed tensor product of single-qubit Paulis, e.g. -YYX.
struct PauliString {
  std::string letters;
  int sign = 1;

  std::size_t qubits() const { return letters.size(); }

  friend bool operator==(const PauliString&, const PauliString&) = default;
};

inline std::string to_string(const PauliString& p) {
  return (p.sign < 0 ? "-" : "+") + p.letters;
}

/// Product a*b. Throws if the result carries an imaginary phase, which
/// cannot happen for commuting strings.
inline PauliString operator*(const PauliString& a, const PauliString& b) {
  if (a.qubits() != b.qubits()) throw std::invalid_argument("PauliString product: length mismatch");
  // Phase as a power of i.
  int phase = 0;
  std::string letters(a.qubits(), 'I');
  auto index = [](char c) { return c == 'X' ? 1 : c == 'Y' ? 2 : c == 'Z' ? 3 : 0; };
  static constexpr char kName[] = {'I', 'X', 'Y', 'Z'};
  for (std::size_t k = 0; k < a.qubits(); ++k) {
    const int x = index(a.letters[k]);
    const int y = index(b.letters[k]);
    if (x == 0 || y == 0 || x == y) {
      letters[k] = kName[x ^ y];
      continue;
    }
    const int z = 6 - x - y;
    letters[k] = kName[z];
    // XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
    phase += ((y - x + 3) % 3 == 1) ? 1 : 3;
  }
  phase %= 4;
  if (phase % 2) throw std::domain_error("PauliString product: anticommuting strings");
  PauliString out{letters, a.sign * b.sign * (phase == 2 ? -1 : 1)};
  return out;
}

inline ComplexMatrix pauli_matrix(const PauliString& p) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : p.letters) {
    ComplexMatrix s(2, 2);
    switch (c) {
      case 'I': s << 1, 0, 0, 1; break;
      case 'X': s << 0, 1, 1, 0; break;
      case 'Y': s << 0, Complex(0, -1), Complex(0, 1), 0; break;
      case 'Z': s << 1, 0, 0, -1; break;
      default: throw std::invalid_argument(std::string("pauli_matrix: bad letter ") + c);
    }
    ComplexMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * s;
    }
    out = std::move(next);
  }
  return static_cast<double>(p.sign) * out;
}

/// Nontrivial elements of the group generated by `generators`, in the order
/// of the binary subset index.
inline std::vector<PauliString> stabilizer_group(const std::vector<PauliString>& generators) {
  std::vector<PauliString> out;
  const std::size_t n = generators.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    PauliString acc{std::string(generators.front().qubits(), 'I'), 1};
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::uint64_t{1} << k)) acc = acc * generators[k];
    }
    out.push_back(acc);
  }
  return out;
}

/// The seven nontrivial stabilizers of (|000> + |111>)/sqrt(2).
inline std::vector<PauliString> ghz3_stabilizers() {
  return stabilizer_group({{"XXX", 1}, {"ZZI", 1}, {"IZZ", 1}});
}

inline double stabilizer_expectation(const ComplexMatrix& rho_q, const PauliString& s) {
  if (rho_q.rows() != (Eigen::Index{1} << s.qubits()) || rho_q.cols() != rho_q.rows()) {
    throw std::invalid_argument("stabilizer_expectation: qubit count mismatch");
  }
  return std::real((rho_q * pauli_matrix(s)).trace());
}

/// (1 - <S>) / 2.
inline double stabilizer_error(const ComplexMatrix& rho_q, const PauliString& s) {
  return 0.5 * (1.0 - stabilizer_expectation(rho_q, s));
}

inline ComplexVector ghz_vector(int qubits) {
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << qubits);
  v[0] = v[v.size() - 1] = 1.0 / std::numbers::sqrt2;
  return v;
}

inline double ghz_fidelity(const ComplexMatrix& rho_q) {
  const auto q = static_cast<int>(std::log2(static_cast<double>(rho_q.rows())) + 0.5);
  const ComplexVector g = ghz_vector(q);
  return std::real(g.dot(rho_q * g));
}

/// Angle of the dominant pure component written as
/// sin(alpha)|0...0> + cos(alpha)|1...1>.
struct GhzAngle {
  double alpha = 0.0;
  double purity = 0.0;
  bool mixed_warning = false;
};

inline constexpr double kPureThreshold = 0.999;

inline GhzAngle alpha_of(const ComplexMatrix& rho_q) {
  GhzAngle out;
  out.purity = std::real((rho_q * rho_q).trace());
  out.mixed_warning = out.purity < kPureThreshold;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_q);
  const ComplexVector v = es.eigenvectors().col(rho_q.rows() - 1);
  out.alpha = std::atan2(std::abs(v[0]), std::abs(v[v.size() - 1]));
  return out;
}

/// f = 1/2 + sin(2 alpha)/2 for the pure parametrized state.
inline double fidelity_from_alpha(double alpha) {
  return 0.5 + 0.5 * std::sin(2.0 * alpha);
}

// -- Power law ----------------------------------------------------------------

struct FitResult {
  double coefficient = 0.0;
  double exponent = 0.0;
  double residual = 0.0;  // RMS of log-space residuals
};

/// y = coefficient * x^exponent by least squares on (log x, log y).
inline FitResult power_law_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("power_law_fit: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("power_law_fit: data must be positive");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("power_law_fit: abscissae are all equal");
  FitResult fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.coefficient = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (intercept + fit.exponent * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace qloss

#endif  // QLOSS_METRICS_HPP_
