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

// Exact multiphoton simulation in the occupation-number basis.
//
// Lossy evolution uses the factorization T = D_out U D_in of a separable
// loss matrix: per-mode amplitude damping on the inputs (a classical
// mixture over surviving photons), the ideal unitary U, then per-mode
// amplitude damping on the outputs (Kraus operators E_l indexed by the
// number of photons l_i lost from each mode). Branches with a different
// input-survival pattern or a different loss vector l leave orthogonal
// records in the virtual modes and are summed incoherently.

#ifndef QLOSS_FOCK_HPP_
#define QLOSS_FOCK_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qloss/loss_model.hpp"
#include "qloss/numerics.hpp"
#include "qloss/parallel.hpp"

namespace qloss {

inline constexpr int kMaxConditionalPhotons = 8;
inline constexpr int kMaxOracleModes = 30;
inline constexpr int kMaxOraclePhotons = 6;
inline constexpr std::size_t kMaxDensityDimension = 4096;

/// Occupation numbers of m modes.
struct FockState {
  std::vector<int> n;

  FockState() = default;
  explicit FockState(std::vector<int> occupations) : n(std::move(occupations)) {}
  FockState(std::initializer_list<int> occupations) : n(occupations) {}

  int modes() const { return static_cast<int>(n.size()); }
  int photons() const { return std::accumulate(n.begin(), n.end(), 0); }
  int operator[](std::size_t i) const { return n[i]; }

  friend auto operator<=>(const FockState&, const FockState&) = default;
};

/// "n1|n2|...|nm".
inline std::string to_string(const FockState& s) {
  std::string out;
  for (std::size_t i = 0; i < s.n.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(s.n[i]);
  }
  return out;
}

/// All states of m modes holding exactly n photons, in ascending
/// lexicographic order. Ranking is combinatorial, O(m).
class FockBasis {
 public:
  FockBasis(int modes, int photons) : modes_(modes), photons_(photons) {
    if (modes < 1) throw std::invalid_argument("FockBasis: need at least one mode");
    if (photons < 0) throw std::invalid_argument("FockBasis: negative photon number");
    states_.reserve(static_cast<std::size_t>(count(modes, photons)));
    std::vector<int> cur(static_cast<std::size_t>(modes), 0);
    enumerate(0, photons, cur);
  }

  int modes() const { return modes_; }
  int photons() const { return photons_; }
  std::size_t size() const { return states_.size(); }
  const FockState& operator[](std::size_t i) const { return states_[i]; }
  const FockState& unrank(std::size_t i) const { return states_.at(i); }
  const std::vector<FockState>& states() const { return states_; }

  /// Number of ways to put r photons into q modes.
  static double count(int q, int r) {
    if (q <= 0) return r == 0 ? 1.0 : 0.0;
    return binomial(r + q - 1, q - 1);
  }

  std::size_t rank(const FockState& s) const {
    if (s.modes() != modes_ || s.photons() != photons_) {
      throw std::invalid_argument("FockBasis::rank: state " + to_string(s) + " is not in this basis");
    }
    double r = 0.0;
    int remaining = photons_;
    for (int k = 0; k + 1 < modes_; ++k) {
      const int tail_modes = modes_ - k - 1;
      for (int v = 0; v < s.n[k]; ++v) r += count(tail_modes, remaining - v);
      remaining -= s.n[k];
    }
    return static_cast<std::size_t>(r);
  }

 private:
  void enumerate(int k, int remaining, std::vector<int>& cur) {
    if (k == modes_ - 1) {
      cur[k] = remaining;
      states_.emplace_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[k] = v;
      enumerate(k + 1, remaining - v, cur);
    }
    cur[k] = 0;
  }

  int modes_;
  int photons_;
  std::vector<FockState> states_;
};

/// Pure (possibly sub-normalized) state at fixed photon number.
struct FockVector {
  std::shared_ptr<const FockBasis> basis;
  ComplexVector amplitudes;

  FockVector() = default;
  explicit FockVector(std::shared_ptr<const FockBasis> b)
      : basis(std::move(b)), amplitudes(ComplexVector::Zero(static_cast<Eigen::Index>(basis->size()))) {}

  double norm() const { return amplitudes.norm(); }
  Complex amplitude(const FockState& s) const { return amplitudes[static_cast<Eigen::Index>(basis->rank(s))]; }
  Complex& amplitude(const FockState& s) { return amplitudes[static_cast<Eigen::Index>(basis->rank(s))]; }
};

inline FockVector basis_vector(const FockState& s) {
  FockVector v(std::make_shared<const FockBasis>(s.modes(), s.photons()));
  v.amplitude(s) = 1.0;
  return v;
}

/// Direct sum of the fixed-photon-number bases 0..cutoff over m modes.
/// Sector n occupies the contiguous index range starting at offset(n).
class FockSpace {
 public:
  FockSpace() = default;
  FockSpace(int modes, int cutoff) : modes_(modes), cutoff_(cutoff) {
    if (cutoff < 0) throw std::invalid_argument("FockSpace: negative cutoff");
    std::size_t off = 0;
    for (int n = 0; n <= cutoff; ++n) {
      sectors_.push_back(std::make_shared<const FockBasis>(modes, n));
      offsets_.push_back(off);
      off += sectors_.back()->size();
    }
    dim_ = off;
  }

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  std::size_t dimension() const { return dim_; }
  const FockBasis& sector(int n) const { return *sectors_.at(static_cast<std::size_t>(n)); }
  std::shared_ptr<const FockBasis> sector_ptr(int n) const { return sectors_.at(static_cast<std::size_t>(n)); }
  std::size_t offset(int n) const { return offsets_.at(static_cast<std::size_t>(n)); }

  std::size_t index_of(const FockState& s) const {
    const int n = s.photons();
    if (n > cutoff_) throw std::out_of_range("FockSpace::index_of: photon number above cutoff");
    return offsets_[static_cast<std::size_t>(n)] + sectors_[static_cast<std::size_t>(n)]->rank(s);
  }

  const FockState& state_at(std::size_t idx) const {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), idx);
    const auto n = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
    return (*sectors_[n])[idx - offsets_[n]];
  }

 private:
  int modes_ = 0;
  int cutoff_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::shared_ptr<const FockBasis>> sectors_;
  std::vector<std::size_t> offsets_;
};

/// Density operator over a truncated Fock space.
struct DensityMatrix {
  FockSpace space;
  ComplexMatrix entries;

  DensityMatrix() = default;
  explicit DensityMatrix(FockSpace s)
      : space(std::move(s)),
        entries(ComplexMatrix::Zero(static_cast<Eigen::Index>(space.dimension()),
                                    static_cast<Eigen::Index>(space.dimension()))) {}

  int modes() const { return space.modes(); }
  double trace() const { return std::real(entries.trace()); }
  double purity() const { return std::real((entries * entries).trace()); }
  Complex operator()(const FockState& a, const FockState& b) const {
    return entries(static_cast<Eigen::Index>(space.index_of(a)), static_cast<Eigen::Index>(space.index_of(b)));
  }
  double population(const FockState& s) const { return std::real((*this)(s, s)); }
};

inline DensityMatrix pure_density(const FockVector& v, int cutoff) {
  DensityMatrix rho(FockSpace(v.basis->modes(), cutoff));
  const std::size_t off = rho.space.offset(v.basis->photons());
  const auto n = static_cast<Eigen::Index>(v.basis->size());
  rho.entries.block(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(off), n, n) =
      v.amplitudes * v.amplitudes.adjoint();
  return rho;
}

/// Detection outcome(s) accepted on a set of measured modes. Each pattern
/// lists the required photon count per measured mode; distinct patterns are
/// distinct outcomes and combine incoherently.
struct HeraldSpec {
  std::vector<int> modes;
  std::vector<std::vector<int>> patterns;

  HeraldSpec() = default;
  HeraldSpec(std::vector<int> measured, std::vector<int> pattern)
      : modes(std::move(measured)), patterns{std::move(pattern)} {}
  HeraldSpec(std::vector<int> measured, std::vector<std::vector<int>> accepted)
      : modes(std::move(measured)), patterns(std::move(accepted)) {}

  void validate(int total_modes) const {
    std::set<int> seen;
    for (int m : modes) {
      if (m < 0 || m >= total_modes) throw std::invalid_argument("HeraldSpec: measured mode out of range");
      if (!seen.insert(m).second) throw std::invalid_argument("HeraldSpec: measured modes must be distinct");
    }
    if (patterns.empty()) throw std::invalid_argument("HeraldSpec: no accepted pattern");
    for (const auto& p : patterns) {
      if (p.size() != modes.size()) throw std::invalid_argument("HeraldSpec: pattern length mismatch");
      for (int c : p) {
        if (c < 0) throw std::invalid_argument("HeraldSpec: negative photon count");
      }
    }
  }

  std::vector<int> unmeasured(int total_modes) const {
    std::vector<int> out;
    for (int m = 0; m < total_modes; ++m) {
      if (std::find(modes.begin(), modes.end(), m) == modes.end()) out.push_back(m);
    }
    return out;
  }

  int min_photons() const {
    int best = std::numeric_limits<int>::max();
    for (const auto& p : patterns) best = std::min(best, std::accumulate(p.begin(), p.end(), 0));
    return best;
  }
};

/// Heralded state on the unmeasured modes. `modes` maps the local mode order
/// of `rho` back to interferometer mode indices.
struct ConditionalState {
  double p_s = 0.0;
  DensityMatrix rho;
  std::vector<int> modes;
  bool degenerate = false;
};

// -- Unitary evolution -------------------------------------------------------

namespace detail {

inline std::vector<int> expand_indices(const std::vector<int>& occupations) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    for (int c = 0; c < occupations[i]; ++c) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

inline double occupation_factorials(const std::vector<int>& occupations) {
  double f = 1.0;
  for (int c : occupations) f *= factorial(c);
  return f;
}

}  // namespace detail

/// <output| U |input> = perm(u[output|input]) / sqrt(prod output! prod input!),
/// where row i of u is repeated output_i times and column j input_j times.
inline Complex transition_amplitude(const ComplexMatrix& u, const FockState& input, const FockState& output) {
  if (u.rows() != output.modes() || u.cols() != input.modes()) {
    throw std::invalid_argument("transition_amplitude: mode count does not match the matrix");
  }
  if (input.photons() != output.photons()) {
    throw std::invalid_argument("transition_amplitude: photon numbers differ (" + to_string(input) + " -> " +
                                to_string(output) + ")");
  }
  const auto rows = detail::expand_indices(output.n);
  const auto cols = detail::expand_indices(input.n);
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = u(rows[a], cols[b]);
  }
  const double norm = std::sqrt(detail::occupation_factorials(output.n) * detail::occupation_factorials(input.n));
  return permanent(sub) / norm;
}

/// Image of one occupation-number state under u, over the full basis of the
/// same photon number. Only the columns of occupied input modes are read.
inline FockVector evolve_basis_state(const ComplexMatrix& u, const FockState& input) {
  if (u.cols() != input.modes()) throw std::invalid_argument("evolve_basis_state: mode count mismatch");
  auto basis = std::make_shared<const FockBasis>(static_cast<int>(u.rows()), input.photons());
  FockVector out(basis);
  const auto cols = detail::expand_indices(input.n);
  const auto n = static_cast<Eigen::Index>(cols.size());
  const double in_norm = detail::occupation_factorials(input.n);
  ComplexMatrix sub(n, n);
  for (std::size_t k = 0; k < basis->size(); ++k) {
    const FockState& s = (*basis)[k];
    const auto rows = detail::expand_indices(s.n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = u(rows[a], cols[b]);
    }
    out.amplitudes[static_cast<Eigen::Index>(k)] =
        permanent(sub) / std::sqrt(in_norm * detail::occupation_factorials(s.n));
  }
  return out;
}

inline FockVector evolve_pure(const ComplexMatrix& u, const FockVector& psi) {
  if (u.rows() != u.cols() || u.rows() != psi.basis->modes()) {
    throw std::invalid_argument("evolve_pure: dimension mismatch");
  }
  FockVector out(psi.basis);
  for (std::size_t k = 0; k < psi.basis->size(); ++k) {
    const Complex a = psi.amplitudes[static_cast<Eigen::Index>(k)];
    if (a == Complex(0.0, 0.0)) continue;
    out.amplitudes += a * evolve_basis_state(u, (*psi.basis)[k]).amplitudes;
  }
  return out;
}

// -- Loss channels -----------------------------------------------------------

/// Per-mode amplitude damping of a product Fock state with per-photon
/// survival probability in_amps(j)^2. Returns the classical mixture of
/// surviving states; zero-weight branches are dropped.
inline std::vector<std::pair<double, FockState>> input_loss_mixture(const FockState& input,
                                                                    const RealVector& in_amps) {
  if (in_amps.size() != input.modes()) throw std::invalid_argument("input_loss_mixture: amplitude count mismatch");
  std::vector<std::pair<double, FockState>> out;
  std::vector<int> kept(input.n.size(), 0);
  const auto m = input.n.size();
  auto recurse = [&](auto&& self, std::size_t j, double weight) -> void {
    if (weight == 0.0) return;
    if (j == m) {
      out.emplace_back(weight, FockState(kept));
      return;
    }
    const double t = in_amps[static_cast<Eigen::Index>(j)] * in_amps[static_cast<Eigen::Index>(j)];
    const int n = input.n[j];
    for (int k = n; k >= 0; --k) {
      kept[j] = k;
      const double w = binomial(n, k) * std::pow(t, k) * std::pow(1.0 - t, n - k);
      self(self, j + 1, weight * w);
    }
    kept[j] = 0;
  };
  recurse(recurse, 0, 1.0);
  return out;
}

namespace detail {

/// Amplitude factor of the single-mode damping Kraus operator E_l on |n>:
/// sqrt(C(n, l)) g^(n - l) r^l with g the amplitude transmission and
/// r = sqrt(1 - g^2).
inline double damping_factor(int n, int lost, double g) {
  if (lost < 0 || lost > n) return 0.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - g * g));
  return std::sqrt(binomial(n, lost)) * std::pow(g, n - lost) * std::pow(r, lost);
}

}  // namespace detail

/// E_l psi for the output damping channel with transmittances out_amps^2.
inline FockVector apply_output_loss_kraus(const FockVector& psi, const std::vector<int>& lost,
                                          const RealVector& out_amps) {
  const int m = psi.basis->modes();
  if (static_cast<int>(lost.size()) != m || out_amps.size() != m) {
    throw std::invalid_argument("apply_output_loss_kraus: loss vector length mismatch");
  }
  const int total_lost = std::accumulate(lost.begin(), lost.end(), 0);
  const int remaining = psi.basis->photons() - total_lost;
  FockVector out(std::make_shared<const FockBasis>(m, std::max(remaining, 0)));
  if (remaining < 0) return out;
  std::vector<int> target(static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < psi.basis->size(); ++k) {
    const Complex a = psi.amplitudes[static_cast<Eigen::Index>(k)];
    if (a == Complex(0.0, 0.0)) continue;
    const FockState& s = (*psi.basis)[k];
    double coef = 1.0;
    for (int i = 0; i < m && coef != 0.0; ++i) {
      coef *= detail::damping_factor(s.n[i], lost[i], out_amps[i]);
      target[i] = s.n[i] - lost[i];
    }
    if (coef == 0.0) continue;
    out.amplitude(FockState(target)) += coef * a;
  }
  return out;
}

// -- Heralded conditional state ----------------------------------------------

namespace detail {

using SparseVector = std::map<std::size_t, Complex>;

inline void add_outer(ComplexMatrix& rho, const SparseVector& v, double weight) {
  for (const auto& [i, a] : v) {
    for (const auto& [j, b] : v) {
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += weight * a * std::conj(b);
    }
  }
}

inline FockState select_modes(const FockState& s, const std::vector<int>& modes) {
  std::vector<int> out;
  out.reserve(modes.size());
  for (int m : modes) out.push_back(s.n[static_cast<std::size_t>(m)]);
  return FockState(std::move(out));
}

inline ConditionalState finish_conditional(ComplexMatrix rho, FockSpace space, std::vector<int> modes) {
  ConditionalState cs;
  cs.modes = std::move(modes);
  cs.rho = DensityMatrix(std::move(space));
  cs.p_s = std::real(rho.trace());
  if (cs.p_s > 0.0) {
    cs.rho.entries = rho / cs.p_s;
  } else {
    cs.p_s = 0.0;
    cs.degenerate = true;
    cs.rho.entries(0, 0) = 1.0;
  }
  return cs;
}

inline ConditionalState degenerate_conditional(const std::vector<int>& unmeasured) {
  ConditionalState cs;
  cs.modes = unmeasured;
  cs.rho = DensityMatrix(FockSpace(static_cast<int>(std::max<std::size_t>(unmeasured.size(), 1)), 0));
  cs.rho.entries(0, 0) = 1.0;
  cs.degenerate = true;
  return cs;
}

inline FockSpace checked_space(int modes, int cutoff) {
  const double dim = FockBasis::count(modes + 1, cutoff);  // states with <= cutoff photons
  if (dim > static_cast<double>(kMaxDensityDimension)) {
    throw std::length_error("conditional state: density matrix dimension " + std::to_string(dim) +
                            " exceeds the supported maximum");
  }
  return FockSpace(modes, cutoff);
}

}  // namespace detail

/// Heralded state on the unmeasured modes by exact branch-and-accumulate:
/// input damping mixture, ideal evolution of each surviving branch, output
/// damping Kraus operators, projection on the herald, incoherent sum over
/// branches. p_s is the trace before normalization.
inline ConditionalState conditional_state(const LossyTransform& tr, const FockState& input,
                                          const HeraldSpec& herald, Parallelism par = {}) {
  const int m = tr.modes();
  if (input.modes() != m) throw std::invalid_argument("conditional_state: input mode count mismatch");
  if (input.photons() > kMaxConditionalPhotons) {
    throw std::invalid_argument("conditional_state: at most " + std::to_string(kMaxConditionalPhotons) +
                                " input photons are supported");
  }
  herald.validate(m);
  if (!tr.loss.separable()) {
    throw std::invalid_argument("conditional_state: requires a separable loss model");
  }
  const std::vector<int> unmeasured = herald.unmeasured(m);
  if (unmeasured.empty()) throw std::invalid_argument("conditional_state: every mode is measured");
  const int cutoff = input.photons() - herald.min_photons();
  if (cutoff < 0) return detail::degenerate_conditional(unmeasured);

  const FockSpace space = detail::checked_space(static_cast<int>(unmeasured.size()), cutoff);
  const RealVector& g_out = tr.loss.out_amps;
  const auto branches = input_loss_mixture(input, tr.loss.in_amps);
  const std::set<std::vector<int>> accepted(herald.patterns.begin(), herald.patterns.end());
  const int n_meas = static_cast<int>(herald.modes.size());
  const int n_un = static_cast<int>(unmeasured.size());

  // Per branch: (pattern, loss vector) -> unnormalized vector on unmeasured modes.
  using Key = std::pair<std::vector<int>, std::vector<int>>;
  std::vector<std::map<Key, detail::SparseVector>> records(branches.size());

  parallel_for(branches.size(), par, [&](std::size_t b) {
    const FockVector evolved = evolve_basis_state(tr.u, branches[b].second);
    auto& rec = records[b];
    std::vector<int> lost(static_cast<std::size_t>(m), 0);
    std::vector<int> pattern(static_cast<std::size_t>(n_meas));
    std::vector<int> left(static_cast<std::size_t>(n_un));
    for (std::size_t k = 0; k < evolved.basis->size(); ++k) {
      const Complex a = evolved.amplitudes[static_cast<Eigen::Index>(k)];
      if (std::norm(a) == 0.0) continue;
      const FockState& s = (*evolved.basis)[k];
      for (const auto& pat : accepted) {
        double meas_factor = 1.0;
        for (int p = 0; p < n_meas && meas_factor != 0.0; ++p) {
          const int mode = herald.modes[static_cast<std::size_t>(p)];
          const int l = s.n[static_cast<std::size_t>(mode)] - pat[static_cast<std::size_t>(p)];
          lost[static_cast<std::size_t>(mode)] = l;
          meas_factor *= detail::damping_factor(s.n[static_cast<std::size_t>(mode)], l, g_out[mode]);
        }
        if (meas_factor == 0.0) continue;
        // Enumerate losses on unmeasured modes.
        auto recurse = [&](auto&& self, int u, double factor) -> void {
          if (factor == 0.0) return;
          if (u == n_un) {
            const std::size_t idx = space.index_of(FockState(left));
            rec[Key(pat, lost)][idx] += factor * a;
            return;
          }
          const auto mode = static_cast<std::size_t>(unmeasured[static_cast<std::size_t>(u)]);
          for (int l = 0; l <= s.n[mode]; ++l) {
            lost[mode] = l;
            left[static_cast<std::size_t>(u)] = s.n[mode] - l;
            self(self, u + 1, factor * detail::damping_factor(s.n[mode], l, g_out[static_cast<Eigen::Index>(mode)]));
          }
          lost[mode] = 0;
        };
        recurse(recurse, 0, meas_factor);
      }
    }
  });

  const auto dim = static_cast<Eigen::Index>(space.dimension());
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  for (std::size_t b = 0; b < branches.size(); ++b) {
    for (const auto& [key, vec] : records[b]) detail::add_outer(rho, vec, branches[b].first);
  }
  return detail::finish_conditional(std::move(rho), space, unmeasured);
}

/// Reference path: the pure input, with every virtual mode in vacuum, is
/// evolved through the 3m-mode dilation; the herald is projected on the
/// nominal measured modes and all 2m virtual modes are traced out.
inline ConditionalState oracle_conditional_state_dilated(const LossyTransform& tr, const FockState& input,
                                                         const HeraldSpec& herald) {
  const int m = tr.modes();
  if (input.modes() != m) throw std::invalid_argument("oracle: input mode count mismatch");
  if (3 * m > kMaxOracleModes || input.photons() > kMaxOraclePhotons) {
    throw std::invalid_argument("oracle: size guard exceeded (at most " + std::to_string(kMaxOracleModes) +
                                " dilated modes and " + std::to_string(kMaxOraclePhotons) + " photons)");
  }
  herald.validate(m);
  const std::vector<int> unmeasured = herald.unmeasured(m);
  if (unmeasured.empty()) throw std::invalid_argument("oracle: every mode is measured");
  const int cutoff = input.photons() - herald.min_photons();
  if (cutoff < 0) return detail::degenerate_conditional(unmeasured);

  const ComplexMatrix big = dilate(tr);
  std::vector<int> in_big(static_cast<std::size_t>(3 * m), 0);
  std::copy(input.n.begin(), input.n.end(), in_big.begin());
  const FockState big_input(in_big);

  // Free modes: unmeasured nominal followed by all virtual modes.
  std::vector<int> free_modes = unmeasured;
  for (int v = m; v < 3 * m; ++v) free_modes.push_back(v);
  const int n_un = static_cast<int>(unmeasured.size());

  const FockSpace space(n_un, cutoff);
  const auto dim = static_cast<Eigen::Index>(space.dimension());
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);

  for (const auto& pat : herald.patterns) {
    const int rest = input.photons() - std::accumulate(pat.begin(), pat.end(), 0);
    if (rest < 0) continue;
    std::map<std::vector<int>, detail::SparseVector> by_record;
    const FockBasis free_basis(static_cast<int>(free_modes.size()), rest);
    std::vector<int> out(static_cast<std::size_t>(3 * m), 0);
    for (const auto& fs : free_basis.states()) {
      std::fill(out.begin(), out.end(), 0);
      for (std::size_t p = 0; p < herald.modes.size(); ++p) out[static_cast<std::size_t>(herald.modes[p])] = pat[p];
      for (std::size_t f = 0; f < free_modes.size(); ++f) out[static_cast<std::size_t>(free_modes[f])] = fs.n[f];
      const Complex a = transition_amplitude(big, big_input, FockState(out));
      if (std::norm(a) == 0.0) continue;
      const std::vector<int> record(out.begin() + m, out.end());
      std::vector<int> nominal(fs.n.begin(), fs.n.begin() + n_un);
      by_record[record][space.index_of(FockState(std::move(nominal)))] += a;
    }
    for (const auto& [record, vec] : by_record) detail::add_outer(rho, vec, 1.0);
  }
  return detail::finish_conditional(std::move(rho), space, unmeasured);
}

/// Partial trace onto the listed local modes (in the given order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::set<int> seen;
  for (int k : keep) {
    if (k < 0 || k >= rho.modes()) throw std::invalid_argument("partial_trace: mode out of range");
    if (!seen.insert(k).second) throw std::invalid_argument("partial_trace: duplicate mode");
  }
  std::vector<int> traced;
  for (int k = 0; k < rho.modes(); ++k) {
    if (!seen.count(k)) traced.push_back(k);
  }
  DensityMatrix out(FockSpace(static_cast<int>(keep.size()), rho.space.cutoff()));
  std::map<std::vector<int>, std::vector<std::pair<Eigen::Index, Eigen::Index>>> groups;
  for (std::size_t i = 0; i < rho.space.dimension(); ++i) {
    const FockState& s = rho.space.state_at(i);
    const auto kept_idx = static_cast<Eigen::Index>(out.space.index_of(detail::select_modes(s, keep)));
    groups[detail::select_modes(s, traced).n].emplace_back(static_cast<Eigen::Index>(i), kept_idx);
  }
  for (const auto& [env, members] : groups) {
    for (const auto& [i, ki] : members) {
      for (const auto& [j, kj] : members) out.entries(ki, kj) += rho.entries(i, j);
    }
  }
  return out;
}

}  // namespace qloss

#endif  // QLOSS_FOCK_HPP_
