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

// Test-only reference computations. Nothing here calls into the library's
// permanent, evolution or loss code.

#ifndef QLOSS_TESTS_ORACLES_HPP_
#define QLOSS_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qloss::oracle {

using C = std::complex<double>;

/// Permanent as the literal sum over all n! permutations.
inline C permanent_bruteforce(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  C total = 0.0;
  do {
    C prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= m(i, p[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline double fact(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// <out| U |in> for single-photon-per-slot inputs via first quantization:
/// sum over assignments of input photons to output slots.
inline C amplitude_bruteforce(const Eigen::MatrixXcd& u, const std::vector<int>& in, const std::vector<int>& out) {
  std::vector<int> rows, cols;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < out[i]; ++c) rows.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < in.size(); ++j)
    for (int c = 0; c < in[j]; ++c) cols.push_back(static_cast<int>(j));
  if (rows.size() != cols.size()) return 0.0;
  Eigen::MatrixXcd sub(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = u(rows[a], cols[b]);
  double norm = 1.0;
  for (int c : out) norm *= fact(c);
  for (int c : in) norm *= fact(c);
  return permanent_bruteforce(sub) / std::sqrt(norm);
}

/// All occupation vectors of m modes with total n (any order).
inline std::vector<std::vector<int>> all_patterns(int m, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(m), 0);
  auto rec = [&](auto&& self, int k, int left) -> void {
    if (k == m - 1) {
      cur[static_cast<std::size_t>(k)] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[static_cast<std::size_t>(k)] = v;
      self(self, k + 1, left - v);
    }
  };
  if (m > 0) rec(rec, 0, n);
  return out;
}

inline Eigen::MatrixXcd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = C(g(rng), g(rng));
  return m;
}

// -- Test-side dilation oracle -----------------------------------------------
// Builds its own 3m-mode dilation, enumerates every output with brute-force
// permutation sums, and traces the virtual modes by grouping on their record.
using StateMap = std::map<std::pair<std::vector<int>, std::vector<int>>, C>;

struct OracleResult {
  double p_s = 0.0;
  StateMap rho;  // unnormalized, keyed by (row state, column state) on unmeasured modes
};

inline OracleResult independent_oracle(const Eigen::MatrixXcd& u, const Eigen::VectorXd& gin, const Eigen::VectorXd& gout,
                                const std::vector<int>& input, const std::vector<int>& hmodes,
                                const std::vector<std::vector<int>>& patterns) {
  const int m = static_cast<int>(u.rows());
  const int big = 3 * m;
  auto bs = [&](const Eigen::VectorXd& g, int off) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(big, big);
    for (int j = 0; j < m; ++j) {
      const double r = std::sqrt(1.0 - g[j] * g[j]);
      b(j, j) = g[j];
      b(off + j, off + j) = g[j];
      b(off + j, j) = r;
      b(j, off + j) = -r;
    }
    return b;
  };
  Eigen::MatrixXcd core = Eigen::MatrixXcd::Identity(big, big);
  core.topLeftCorner(m, m) = u;
  const Eigen::MatrixXcd w = bs(gout, 2 * m) * core * bs(gin, m);
  std::vector<int> in(static_cast<std::size_t>(big), 0);
  std::copy(input.begin(), input.end(), in.begin());
  int photons = 0;
  for (int c : input) photons += c;
  std::vector<int> unmeasured;
  for (int k = 0; k < m; ++k)
    if (std::find(hmodes.begin(), hmodes.end(), k) == hmodes.end()) unmeasured.push_back(k);

  OracleResult res;
  // Group amplitudes by (herald outcome, virtual record).
  std::map<std::vector<int>, std::map<std::vector<int>, C>> groups;
  for (const auto& out : all_patterns(big, photons)) {
    std::vector<int> meas;
    for (int h : hmodes) meas.push_back(out[static_cast<std::size_t>(h)]);
    if (std::find(patterns.begin(), patterns.end(), meas) == patterns.end()) continue;
    const C a = amplitude_bruteforce(w, in, out);
    if (std::norm(a) < 1e-300) continue;
    std::vector<int> record(meas);
    record.insert(record.end(), out.begin() + m, out.end());
    std::vector<int> nominal;
    for (int k : unmeasured) nominal.push_back(out[static_cast<std::size_t>(k)]);
    groups[record][nominal] += a;
  }
  for (const auto& [rec, vec] : groups) {
    for (const auto& [a, va] : vec) {
      res.p_s += std::norm(va);
      for (const auto& [b, vb] : vec) res.rho[{a, b}] += va * std::conj(vb);
    }
  }
  return res;
}

}  // namespace qloss::oracle

#endif  // QLOSS_TESTS_ORACLES_HPP_
