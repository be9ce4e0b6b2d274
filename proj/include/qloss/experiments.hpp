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

#ifndef QLOSS_EXPERIMENTS_HPP_
#define QLOSS_EXPERIMENTS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "qloss/fock.hpp"
#include "qloss/loss_model.hpp"
#include "qloss/metrics.hpp"
#include "qloss/numerics.hpp"
#include "qloss/parallel.hpp"

namespace qloss {

// -- Photon distillation: closed forms ------------------------------------------

/// Lossless success probability of the N-photon Fourier distillation
/// circuit: sum_{j=0}^{N-1} (-1)^j (j+1) prod_{i=1}^{j} (1 - i/N).
inline double p0_lossless(int n) {
  if (n < 2) throw std::invalid_argument("p0_lossless: N must be >= 2");
  double sum = 0.0;
  double prod = 1.0;
  for (int j = 0; j < n; ++j) {
    if (j > 0) prod *= 1.0 - static_cast<double>(j) / n;
    sum += ((j % 2) ? -1.0 : 1.0) * (j + 1) * prod;
  }
  return sum;
}

inline double lambda_rect_closed(int n, double eta) {
  if (n < 2) throw std::invalid_argument("lambda_rect_closed: N must be >= 2");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("lambda_rect_closed: eta must lie in [0, 1]");
  return std::pow(eta, n);
}

/// N (1 - eta) eta^N / (2 eta - eta^2 - eta^N). The denominator factors as
/// eta (1 - eta) (1 + sum_{k=0}^{N-2} eta^k), which removes the 0/0 at
/// eta = 1 (limit 1) and at eta = 0 (limit 0).
inline double lambda_tri_closed(int n, double eta) {
  if (n < 2) throw std::invalid_argument("lambda_tri_closed: N must be >= 2");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("lambda_tri_closed: eta must lie in [0, 1]");
  double geometric = 0.0;
  double pw = 1.0;
  for (int k = 0; k <= n - 2; ++k) {
    geometric += pw;
    pw *= eta;
  }
  return n * std::pow(eta, n - 1) / (1.0 + geometric);
}

inline double ps_rect_closed(int n, double eta) {
  return p0_lossless(n) * std::pow(eta, n * (n - 1));
}

// -- Photon distillation: exact simulation ------------------------------------

/// Which detection outcomes count as a successful herald.
enum class HeraldRule {
  /// Every (N-1)-photon pattern on the measured modes that occurs with
  /// nonzero probability in the lossless circuit together with exactly one
  /// photon in the output mode.
  kValidPatterns,
  /// Exactly one photon in each measured mode.
  kAllOnes,
};

struct DistillationSpec {
  int photons = 3;
  Design design = Design::kRectangular;
  double eta = 1.0;
  std::optional<int> output_mode;  // zero-based; default 0 (rect) or N-1 (tri)
  HeraldRule rule = HeraldRule::kValidPatterns;

  int resolved_output_mode() const {
    if (output_mode) return *output_mode;
    return design == Design::kRectangular ? 0 : photons - 1;
  }
};

struct DistillationResult {
  double p_s = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::size_t herald_patterns = 0;
  bool degenerate = false;
};

inline constexpr int kMaxDistillationPhotons = 5;
inline constexpr double kForbiddenProbability = 1e-20;

/// Accepted herald patterns for the Fourier distillation circuit, listed in
/// basis order of the lossless output.
inline HeraldSpec distillation_herald(int n, int output_mode, HeraldRule rule) {
  if (output_mode < 0 || output_mode >= n) throw std::invalid_argument("distillation: output mode out of range");
  std::vector<int> measured;
  for (int i = 0; i < n; ++i) {
    if (i != output_mode) measured.push_back(i);
  }
  if (rule == HeraldRule::kAllOnes) {
    return HeraldSpec(measured, std::vector<int>(measured.size(), 1));
  }
  const FockVector lossless = evolve_basis_state(fourier_unitary(n), FockState(std::vector<int>(n, 1)));
  std::vector<std::vector<int>> patterns;
  for (std::size_t k = 0; k < lossless.basis->size(); ++k) {
    const FockState& s = (*lossless.basis)[k];
    if (s.n[static_cast<std::size_t>(output_mode)] != 1) continue;
    if (std::norm(lossless.amplitudes[static_cast<Eigen::Index>(k)]) <= kForbiddenProbability) continue;
    std::vector<int> pat;
    for (int m : measured) pat.push_back(s.n[static_cast<std::size_t>(m)]);
    patterns.push_back(std::move(pat));
  }
  return HeraldSpec(measured, patterns);
}

inline DistillationResult distill_simulate(const DistillationSpec& spec, Parallelism par = {}) {
  const int n = spec.photons;
  if (n < 2 || n > kMaxDistillationPhotons) {
    throw std::invalid_argument("distill_simulate: N must lie in [2, " + std::to_string(kMaxDistillationPhotons) + "]");
  }
  const HeraldSpec herald = distillation_herald(n, spec.resolved_output_mode(), spec.rule);
  DistillationResult out;
  out.herald_patterns = herald.patterns.size();
  if (herald.patterns.empty()) {
    out.degenerate = true;
    return out;
  }
  const LossyTransform tr = compose_lossy(fourier_unitary(n), make_loss_model(spec.design, n, spec.eta));
  const ConditionalState cs = conditional_state(tr, FockState(std::vector<int>(n, 1)), herald, par);
  out.p_s = cs.p_s;
  out.degenerate = cs.degenerate;
  if (!cs.degenerate) out.lambda = conditional_transmittance(cs);
  return out;
}

// -- Haar sweeps ----------------------------------------------------------------

template <class Record>
struct ExperimentSweep {
  std::vector<Design> designs;
  std::vector<double> grid;
  int samples = 0;
  std::uint64_t base_seed = 0;
  std::vector<Record> records;
};

/// Seed of Haar sample `index`; independent of how samples are scheduled.
inline std::uint64_t sample_seed(std::uint64_t base, std::size_t index) {
  return base + static_cast<std::uint64_t>(index);
}

struct PreimageSample {
  double average = 0.0;
  double min_mode = 0.0;
  double max_mode = 0.0;
};

inline PreimageSample preimage_sample(const ComplexMatrix& u, Design design, double eta) {
  const auto m = static_cast<int>(u.rows());
  const ComplexMatrix t = compose_lossy(u, make_loss_model(design, m, eta)).t;
  PreimageSample s;
  s.min_mode = std::numeric_limits<double>::infinity();
  s.max_mode = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double f = preimage_fidelity(u, t, i);
    s.average += f;
    s.min_mode = std::min(s.min_mode, f);
    s.max_mode = std::max(s.max_mode, f);
  }
  s.average /= m;
  return s;
}

struct PreimageRecord {
  Design design;
  double eta;
  double avg_fidelity;
  double min_mode_fidelity;
  double max_mode_fidelity;
  int samples;
};

/// Mean over Haar samples of the average, worst-mode and best-mode preimage
/// fidelity, for every (design, eta). Records ordered by design, then eta.
inline ExperimentSweep<PreimageRecord> preimage_sweep(int m, const std::vector<Design>& designs,
                                                      const std::vector<double>& eta_grid, int samples,
                                                      std::uint64_t seed, Parallelism par = {}) {
  if (m < 2) throw std::invalid_argument("preimage_sweep: m must be >= 2");
  if (samples < 1) throw std::invalid_argument("preimage_sweep: need at least one sample");
  const std::size_t nd = designs.size();
  const std::size_t ne = eta_grid.size();
  std::vector<PreimageSample> slots(static_cast<std::size_t>(samples) * nd * ne);
  parallel_for(static_cast<std::size_t>(samples), par, [&](std::size_t s) {
    const ComplexMatrix u = haar_unitary(m, sample_seed(seed, s));
    for (std::size_t d = 0; d < nd; ++d) {
      for (std::size_t e = 0; e < ne; ++e) slots[(s * nd + d) * ne + e] = preimage_sample(u, designs[d], eta_grid[e]);
    }
  });
  ExperimentSweep<PreimageRecord> sweep{designs, eta_grid, samples, seed, {}};
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t e = 0; e < ne; ++e) {
      PreimageSample acc;
      for (std::size_t s = 0; s < static_cast<std::size_t>(samples); ++s) {
        const PreimageSample& x = slots[(s * nd + d) * ne + e];
        acc.average += x.average;
        acc.min_mode += x.min_mode;
        acc.max_mode += x.max_mode;
      }
      sweep.records.push_back({designs[d], eta_grid[e], acc.average / samples, acc.min_mode / samples,
                               acc.max_mode / samples, samples});
    }
  }
  return sweep;
}

struct PostselectedRecord {
  Design design;
  double loss_db;
  double mean_fidelity;
  int samples;
};

/// Mean postselected circuit fidelity per (design, loss in dB).
inline ExperimentSweep<PostselectedRecord> postselected_sweep(int m, const std::vector<Design>& designs,
                                                              const std::vector<double>& loss_grid_db, int samples,
                                                              std::uint64_t seed, Parallelism par = {}) {
  if (m < 2) throw std::invalid_argument("postselected_sweep: m must be >= 2");
  if (samples < 1) throw std::invalid_argument("postselected_sweep: need at least one sample");
  const std::size_t nd = designs.size();
  const std::size_t nl = loss_grid_db.size();
  std::vector<LossModel> models;
  for (Design d : designs) {
    for (double l : loss_grid_db) models.push_back(make_loss_model(d, m, eta_from_db(l)));
  }
  std::vector<double> slots(static_cast<std::size_t>(samples) * nd * nl);
  parallel_for(static_cast<std::size_t>(samples), par, [&](std::size_t s) {
    const ComplexMatrix u = haar_unitary(m, sample_seed(seed, s));
    for (std::size_t k = 0; k < models.size(); ++k) {
      slots[s * models.size() + k] = postselected_fidelity(u, compose_lossy(u, models[k]).t);
    }
  });
  ExperimentSweep<PostselectedRecord> sweep{designs, loss_grid_db, samples, seed, {}};
  for (std::size_t k = 0; k < models.size(); ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(samples); ++s) sum += slots[s * models.size() + k];
    sweep.records.push_back({designs[k / nl], loss_grid_db[k % nl], sum / samples, samples});
  }
  return sweep;
}

// -- GHZ-3 generation ---------------------------------------------------------

/// How the 10 x 6 circuit matrix is obtained.
enum class UsubSource {
  kPrinted,  // tabulated to four decimals
  kExact,    // each entry replaced by the closed form it rounds
};

inline constexpr int kGhzModes = 10;
inline constexpr int kGhzPhotons = 6;
inline constexpr double kUsubOrthonormalityTol = 1e-3;

/// Rows are output modes 1..10, columns the six photon-carrying inputs.
inline RealMatrix ghz_usub_printed() {
  RealMatrix u(kGhzModes, kGhzPhotons);
  // clang-format off
  u <<  0,       0,       0.3536, -0.3536, -0.3536,  0.3536,
        0,       0,       0.3536,  0.3536,  0.3536,  0.3536,
        0.4082,  0.4082,  0.2887,  0.2887, -0.2887, -0.2887,
        0.4082, -0.4082,  0.2887, -0.2887,  0.2887, -0.2887,
       -0.8165,  0,       0.2887,  0,       0,      -0.2887,
        0,       0,       0.5000,  0,       0,      -0.5000,
        0,       0,       0.5000,  0,       0,       0.5000,
        0,       0.8165,  0,      -0.2887,  0.2887,  0,
        0,       0,       0,      -0.5000,  0.5000,  0,
        0,       0,       0,       0.5000,  0.5000,  0;
  // clang-format on
  return u;
}

/// Printed entries snapped to 0, 1/(2 sqrt 2), 1/sqrt 6, 1/(2 sqrt 3), 1/2
/// or sqrt(2/3), whichever is nearest in magnitude; signs kept.
inline RealMatrix ghz_usub_exact() {
  static const std::array<double, 6> kValues = {0.0,
                                                1.0 / (2.0 * std::numbers::sqrt2),
                                                1.0 / std::sqrt(6.0),
                                                1.0 / (2.0 * std::numbers::sqrt3),
                                                0.5,
                                                std::sqrt(2.0 / 3.0)};
  RealMatrix u = ghz_usub_printed();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const double a = std::abs(u(i, j));
      const double* best = std::min_element(kValues.begin(), kValues.end(),
                                            [a](double x, double y) { return std::abs(x - a) < std::abs(y - a); });
      u(i, j) = std::copysign(*best, u(i, j));
    }
  }
  return u;
}

inline RealMatrix ghz_usub(UsubSource source) {
  return source == UsubSource::kPrinted ? ghz_usub_printed() : ghz_usub_exact();
}

/// Nearest matrix with orthonormal columns (polar factor U V^T of the SVD).
inline RealMatrix polar_orthonormalize(const RealMatrix& a) {
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

struct GhzSpec {
  UsubSource source = UsubSource::kPrinted;
  std::array<int, kGhzPhotons> input_ports = {4, 5, 6, 7, 8, 9};  // zero-based, column order
  Design design = Design::kTriangular;
  double eta = 0.9848;
  RailEncoding encoding = RailEncoding::kFirstModeOne;
  // Also require the spectator mode to be detected empty.
  bool herald_spectator_vacuum = false;
};

// Zero-based mode roles of the circuit.
inline const std::vector<int>& ghz_herald_modes() {
  static const std::vector<int> modes = {0, 2, 3};
  return modes;
}
inline constexpr int kGhzSpectatorMode = 1;
inline QubitLayout ghz_layout() { return QubitLayout{{{4, 5}, {6, 7}, {8, 9}}, {kGhzSpectatorMode}}; }

struct GhzReport {
  bool degenerate = false;
  bool orthonormalized = false;  // polar correction applied to the circuit matrix
  double p_s = 0.0;
  std::array<double, 3> qubit_lambdas{};
  double spectator_occupation = 0.0;
  double dualrail_prob = 0.0;
  double purity = 0.0;
  double fidelity = 0.0;
  double alpha = 0.0;
  bool mixed_warning = false;
  std::vector<std::pair<PauliString, double>> stabilizer_errors;
  ComplexMatrix rho_q;
  ComplexMatrix transfer;  // 10 x 6 lossy transfer matrix
  ConditionalState state;
};

namespace detail {

/// Places the six circuit columns at their input ports and fills the other
/// ports with an orthonormal basis of the complement.
inline ComplexMatrix embed_usub(const RealMatrix& usub, const std::array<int, kGhzPhotons>& ports) {
  std::vector<int> sorted(ports.begin(), ports.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.front() < 0 ||
      sorted.back() >= kGhzModes) {
    throw std::invalid_argument("GHZ input ports must be six distinct modes in [0, 10)");
  }
  Eigen::HouseholderQR<RealMatrix> qr(usub);
  const RealMatrix q = qr.householderQ();
  RealMatrix full(kGhzModes, kGhzModes);
  std::vector<bool> used(kGhzModes, false);
  for (int j = 0; j < kGhzPhotons; ++j) {
    full.col(ports[static_cast<std::size_t>(j)]) = usub.col(j);
    used[static_cast<std::size_t>(ports[static_cast<std::size_t>(j)])] = true;
  }
  int next = kGhzPhotons;
  for (int p = 0; p < kGhzModes; ++p) {
    if (!used[static_cast<std::size_t>(p)]) full.col(p) = q.col(next++);
  }
  return full.cast<Complex>();
}

}  // namespace detail

inline GhzReport ghz_pipeline(const GhzSpec& spec, Parallelism par = {}) {
  GhzReport rep;
  RealMatrix usub = ghz_usub(spec.source);
  const double orth_err = (usub.transpose() * usub - RealMatrix::Identity(kGhzPhotons, kGhzPhotons)).cwiseAbs().maxCoeff();
  if (orth_err > kUsubOrthonormalityTol) {
    usub = polar_orthonormalize(usub);
    rep.orthonormalized = true;
  }
  const double unitary_tol = spec.source == UsubSource::kPrinted && !rep.orthonormalized ? kUsubOrthonormalityTol : kUnitaryTol;
  const ComplexMatrix u = detail::embed_usub(usub, spec.input_ports);
  const LossyTransform tr = compose_lossy(u, make_loss_model(spec.design, kGhzModes, spec.eta), unitary_tol);
  rep.transfer.resize(kGhzModes, kGhzPhotons);
  for (int j = 0; j < kGhzPhotons; ++j) rep.transfer.col(j) = tr.t.col(spec.input_ports[static_cast<std::size_t>(j)]);

  std::vector<int> input(kGhzModes, 0);
  for (int p : spec.input_ports) input[static_cast<std::size_t>(p)] = 1;
  HeraldSpec herald(ghz_herald_modes(), std::vector<int>{1, 1, 1});
  QubitLayout layout = ghz_layout();
  if (spec.herald_spectator_vacuum) {
    herald = HeraldSpec({0, kGhzSpectatorMode, 2, 3}, std::vector<int>{1, 0, 1, 1});
    layout.spectators.clear();
  }
  rep.state = conditional_state(tr, FockState(input), herald, par);
  rep.p_s = rep.state.p_s;
  if (rep.state.degenerate) {
    rep.degenerate = true;
    return rep;
  }
  const auto lambdas = qubit_transmittances(rep.state, layout);
  std::copy(lambdas.begin(), lambdas.end(), rep.qubit_lambdas.begin());
  if (!spec.herald_spectator_vacuum) {
    const auto local = detail::local_mode(rep.state, kGhzSpectatorMode);
    const DensityMatrix spectator = partial_trace(rep.state.rho, {local});
    rep.spectator_occupation = 1.0 - std::real(spectator.entries(0, 0)) / spectator.trace();
  }
  const DualRailState dr = dual_rail_postselect(rep.state, layout, spec.encoding);
  rep.dualrail_prob = dr.probability;
  if (dr.degenerate) {
    rep.degenerate = true;
    return rep;
  }
  rep.rho_q = dr.rho;
  const GhzAngle angle = alpha_of(dr.rho);
  rep.purity = angle.purity;
  rep.alpha = angle.alpha;
  rep.mixed_warning = angle.mixed_warning;
  rep.fidelity = ghz_fidelity(dr.rho);
  for (const auto& s : ghz3_stabilizers()) rep.stabilizer_errors.emplace_back(s, stabilizer_error(dr.rho, s));
  return rep;
}

struct GhzAssignment {
  std::array<int, kGhzPhotons> ports{};
  double mean_lambda = 0.0;
  std::size_t evaluated = 0;
};

/// Searches the order-preserving choices of six input ports out of ten for
/// the one with the highest mean qubit transmittance. Ties keep the
/// lexicographically first assignment.
inline GhzAssignment best_input_assignment(GhzSpec spec, Parallelism par = {}) {
  std::vector<std::array<int, kGhzPhotons>> candidates;
  std::array<int, kGhzPhotons> cur{};
  auto rec = [&](auto&& self, int k, int start) -> void {
    if (k == kGhzPhotons) {
      candidates.push_back(cur);
      return;
    }
    for (int p = start; p <= kGhzModes - (kGhzPhotons - k); ++p) {
      cur[static_cast<std::size_t>(k)] = p;
      self(self, k + 1, p + 1);
    }
  };
  rec(rec, 0, 0);
  std::vector<double> scores(candidates.size(), -1.0);
  parallel_for(candidates.size(), par, [&](std::size_t c) {
    GhzSpec s = spec;
    s.input_ports = candidates[c];
    const GhzReport r = ghz_pipeline(s);
    if (!r.degenerate) scores[c] = (r.qubit_lambdas[0] + r.qubit_lambdas[1] + r.qubit_lambdas[2]) / 3.0;
  });
  GhzAssignment best;
  best.evaluated = candidates.size();
  best.mean_lambda = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (scores[c] > best.mean_lambda) {
      best.mean_lambda = scores[c];
      best.ports = candidates[c];
    }
  }
  return best;
}

struct GhzSweepPoint {
  double loss_db = 0.0;
  double eta = 1.0;
  double infidelity = 0.0;
  bool degenerate = false;
};

struct GhzSweep {
  std::vector<GhzSweepPoint> points;
  std::optional<FitResult> fit;
  std::vector<std::string> warnings;
};

/// Post-selected infidelity over a grid of unit-cell losses and its power-law
/// fit. Degenerate points are excluded from the fit with a warning.
inline GhzSweep ghz_infidelity_sweep(const std::vector<double>& loss_grid_db, GhzSpec base = {},
                                     Parallelism par = {}) {
  if (loss_grid_db.size() < 5) throw std::invalid_argument("ghz_infidelity_sweep: need at least 5 grid points");
  for (double l : loss_grid_db) {
    if (!(l > 0.0)) throw std::invalid_argument("ghz_infidelity_sweep: losses must be positive");
  }
  GhzSweep sweep;
  sweep.points.resize(loss_grid_db.size());
  parallel_for(loss_grid_db.size(), par, [&](std::size_t k) {
    GhzSpec s = base;
    s.eta = eta_from_db(loss_grid_db[k]);
    const GhzReport r = ghz_pipeline(s);
    sweep.points[k] = {loss_grid_db[k], s.eta, 1.0 - r.fidelity, r.degenerate};
  });
  std::vector<std::pair<double, double>> data;
  for (const auto& p : sweep.points) {
    if (p.degenerate || !(p.infidelity > 0.0)) {
      sweep.warnings.push_back("excluded point at " + std::to_string(p.loss_db) + " dB");
      continue;
    }
    data.emplace_back(p.loss_db, p.infidelity);
  }
  if (data.size() >= 3) sweep.fit = power_law_fit(data);
  return sweep;
}

}  // namespace qloss

#endif  // QLOSS_EXPERIMENTS_HPP_
