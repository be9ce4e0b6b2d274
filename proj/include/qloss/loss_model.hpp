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

#ifndef QLOSS_LOSS_MODEL_HPP_
#define QLOSS_LOSS_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qloss/numerics.hpp"

namespace qloss {

enum class Design { kRectangular, kTriangular };

inline std::string_view to_string(Design d) {
  return d == Design::kRectangular ? "rectangular" : "triangular";
}

inline std::optional<Design> parse_design(std::string_view s) {
  if (s == "rect" || s == "rectangular") return Design::kRectangular;
  if (s == "tri" || s == "triangular") return Design::kTriangular;
  return std::nullopt;
}

inline constexpr double kSeparabilityTol = 1e-12;

/// Single-photon transmission efficiency for a loss given in dB.
inline double eta_from_db(double loss_db) {
  if (!(loss_db >= 0.0)) throw std::invalid_argument("eta_from_db: loss must be >= 0 dB");
  return std::pow(10.0, -loss_db / 10.0);
}

/// Amplitude transmittance between every output/input port pair of a mesh.
///
/// For the two mesh designs the matrix is rank one, gamma(i, j) =
/// out_amps(i) * in_amps(j): every loss element can be pushed to a diagonal
/// attenuator on the inputs or the outputs. A general matrix without that
/// factorization can be wrapped too; it then carries empty amplitude vectors
/// and cannot be dilated.
struct LossModel {
  int m = 0;
  double eta = 1.0;
  std::optional<Design> design;
  RealMatrix gamma;
  RealVector in_amps;
  RealVector out_amps;

  bool separable() const {
    if (in_amps.size() != m || out_amps.size() != m) return false;
    const RealMatrix outer = out_amps * in_amps.transpose();
    return (outer - gamma).cwiseAbs().maxCoeff() <= kSeparabilityTol;
  }
};

namespace detail {

inline void require_eta(double eta, const char* what) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": eta must lie in [0, 1]");
  }
}

}  // namespace detail

/// Balanced mesh: every path crosses m lossy elements, Gamma = sqrt(eta)^m.
inline LossModel gamma_rectangular(int m, double eta) {
  if (m < 1) throw std::invalid_argument("gamma_rectangular: m must be >= 1");
  detail::require_eta(eta, "gamma_rectangular");
  LossModel lm;
  lm.m = m;
  lm.eta = eta;
  lm.design = Design::kRectangular;
  const double amp = std::pow(eta, m / 4.0);
  lm.in_amps = RealVector::Constant(m, amp);
  lm.out_amps = RealVector::Constant(m, amp);
  lm.gamma = RealMatrix::Constant(m, m, std::pow(eta, m / 2.0));
  return lm;
}

/// Triangular mesh. With one-based i, j >= 2 the exponent of sqrt(eta) is
/// 1 + 2m - i - j; row 1 and column 1 copy row 2 and column 2. Both clamps
/// are folded into the per-port factor
///   g(j) = eta^(1/4) * eta^((m - max(j, 2)) / 2).
inline LossModel gamma_triangular(int m, double eta) {
  if (m < 2) throw std::invalid_argument("gamma_triangular: m must be >= 2");
  detail::require_eta(eta, "gamma_triangular");
  LossModel lm;
  lm.m = m;
  lm.eta = eta;
  lm.design = Design::kTriangular;
  lm.in_amps.resize(m);
  for (int j = 0; j < m; ++j) {
    const int port = std::max(j + 1, 2);
    lm.in_amps[j] = std::pow(eta, 0.25) * std::pow(eta, (m - port) / 2.0);
  }
  lm.out_amps = lm.in_amps;
  lm.gamma = lm.out_amps * lm.in_amps.transpose();
  return lm;
}

inline LossModel make_loss_model(Design design, int m, double eta) {
  return design == Design::kRectangular ? gamma_rectangular(m, eta) : gamma_triangular(m, eta);
}

/// Wraps an arbitrary loss matrix with entries in [0, 1].
inline LossModel general_loss(const RealMatrix& gamma) {
  if (gamma.rows() != gamma.cols()) throw std::invalid_argument("general_loss: gamma must be square");
  if (gamma.size() > 0 && (gamma.minCoeff() < 0.0 || gamma.maxCoeff() > 1.0)) {
    throw std::invalid_argument("general_loss: entries must lie in [0, 1]");
  }
  LossModel lm;
  lm.m = static_cast<int>(gamma.rows());
  lm.eta = std::numeric_limits<double>::quiet_NaN();
  lm.gamma = gamma;
  return lm;
}

/// Lossy transfer matrix t = gamma (entrywise) u together with its origin.
struct LossyTransform {
  ComplexMatrix t;
  ComplexMatrix u;
  LossModel loss;

  int modes() const { return static_cast<int>(u.rows()); }
};

/// Builds t = gamma (entrywise) u. `unitary_tol` bounds how far u may be from
/// unitary; tabulated matrices with few printed digits need a looser bound.
inline LossyTransform compose_lossy(const ComplexMatrix& u, const LossModel& loss,
                                    double unitary_tol = kUnitaryTol) {
  if (u.rows() != u.cols()) throw std::invalid_argument("compose_lossy: u must be square");
  if (u.rows() != loss.m || loss.gamma.rows() != loss.m || loss.gamma.cols() != loss.m) {
    throw std::invalid_argument("compose_lossy: dimension mismatch between u (" +
                                std::to_string(u.rows()) + ") and loss model (" +
                                std::to_string(loss.m) + ")");
  }
  if (!is_unitary(u, unitary_tol)) throw std::invalid_argument("compose_lossy: u is not unitary");
  LossyTransform tr;
  tr.u = u;
  tr.loss = loss;
  tr.t = loss.gamma.cast<Complex>().cwiseProduct(u);
  if (!is_subunitary(tr.t, unitary_tol)) {
    throw std::invalid_argument("compose_lossy: gamma (entrywise) u is not sub-unitary");
  }
  return tr;
}

/// Unitary dilation over 3m modes ordered [nominal | input-virtual |
/// output-virtual]: B_out * (U (+) I_2m) * B_in, where B_in mixes nominal
/// mode j with virtual mode m + j at transmission amplitude in_amps(j) and
/// B_out mixes nominal i with virtual 2m + i at out_amps(i). The nominal
/// block of the result is t.
inline ComplexMatrix dilate(const LossyTransform& tr) {
  const LossModel& loss = tr.loss;
  if (!loss.separable()) {
    throw std::invalid_argument(
        "dilate: loss matrix is not a separable (rank-one) product of input and output "
        "amplitudes; only separable losses are dilated");
  }
  const int m = tr.modes();
  const int total = 3 * m;
  auto coupler = [&](const RealVector& amps, int virtual_offset) {
    ComplexMatrix b = ComplexMatrix::Identity(total, total);
    for (int j = 0; j < m; ++j) {
      const double g = amps[j];
      const double r = std::sqrt(std::max(0.0, 1.0 - g * g));
      const int v = virtual_offset + j;
      b(j, j) = g;
      b(v, j) = r;
      b(j, v) = -r;
      b(v, v) = g;
    }
    return b;
  };
  ComplexMatrix core = ComplexMatrix::Identity(total, total);
  core.topLeftCorner(m, m) = tr.u;
  return coupler(loss.out_amps, 2 * m) * core * coupler(loss.in_amps, m);
}

}  // namespace qloss

#endif  // QLOSS_LOSS_MODEL_HPP_
