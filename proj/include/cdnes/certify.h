// Copyright 2026 The cdnes Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef CDNES_CERTIFY_H_
#define CDNES_CERTIFY_H_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdnes/compressors.h"
#include "cdnes/games.h"
#include "cdnes/graph.h"

namespace cdnes {

// Norm used for ||I - W||^2 in the rate constants. Frobenius is the
// default; the spectral norm gives tighter (smaller) constants.
enum class IwNorm { kFrobenius, kSpectral };

// Problem data entering the 3x3 error recursion.
struct RateInputs {
  int n = 0;
  double mu = 0.0;
  double L = 0.0;
  double s = 0.0;           // spectral gap of W
  double norm_iw_sq = 0.0;  // ||I - W||^2
  CompressionConstants comp;
  double alpha = 1.0;
};

RateInputs MakeRateInputs(const Game& game, const MixingMatrix& mix,
                          const CompressionConstants& comp, double alpha,
                          IwNorm norm = IwNorm::kFrobenius);

struct RateConstants {
  double tau3 = 0.0;
  double t_x = 0.0;        // 3 tau3 / (tau3 - 1)
  double c_x = 0.0;        // tau3 (1 - alpha r delta)
  double c1 = 0.0;         // (n - eta mu)^2 / (n (n - 2 eta mu))
  double c2 = 0.0;         // 4 / s
  double c3 = 0.0;         // (2C / s) ||I - W||^2, without a gamma factor
  double c4 = 0.0;         // t_x ||I - W||^2
  double c5 = 0.0;         // t_x C ||I - W||^2
  double rho_tilde = 0.0;  // 1 - gamma s
};

// Midpoint of the admissible interval (1, 1 / (1 - alpha r delta)); 2 when
// alpha r delta = 1 and the interval is unbounded.
double MidpointTau3(double alpha_r_delta);

RateConstants ComputeRateConstants(const RateInputs& in, double gamma, double eta, double tau3);

// Transition matrix of the (optimality, consensus, compression) error
// recursion:
//   [ 1 - eta mu/n        eta L^2 c1 / mu                 0            ]
//   [ eta^2 L^2 c2/gamma  (1+rt^2)/2 + eta^2 L^2 c2/gamma  c3 gamma     ]
//   [ 2 t_x eta^2 L^2     c4 gamma^2 + 2 t_x eta^2 L^2     c_x + c5 gamma^2 ]
// Throws InfeasibleError naming the violated hypothesis: eta above
// min{1/(3 mu), mu/(2 L^2)}, gamma s >= 1, or tau3 outside its interval.
Eigen::Matrix3d BuildTransitionMatrix(const RateInputs& in, double gamma, double eta,
                                      double tau3);

// Largest modulus root of det(lambda I - A).
double SpectralRadius3x3(const Eigen::Matrix3d& a);

// A eps <= theta eps, entry by entry.
bool ComponentwiseHolds(const Eigen::Matrix3d& a, const Eigen::Vector3d& eps, double theta);

enum class CertifyStrategy {
  // Closed-form choice of (eps, gamma, eta) from the sufficient conditions.
  kClosedForm,
  // Closed form first, then a grid over (tau3, gamma) with bisection on eta
  // that keeps the largest eta whose A admits a positive eps.
  kSearch,
};

struct CertifyOptions {
  CertifyStrategy strategy = CertifyStrategy::kSearch;
  int gamma_grid = 48;
  int tau3_grid = 12;  // interior tau3 points besides the midpoint
  int bisection_steps = 60;
};

struct ConditionCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // positive when the inequality holds
  bool ok = false;
};

struct RateCertificate {
  RateInputs inputs;
  RateConstants constants;
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d eps = Eigen::Vector3d::Zero();
  double gamma = 0.0;
  double eta = 0.0;
  double rho_bound = 1.0;  // 1 - eta mu / (n + 1)
  double rho_numeric = 1.0;
  Eigen::Vector3d row_margin = Eigen::Vector3d::Zero();  // rho_bound eps - A eps
  std::string strategy;

  // The closed-form construction, kept for the report even when the
  // search improves on it.
  double closed_form_gamma = 0.0;
  double closed_form_eta = 0.0;
  Eigen::Vector3d closed_form_eps = Eigen::Vector3d::Zero();
  std::vector<ConditionCheck> closed_form_conditions;
};

// Throws InfeasibleError when s <= 0, alpha r > 1, or the componentwise test
// fails (the failing row is named).
RateCertificate Certify(const RateInputs& in, const CertifyOptions& options = {});

void WriteReport(std::ostream& os, const RateCertificate& cert);

}  // namespace cdnes

#endif  // CDNES_CERTIFY_H_
