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

#include "cdnes/certify.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "cdnes/errors.h"

namespace cdnes {

namespace {

// gamma s must stay below 1; this is the largest gamma s the search uses.
constexpr double kMaxGammaS = 0.999;
// The search steps back from the largest feasible eta it finds so that the
// certificate keeps a margin well above round-off.
constexpr double kEtaBackoff = 0.9;
// Spectral gaps at round-off level come from graphs whose W has an exact
// second eigenvalue of modulus one.
constexpr double kMinSpectralGap = 1e-12;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void CheckInputs(const RateInputs& in) {
  if (in.n < 1) throw InvalidArgument("certify: n must be positive");
  if (!(in.mu > 0.0)) throw InfeasibleError("certify: mu must be positive");
  if (in.L < in.mu * (1.0 - 1e-12)) throw InfeasibleError("certify: L must be >= mu");
  if (!(in.s > kMinSpectralGap)) {
    throw InfeasibleError("certify: spectral gap s = " + Fmt(in.s) +
                          " is not positive (graph disconnected or W degenerate)");
  }
  if (!(in.alpha > 0.0) || in.alpha * in.comp.r > 1.0 + 1e-12) {
    throw InfeasibleError("certify: alpha = " + Fmt(in.alpha) + " violates 0 < alpha <= 1/r = " +
                          Fmt(1.0 / in.comp.r));
  }
  if (!(in.comp.delta > 0.0 && in.comp.delta <= 1.0)) {
    throw InfeasibleError("certify: delta must lie in (0, 1]");
  }
}

double EtaCap(const RateInputs& in) {
  return std::min(1.0 / (3.0 * in.mu), in.mu / (2.0 * in.L * in.L));
}

double C1(const RateInputs& in, double eta) {
  const double n = in.n;
  const double em = eta * in.mu;
  return (n - em) * (n - em) / (n * (n - 2.0 * em));
}

}  // namespace

RateInputs MakeRateInputs(const Game& game, const MixingMatrix& mix,
                          const CompressionConstants& comp, double alpha, IwNorm norm) {
  RateInputs in;
  in.n = mix.n();
  in.mu = game.mu();
  in.L = game.L();
  in.s = mix.s;
  const Eigen::MatrixXd iw = Eigen::MatrixXd::Identity(mix.n(), mix.n()) - mix.w;
  if (norm == IwNorm::kFrobenius) {
    in.norm_iw_sq = iw.squaredNorm();
  } else {
    const double sig = Eigen::JacobiSVD<Eigen::MatrixXd>(iw).singularValues()(0);
    in.norm_iw_sq = sig * sig;
  }
  in.comp = comp;
  in.alpha = alpha;
  return in;
}

double MidpointTau3(double alpha_r_delta) {
  if (alpha_r_delta >= 1.0) return 2.0;
  return 0.5 * (1.0 + 1.0 / (1.0 - alpha_r_delta));
}

RateConstants ComputeRateConstants(const RateInputs& in, double gamma, double eta, double tau3) {
  RateConstants c;
  const double ard = in.alpha * in.comp.r * in.comp.delta;
  c.tau3 = tau3;
  c.t_x = 3.0 * tau3 / (tau3 - 1.0);
  c.c_x = tau3 * std::max(0.0, 1.0 - ard);
  c.c1 = C1(in, eta);
  c.c2 = 4.0 / in.s;
  c.c3 = 2.0 * in.comp.C / in.s * in.norm_iw_sq;
  c.c4 = c.t_x * in.norm_iw_sq;
  c.c5 = c.t_x * in.comp.C * in.norm_iw_sq;
  c.rho_tilde = 1.0 - gamma * in.s;
  return c;
}

Eigen::Matrix3d BuildTransitionMatrix(const RateInputs& in, double gamma, double eta,
                                      double tau3) {
  CheckInputs(in);
  const double cap = EtaCap(in);
  if (!(eta > 0.0) || eta > cap * (1.0 + 1e-12)) {
    throw InfeasibleError("transition matrix: eta = " + Fmt(eta) +
                          " violates eta <= min{1/(3 mu), mu/(2 L^2)} = " + Fmt(cap));
  }
  if (!(gamma > 0.0) || gamma * in.s >= 1.0) {
    throw InfeasibleError("transition matrix: gamma = " + Fmt(gamma) +
                          " violates 0 < gamma s < 1 (s = " + Fmt(in.s) + ")");
  }
  const double ard = in.alpha * in.comp.r * in.comp.delta;
  const double tau_hi = ard >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - ard);
  if (!(tau3 > 1.0 && tau3 < tau_hi)) {
    throw InfeasibleError("transition matrix: tau3 = " + Fmt(tau3) + " outside (1, " +
                          Fmt(tau_hi) + ")");
  }
  const RateConstants c = ComputeRateConstants(in, gamma, eta, tau3);
  const double n = in.n;
  const double l2 = in.L * in.L;
  const double e2l2 = eta * eta * l2;
  Eigen::Matrix3d a;
  a(0, 0) = 1.0 - eta * in.mu / n;
  a(0, 1) = eta * l2 * c.c1 / in.mu;
  a(0, 2) = 0.0;
  a(1, 0) = e2l2 * c.c2 / gamma;
  a(1, 1) = 0.5 * (1.0 + c.rho_tilde * c.rho_tilde) + e2l2 * c.c2 / gamma;
  a(1, 2) = c.c3 * gamma;
  a(2, 0) = 2.0 * c.t_x * e2l2;
  a(2, 1) = c.c4 * gamma * gamma + 2.0 * c.t_x * e2l2;
  a(2, 2) = c.c_x + c.c5 * gamma * gamma;
  return a;
}

double SpectralRadius3x3(const Eigen::Matrix3d& a) {
  // Roots are found for B = A - sigma I with sigma the largest diagonal
  // entry. Certified matrices have eigenvalues within 1e-10 of one another
  // near 1, and the shift keeps the cubic's coefficients free of the
  // cancellation that would otherwise cost half the digits.
  const double sigma = a.diagonal().maxCoeff();
  const Eigen::Matrix3d b = a - sigma * Eigen::Matrix3d::Identity();
  // det(lambda I - B) = lambda^3 + p2 lambda^2 + p1 lambda + p0.
  const double p2 = -b.trace();
  const double p1 = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0) + b(0, 0) * b(2, 2) -
                    b(0, 2) * b(2, 0) + b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1);
  const double p0 = -b.determinant();
  auto poly = [&](double x) { return ((x + p2) * x + p1) * x + p0; };
  auto dpoly = [&](double x) { return (3.0 * x + 2.0 * p2) * x + p1; };

  // A real root by bisection on the Cauchy bound, then Newton polish.
  const double bound = 1.0 + std::max({std::abs(p2), std::abs(p1), std::abs(p0)});
  double lo = -bound, hi = bound;
  for (int it = 0; it < 2200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (poly(mid) > 0.0 ? hi : lo) = mid;
  }
  auto polish = [&](double x) {
    for (int it = 0; it < 4; ++it) {
      const double d = dpoly(x);
      if (d == 0.0) break;
      const double next = x - poly(x) / d;
      if (!std::isfinite(next) || std::abs(poly(next)) >= std::abs(poly(x))) break;
      x = next;
    }
    return x;
  };
  const double r1 = polish(0.5 * (lo + hi));

  // Deflate to lambda^2 + qb lambda + qc and solve with the stable formula.
  const double qb = p2 + r1;
  const double qc = p1 + r1 * qb;
  const double disc = qb * qb - 4.0 * qc;
  double radius = std::abs(sigma + r1);
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double big = -0.5 * (qb + std::copysign(sq, qb));
    const double small = big != 0.0 ? qc / big : 0.0;
    radius = std::max({radius, std::abs(sigma + polish(big)), std::abs(sigma + polish(small))});
  } else {
    const double re = sigma - 0.5 * qb;
    const double im = 0.5 * std::sqrt(-disc);
    radius = std::max(radius, std::hypot(re, im));
  }
  return radius;
}

bool ComponentwiseHolds(const Eigen::Matrix3d& a, const Eigen::Vector3d& eps, double theta) {
  const Eigen::Vector3d lhs = a * eps;
  for (int i = 0; i < 3; ++i) {
    if (!(eps[i] > 0.0) || lhs[i] > theta * eps[i]) return false;
  }
  return true;
}

namespace {

struct Candidate {
  bool ok = false;
  Eigen::Matrix3d a;
  Eigen::Vector3d eps;
  double rho = 1.0;
  double theta = 1.0;
};

// For nonnegative A with rho(A) < theta, eps = (theta I - A)^{-1} 1 is
// positive and satisfies A eps = theta eps - 1 < theta eps.
Candidate TryPoint(const RateInputs& in, double gamma, double eta, double tau3) {
  Candidate cand;
  try {
    cand.a = BuildTransitionMatrix(in, gamma, eta, tau3);
  } catch (const InfeasibleError&) {
    return cand;
  }
  cand.theta = 1.0 - eta * in.mu / (in.n + 1.0);
  cand.rho = SpectralRadius3x3(cand.a);
  if (!(cand.rho < cand.theta)) return cand;
  const Eigen::Matrix3d m = cand.theta * Eigen::Matrix3d::Identity() - cand.a;
  Eigen::Vector3d eps = m.fullPivLu().solve(Eigen::Vector3d::Ones());
  if (!(eps.minCoeff() > 0.0)) return cand;
  eps /= eps[2];
  cand.eps = eps;
  cand.ok = ComponentwiseHolds(cand.a, cand.eps, cand.theta);
  return cand;
}

struct ClosedForm {
  double gamma = 0.0;
  double eta = 0.0;
  Eigen::Vector3d eps;
  std::vector<ConditionCheck> conditions;
};

ClosedForm ClosedFormChoice(const RateInputs& in, double tau3) {
  const double n = in.n;
  const double mu = in.mu;
  const double L = in.L;
  const double l2 = L * L;
  const RateConstants c = ComputeRateConstants(in, 0.0, 0.0, tau3);
  const double eta_cap = EtaCap(in);
  // c1 grows with eta, so its value at the cap bounds every admissible eta.
  const double c1_cap = C1(in, eta_cap);
  const double ratio1 = n * (n + 1.0) * l2 * c1_cap / (mu * mu);

  ClosedForm cf;
  const double eps3 = 1.0;
  const double m2 = c.c3 * eps3;
  double eps2;
  if (m2 > 0.0) {
    eps2 = 4.0 * m2 / in.s;
  } else {
    // c3 = 0 leaves eps2 free; take the largest value that keeps gamma = 1.
    const double denom = 2.0 * c.t_x * (1.0 + ratio1) + c.c4;
    const double room = (1.0 - c.c_x - c.c5 - mu / ((n + 1.0) * L)) * eps3;
    eps2 = room > 0.0 ? room / denom : eps3 / denom;
  }
  const double eps1 = ratio1 * eps2;
  const double m1 = l2 * c.c2 * (eps1 + eps2);
  const double m3 =
      c.t_x * (2.0 * eps1 + 2.0 * eps2) + c.c4 * eps2 + c.c5 * eps3 + mu * eps3 / ((n + 1.0) * L);
  cf.gamma = std::min({1.0, (1.0 - c.c_x) * eps3 / m3, kMaxGammaS / in.s});
  cf.eta = std::min({in.s * (n + 1.0) * cf.gamma / (8.0 * mu), mu * eps2 * cf.gamma / (m1 * (n + 1.0)),
                     cf.gamma / L, 1.0 / (3.0 * mu), mu / (2.0 * l2)});
  cf.eps = Eigen::Vector3d(eps1, eps2, eps3);

  auto at_least = [](std::string name, double lhs, double rhs) {
    return ConditionCheck{std::move(name), lhs, rhs, lhs - rhs, lhs >= rhs};
  };
  auto at_most = [](std::string name, double lhs, double rhs) {
    return ConditionCheck{std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs};
  };
  const double eps1_min = n * (n + 1.0) * l2 * C1(in, cf.eta) * eps2 / (mu * mu);
  cf.conditions = {
      at_least("eps1 >= n(n+1) L^2 c1 eps2 / mu^2", eps1, eps1_min),
      at_least("eps2 >= 4 m2 / s", eps2, 4.0 * m2 / in.s),
      at_most("gamma <= min{1, (1 - c_x) eps3 / m3}", cf.gamma,
              std::min(1.0, (1.0 - c.c_x) * eps3 / m3)),
      at_most("eta <= s (n+1) gamma / (8 mu)", cf.eta, in.s * (n + 1.0) * cf.gamma / (8.0 * mu)),
      at_most("eta <= mu eps2 gamma / (m1 (n+1))", cf.eta, mu * eps2 * cf.gamma / (m1 * (n + 1.0))),
      at_most("eta <= gamma / L", cf.eta, cf.gamma / L),
      at_most("eta <= min{1/(3 mu), mu/(2 L^2)}", cf.eta, eta_cap),
      at_most("gamma s < 1", cf.gamma * in.s, 1.0),
  };
  return cf;
}

}  // namespace

RateCertificate Certify(const RateInputs& in, const CertifyOptions& options) {
  CheckInputs(in);
  const double ard = in.alpha * in.comp.r * in.comp.delta;
  const double tau3 = MidpointTau3(ard);

  RateCertificate cert;
  cert.inputs = in;
  const ClosedForm cf = ClosedFormChoice(in, tau3);
  cert.closed_form_gamma = cf.gamma;
  cert.closed_form_eta = cf.eta;
  cert.closed_form_eps = cf.eps;
  cert.closed_form_conditions = cf.conditions;

  cert.gamma = cf.gamma;
  cert.eta = cf.eta;
  cert.eps = cf.eps;
  cert.strategy = "closed-form";
  cert.a = BuildTransitionMatrix(in, cf.gamma, cf.eta, tau3);

  double cert_tau3 = tau3;
  if (options.strategy == CertifyStrategy::kSearch) {
    const double eta_cap = EtaCap(in);
    const double gamma_max = std::min(1.0, kMaxGammaS / in.s);
    const int grid = std::max(2, options.gamma_grid);
    const double g_lo = std::min(cf.gamma, gamma_max);

    // tau3 candidates: the midpoint plus interior points of (1, 1/(1 - ard)).
    // With ard = 1 the interval is unbounded and c_x vanishes, so larger
    // tau3 only shrinks t_x.
    std::vector<double> taus = {tau3};
    for (int ti = 1; ti <= options.tau3_grid; ++ti) {
      const double u = static_cast<double>(ti) / (options.tau3_grid + 1);
      taus.push_back(ard >= 1.0 ? std::pow(1000.0, u) + 1.0 : 1.0 + u * ard / (1.0 - ard));
    }

    for (double tau : taus) {
      for (int gi = 0; gi < grid; ++gi) {
        const double t = static_cast<double>(gi) / (grid - 1);
        const double gamma = g_lo * std::pow(gamma_max / g_lo, t);
        double lo = std::min(cf.eta, eta_cap) * 1e-3;
        double hi = eta_cap;
        Candidate best = TryPoint(in, gamma, hi, tau);
        double best_eta = hi;
        if (!best.ok) {
          best = TryPoint(in, gamma, lo, tau);
          if (!best.ok) continue;
          best_eta = lo;
          for (int it = 0; it < options.bisection_steps; ++it) {
            const double mid = std::sqrt(lo * hi);
            Candidate c = TryPoint(in, gamma, mid, tau);
            if (c.ok) {
              lo = mid;
              best = c;
              best_eta = mid;
            } else {
              hi = mid;
            }
          }
          const Candidate backed = TryPoint(in, gamma, kEtaBackoff * best_eta, tau);
          if (backed.ok) {
            best = backed;
            best_eta = kEtaBackoff * best_eta;
          }
        }
        if (best_eta > cert.eta || (best_eta == cert.eta && gamma > cert.gamma)) {
          cert.gamma = gamma;
          cert.eta = best_eta;
          cert.a = best.a;
          cert.eps = best.eps;
          cert_tau3 = tau;
          cert.strategy = "search";
        }
      }
    }
  }

  cert.constants = ComputeRateConstants(in, cert.gamma, cert.eta, cert_tau3);
  cert.rho_bound = 1.0 - cert.eta * in.mu / (in.n + 1.0);
  cert.rho_numeric = SpectralRadius3x3(cert.a);
  cert.row_margin = cert.rho_bound * cert.eps - cert.a * cert.eps;
  for (int i = 0; i < 3; ++i) {
    if (!(cert.eps[i] > 0.0) || cert.row_margin[i] < 0.0) {
      std::ostringstream msg;
      msg << "certify: componentwise test fails in row " << (i + 1) << " ([A eps]_" << (i + 1)
          << " = " << (cert.a * cert.eps)[i] << " > " << cert.rho_bound << " * eps_" << (i + 1)
          << " = " << cert.rho_bound * cert.eps[i] << ")";
      throw InfeasibleError(msg.str());
    }
  }
  return cert;
}

void WriteReport(std::ostream& os, const RateCertificate& cert) {
  const auto old = os.precision(10);
  const RateInputs& in = cert.inputs;
  const RateConstants& c = cert.constants;
  os << "# rate certificate\n";
  os << "status: certified\n";
  os << "strategy: " << cert.strategy << "\n\n";
  os << "[inputs]\n";
  os << "n = " << in.n << "\nmu = " << in.mu << "\nL = " << in.L << "\ns = " << in.s
     << "\nnorm_I_minus_W_sq = " << in.norm_iw_sq << "\nC = " << in.comp.C
     << "\nr = " << in.comp.r << "\ndelta = " << in.comp.delta
     << "\nunbiased_conversion = " << (in.comp.unbiased_conversion ? "true" : "false")
     << "\nalpha = " << in.alpha << "\n\n";
  os << "[constants]\n";
  os << "tau3 = " << c.tau3 << "\nt_x = " << c.t_x << "\nc_x = " << c.c_x << "\nc1 = " << c.c1
     << "\nc2 = " << c.c2 << "\nc3 = " << c.c3 << "\nc4 = " << c.c4 << "\nc5 = " << c.c5
     << "\nrho_tilde = " << c.rho_tilde << "\n\n";
  os << "[certificate]\n";
  os << "gamma = " << cert.gamma << "\neta = " << cert.eta << "\neps = " << cert.eps[0] << ", "
     << cert.eps[1] << ", " << cert.eps[2] << "\nrho_bound = " << cert.rho_bound
     << "\nrho_numeric = " << cert.rho_numeric << "\n";
  for (int i = 0; i < 3; ++i) {
    os << "A[" << (i + 1) << "] = " << cert.a(i, 0) << ", " << cert.a(i, 1) << ", "
       << cert.a(i, 2) << "\n";
  }
  for (int i = 0; i < 3; ++i) {
    os << "row_margin[" << (i + 1) << "] = " << cert.row_margin[i] << "\n";
  }
  os << "\n[closed_form]\n";
  os << "gamma = " << cert.closed_form_gamma << "\neta = " << cert.closed_form_eta
     << "\neps = " << cert.closed_form_eps[0] << ", " << cert.closed_form_eps[1] << ", "
     << cert.closed_form_eps[2] << "\n";
  for (const ConditionCheck& chk : cert.closed_form_conditions) {
    os << (chk.ok ? "ok   " : "FAIL ") << chk.name << " : " << chk.lhs << " vs " << chk.rhs
       << " (margin " << chk.margin << ")\n";
  }
  os.precision(old);
}

}  // namespace cdnes
