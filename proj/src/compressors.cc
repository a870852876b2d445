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

#include "cdnes/compressors.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "cdnes/errors.h"

namespace cdnes {

CompressorSpec CompressorSpec::Identity(int d) {
  CompressorSpec s;
  s.kind = CompressorKind::kIdentity;
  s.dim = d;
  return s;
}

CompressorSpec CompressorSpec::Quantize(int d, int bits, NormIndex q) {
  CompressorSpec s;
  s.kind = CompressorKind::kQuantize;
  s.dim = d;
  s.bits = bits;
  s.q = q;
  return s;
}

CompressorSpec CompressorSpec::TopK(int d, int k) {
  CompressorSpec s;
  s.kind = CompressorKind::kTopK;
  s.dim = d;
  s.k = k;
  return s;
}

CompressorSpec CompressorSpec::NormSign(int d, NormIndex q) {
  CompressorSpec s;
  s.kind = CompressorKind::kNormSign;
  s.dim = d;
  s.q = q;
  return s;
}

void CompressorSpec::Validate() const {
  if (dim < 1) throw InvalidArgument("compressor: dimension must be positive");
  if (kind == CompressorKind::kQuantize && (bits < 1 || bits > 30)) {
    throw InvalidArgument("compressor: bits must lie in [1, 30], got " + std::to_string(bits));
  }
  if (kind == CompressorKind::kTopK && (k < 1 || k > dim)) {
    throw InvalidArgument("compressor: top-k needs 1 <= k <= d, got k=" + std::to_string(k) +
                          ", d=" + std::to_string(dim));
  }
}

std::string CompressorSpec::Name() const {
  const char* qn = q == NormIndex::kInf ? "inf" : "2";
  switch (kind) {
    case CompressorKind::kIdentity:
      return "identity";
    case CompressorKind::kQuantize:
      return "quantize_b" + std::to_string(bits) + "_q" + qn;
    case CompressorKind::kTopK:
      return "top" + std::to_string(k);
    case CompressorKind::kNormSign:
      return std::string("normsign_q") + qn;
  }
  return "unknown";
}

CompressionConstants Constants(const CompressorSpec& spec) {
  spec.Validate();
  const double d = spec.dim;
  CompressionConstants c;
  switch (spec.kind) {
    case CompressorKind::kIdentity:
      break;
    case CompressorKind::kQuantize: {
      // Per-entry variance is at most (||x||_q / 2^(b-1))^2 / 4 and
      // ||x||_q <= ||x||_2 for q >= 2, so d / 4^b bounds both norms.
      c.C = d / std::pow(4.0, spec.bits);
      if (c.C < 1.0) {
        constexpr double kEps = 1e-6;
        c.r = 1.0;
        c.delta = 1.0 - std::min(c.C, 1.0 - kEps);
      } else {
        c.r = 1.0 + c.C;
        c.delta = 1.0 / (1.0 + c.C);
        c.unbiased_conversion = true;
      }
      break;
    }
    case CompressorKind::kTopK:
      c.C = 1.0 - spec.k / d;
      c.r = 1.0;
      c.delta = spec.k / d;
      break;
    case CompressorKind::kNormSign:
      c.C = d - 1.0;
      c.r = d;
      c.delta = 1.0 / d;
      break;
  }
  return c;
}

int64_t BitCost(const CompressorSpec& spec) {
  spec.Validate();
  const int64_t d = spec.dim;
  switch (spec.kind) {
    case CompressorKind::kIdentity:
      return 32 * d;
    case CompressorKind::kQuantize:
      return 32 + d * (1 + spec.bits);
    case CompressorKind::kTopK: {
      const int64_t index_bits = std::bit_width(static_cast<uint64_t>(d - 1));
      return spec.k * (32 + index_bits);
    }
    case CompressorKind::kNormSign:
      return 32 + d;
  }
  return 0;
}

double VectorNorm(std::span<const double> x, NormIndex q) {
  if (q == NormIndex::kInf) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

double Sign(double v) { return (v > 0.0) - (v < 0.0); }

void QuantizeInto(std::span<const double> x, int bits, NormIndex q, Stream* rng,
                  std::span<const double> dither, std::span<double> out) {
  const double norm = VectorNorm(x, q);
  if (norm == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double levels = std::ldexp(1.0, bits - 1);
  const double scale = norm / levels;
  for (size_t i = 0; i < x.size(); ++i) {
    const double u = rng ? rng->Uniform() : dither[i];
    out[i] = scale * Sign(x[i]) * std::floor(levels * std::abs(x[i]) / norm + u);
  }
}

void TopKInto(std::span<const double> x, int k, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (k == 1) {
    size_t best = 0;
    for (size_t i = 1; i < x.size(); ++i) {
      if (std::abs(x[i]) > std::abs(x[best])) best = i;
    }
    out[best] = x[best];
    return;
  }
  std::vector<size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  // Larger magnitude first; ties go to the lower index.
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](size_t a, size_t b) {
    const double fa = std::abs(x[a]), fb = std::abs(x[b]);
    return fa > fb || (fa == fb && a < b);
  });
  for (int i = 0; i < k; ++i) out[idx[i]] = x[idx[i]];
}

}  // namespace

void CompressInto(const CompressorSpec& spec, std::span<const double> x, Stream& rng,
                  std::span<double> out) {
  if (static_cast<int>(x.size()) != spec.dim || out.size() != x.size()) {
    throw InvalidArgument("compress: expected dimension " + std::to_string(spec.dim) + ", got " +
                          std::to_string(x.size()));
  }
  switch (spec.kind) {
    case CompressorKind::kIdentity:
      std::copy(x.begin(), x.end(), out.begin());
      return;
    case CompressorKind::kQuantize:
      QuantizeInto(x, spec.bits, spec.q, &rng, {}, out);
      return;
    case CompressorKind::kTopK:
      TopKInto(x, spec.k, out);
      return;
    case CompressorKind::kNormSign: {
      const double norm = VectorNorm(x, spec.q);
      for (size_t i = 0; i < x.size(); ++i) out[i] = norm * Sign(x[i]);
      return;
    }
  }
}

CompressedMessage Compress(const CompressorSpec& spec, std::span<const double> x, Stream& rng) {
  spec.Validate();
  CompressedMessage msg;
  msg.payload.resize(spec.dim);
  CompressInto(spec, x, rng, {msg.payload.data(), static_cast<size_t>(msg.payload.size())});
  msg.bit_cost = BitCost(spec);
  return msg;
}

Eigen::VectorXd QuantizeWithDither(std::span<const double> x, int bits, NormIndex q,
                                   std::span<const double> u) {
  if (u.size() != x.size()) throw InvalidArgument("quantize: dither size mismatch");
  if (bits < 1 || bits > 30) throw InvalidArgument("quantize: bits must lie in [1, 30]");
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  QuantizeInto(x, bits, q, nullptr, u, {out.data(), x.size()});
  return out;
}

namespace {

Eigen::VectorXd SampleTestVector(int d, int trial, Stream& rng) {
  Eigen::VectorXd x(d);
  const double scale = std::exp(rng.Uniform(-3.0, 3.0));
  switch (trial % 4) {
    case 0:  // dense Gaussian
      for (int i = 0; i < d; ++i) x[i] = rng.Normal();
      break;
    case 1: {  // a few large entries on a small background
      for (int i = 0; i < d; ++i) x[i] = 1e-3 * rng.Normal();
      const int spikes = 1 + static_cast<int>(rng.Below(std::max(1, d / 4)));
      for (int s = 0; s < spikes; ++s) x[static_cast<int>(rng.Below(d))] = rng.Normal();
      break;
    }
    case 2:  // equal magnitudes, random signs
      for (int i = 0; i < d; ++i) x[i] = rng.Uniform() < 0.5 ? -1.0 : 1.0;
      break;
    default:  // uniform box
      for (int i = 0; i < d; ++i) x[i] = rng.Uniform(-1.0, 1.0);
      break;
  }
  if (x.squaredNorm() == 0.0) x[0] = 1.0;
  return scale * x;
}

}  // namespace

CompressionCheck VerifyCompressionConstants(const CompressorSpec& spec, int trials, Stream& rng,
                                    int mc_samples) {
  spec.Validate();
  if (trials < 1) throw InvalidArgument("verify: trials must be >= 1");
  CompressionCheck rep;
  rep.trials = trials;
  rep.constants = Constants(spec);
  const double r = rep.constants.r;
  const int d = spec.dim;
  const int draws = spec.deterministic() ? 1 : std::max(1, mc_samples);
  Eigen::VectorXd out(d);
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = SampleTestVector(d, t, rng);
    const double xx = x.squaredNorm();
    double err = 0.0, err_r = 0.0;
    for (int m = 0; m < draws; ++m) {
      CompressInto(spec, {x.data(), static_cast<size_t>(d)}, rng,
                   {out.data(), static_cast<size_t>(d)});
      err += (out - x).squaredNorm();
      err_r += (out / r - x).squaredNorm();
    }
    rep.max_ratio_C = std::max(rep.max_ratio_C, err / draws / xx);
    rep.max_ratio_delta = std::max(rep.max_ratio_delta, err_r / draws / xx);
  }
  return rep;
}

}  // namespace cdnes
