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

#ifndef CDNES_COMPRESSORS_H_
#define CDNES_COMPRESSORS_H_

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "cdnes/rng.h"

namespace cdnes {

enum class CompressorKind { kIdentity, kQuantize, kTopK, kNormSign };

// Norm used to scale quantization and norm-sign messages.
enum class NormIndex { kTwo, kInf };

struct CompressorSpec {
  CompressorKind kind = CompressorKind::kIdentity;
  int dim = 1;                   // message dimension d
  int bits = 2;                  // quantize only
  int k = 1;                     // top-k only
  NormIndex q = NormIndex::kInf;  // quantize and norm-sign

  static CompressorSpec Identity(int d);
  static CompressorSpec Quantize(int d, int bits, NormIndex q = NormIndex::kInf);
  static CompressorSpec TopK(int d, int k);
  static CompressorSpec NormSign(int d, NormIndex q = NormIndex::kInf);

  // Throws InvalidArgument for d < 1, bits outside [1, 30], k outside [1, d].
  void Validate() const;
  bool deterministic() const { return kind != CompressorKind::kQuantize; }
  std::string Name() const;
};

// Constants of the general compressor class:
//   E||C(x) - x||^2     <= C ||x||^2
//   E||C(x)/r - x||^2   <= (1 - delta) ||x||^2
struct CompressionConstants {
  double C = 0.0;
  double r = 1.0;
  double delta = 1.0;
  // Set when (r, delta) come from the unbiased-to-contractive conversion
  // r = 1 + C, delta = 1 / (1 + C) because C >= 1.
  bool unbiased_conversion = false;
};

CompressionConstants Constants(const CompressorSpec& spec);

// Bits per transmitted message, 32-bit floats for norms and values:
//   identity    32 d
//   quantize    32 + d (1 + b)       norm, then sign and level per entry
//   top-k       k (32 + ceil(log2 d)) value and index per kept entry
//   norm-sign   32 + d               norm, then one sign bit per entry
int64_t BitCost(const CompressorSpec& spec);

struct CompressedMessage {
  Eigen::VectorXd payload;
  int64_t bit_cost = 0;
};

// Applies the operator. Only the quantizer draws from `rng` (d uniforms per
// call); the other kinds leave it untouched. A zero input yields a zero
// payload for every kind.
CompressedMessage Compress(const CompressorSpec& spec, std::span<const double> x, Stream& rng);

// Allocation-free form used by the engine. `out` must have size d and may
// not alias `x`.
void CompressInto(const CompressorSpec& spec, std::span<const double> x, Stream& rng,
                  std::span<double> out);

// Quantizer with an explicit dither vector u in [0, 1)^d.
Eigen::VectorXd QuantizeWithDither(std::span<const double> x, int bits, NormIndex q,
                                   std::span<const double> u);

double VectorNorm(std::span<const double> x, NormIndex q);

struct CompressionCheck {
  int trials = 0;
  double max_ratio_C = 0.0;      // max ||C(x)-x||^2 / ||x||^2
  double max_ratio_delta = 0.0;  // max ||C(x)/r-x||^2 / ||x||^2
  CompressionConstants constants;

  bool Holds(double slack = 0.0) const {
    return max_ratio_C <= constants.C * (1.0 + slack) + 1e-12 &&
           max_ratio_delta <= (1.0 - constants.delta) * (1.0 + slack) + 1e-12;
  }
};

// Samples `trials` random nonzero vectors (dense Gaussian, sparse, and
// constant-magnitude shapes). Deterministic kinds are evaluated exactly;
// for the quantizer each expectation is a Monte Carlo mean over
// `mc_samples` compressions.
CompressionCheck VerifyCompressionConstants(const CompressorSpec& spec, int trials, Stream& rng,
                                    int mc_samples = 2000);

}  // namespace cdnes

#endif  // CDNES_COMPRESSORS_H_
