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

#ifndef CDNES_RNG_H_
#define CDNES_RNG_H_

#include <cstdint>

namespace cdnes {

// SplitMix64 stream. Output is fully specified by the 64-bit state, so traces
// are reproducible across compilers and standard libraries.
class Stream {
 public:
  explicit Stream(uint64_t state) : state_(state) {}

  inline uint64_t NextU64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Standard normal (Box-Muller, one value per call).
  double Normal();
  // Uniform integer on [0, bound).
  uint64_t Below(uint64_t bound);

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

inline uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t Stream::NextU64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return Mix64(state_);
}

// Counter-based split: the stream for (agent, iteration) depends only on the
// master seed and the pair, never on how many draws other streams consumed.
inline Stream Substream(uint64_t master_seed, uint64_t agent, uint64_t iteration) {
  uint64_t h = Mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  h = Mix64(h ^ (agent + 0x9e3779b97f4a7c15ULL));
  h = Mix64(h ^ (iteration + 0xbb67ae8584caa73bULL));
  return Stream(h);
}

// Tag used in place of an iteration counter for non-iteration draws.
inline constexpr uint64_t kInitStreamTag = ~uint64_t{0};

}  // namespace cdnes

#endif  // CDNES_RNG_H_
