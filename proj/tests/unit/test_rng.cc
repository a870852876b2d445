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

#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "cdnes/rng.h"

using cdnes::Stream;
using cdnes::Substream;

TEST_CASE("splitmix64 reference outputs") {
  // Published SplitMix64 sequence for state 0.
  Stream s(0);
  CHECK(s.NextU64() == 0xe220a8397b1dcdafULL);
  CHECK(s.NextU64() == 0x6e789e6aa1b965f4ULL);
  CHECK(s.NextU64() == 0x06c45d188009454fULL);
}

TEST_CASE("substreams are reproducible and distinct") {
  Stream a = Substream(42, 3, 17);
  Stream b = Substream(42, 3, 17);
  for (int i = 0; i < 16; ++i) CHECK(a.NextU64() == b.NextU64());

  std::set<uint64_t> firsts;
  for (uint64_t agent = 0; agent < 20; ++agent) {
    for (uint64_t it = 0; it < 20; ++it) firsts.insert(Substream(42, agent, it).NextU64());
  }
  CHECK(firsts.size() == 400);
  CHECK(Substream(1, 0, 0).NextU64() != Substream(2, 0, 0).NextU64());
  CHECK(Substream(1, 0, 1).NextU64() != Substream(1, 1, 0).NextU64());
}

TEST_CASE("uniform draws lie in [0, 1) with mean 1/2") {
  Stream s(7);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Standard error of the mean is sqrt(1/12 / n).
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal draws have unit variance") {
  Stream s(11);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.Normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  // Var(z^2) = 2 for a standard normal.
  CHECK(std::abs(sq / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("bounded integers cover the range evenly") {
  Stream s(5);
  const int bound = 7, n = 70000;
  std::vector<int> counts(bound, 0);
  for (int i = 0; i < n; ++i) {
    const uint64_t v = s.Below(bound);
    REQUIRE(v < static_cast<uint64_t>(bound));
    ++counts[v];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bound;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 22.46);
}
