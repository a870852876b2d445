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
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "cdnes/compressors.h"
#include "cdnes/errors.h"
#include "cdnes/rng.h"

using namespace cdnes;

namespace {

Eigen::VectorXd Apply(const CompressorSpec& spec, const Eigen::VectorXd& x, Stream& rng) {
  return Compress(spec, {x.data(), static_cast<size_t>(x.size())}, rng).payload;
}

Eigen::VectorXd RandomVector(int d, Stream& rng) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.Normal();
  return x;
}

}  // namespace

TEST_CASE("compression constants") {
  SUBCASE("identity") {
    const auto c = Constants(CompressorSpec::Identity(10));
    CHECK(c.C == 0.0);
    CHECK(c.r == 1.0);
    CHECK(c.delta == 1.0);
  }
  SUBCASE("quantizer with C < 1") {
    const auto c = Constants(CompressorSpec::Quantize(5, 2));
    CHECK(c.C == doctest::Approx(5.0 / 16.0));
    CHECK(c.r == 1.0);
    CHECK(c.delta == doctest::Approx(11.0 / 16.0));
    CHECK_FALSE(c.unbiased_conversion);
  }
  SUBCASE("quantizer with C >= 1 uses the unbiased conversion") {
    const auto c = Constants(CompressorSpec::Quantize(100, 2));
    CHECK(c.C == doctest::Approx(6.25));
    CHECK(c.r == doctest::Approx(7.25));
    CHECK(c.delta == doctest::Approx(1.0 / 7.25));
    CHECK(c.unbiased_conversion);
  }
  SUBCASE("top-k") {
    const auto c = Constants(CompressorSpec::TopK(100, 5));
    CHECK(c.C == doctest::Approx(0.95));
    CHECK(c.r == 1.0);
    CHECK(c.delta == doctest::Approx(0.05));
  }
  SUBCASE("norm-sign") {
    const auto c = Constants(CompressorSpec::NormSign(10));
    CHECK(c.C == 9.0);
    CHECK(c.r == 10.0);
    CHECK(c.delta == doctest::Approx(0.1));
  }
}

TEST_CASE("bit costs for d = 100") {
  CHECK(BitCost(CompressorSpec::TopK(100, 1)) == 39);
  CHECK(BitCost(CompressorSpec::NormSign(100)) == 132);
  CHECK(BitCost(CompressorSpec::Quantize(100, 2)) == 332);
  CHECK(BitCost(CompressorSpec::Identity(100)) == 3200);
  CHECK(BitCost(CompressorSpec::TopK(100, 3)) == 3 * 39);
  CHECK(BitCost(CompressorSpec::TopK(128, 1)) == 32 + 7);
  CHECK(BitCost(CompressorSpec::TopK(129, 1)) == 32 + 8);
  CHECK(BitCost(CompressorSpec::TopK(1, 1)) == 32);
}

TEST_CASE("spec validation and names") {
  CHECK_THROWS_AS(CompressorSpec::TopK(5, 6).Validate(), InvalidArgument);
  CHECK_THROWS_AS(CompressorSpec::TopK(5, 0).Validate(), InvalidArgument);
  CHECK_THROWS_AS(CompressorSpec::Quantize(5, 0).Validate(), InvalidArgument);
  CHECK_THROWS_AS(CompressorSpec::Identity(0).Validate(), InvalidArgument);
  CHECK(CompressorSpec::Quantize(100, 2).Name() == "quantize_b2_qinf");
  CHECK(CompressorSpec::Quantize(100, 3, NormIndex::kTwo).Name() == "quantize_b3_q2");
  CHECK(CompressorSpec::TopK(100, 1).Name() == "top1");
  CHECK(CompressorSpec::NormSign(100).Name() == "normsign_qinf");
  CHECK(CompressorSpec::Identity(3).Name() == "identity");
}

TEST_CASE("quantizer by hand") {
  const std::vector<double> x = {0.5, -0.25, 1.0};
  // ||x||_inf = 1, 2^(b-1) = 2, levels floor(2|x| + u).
  {
    const std::vector<double> u = {0.0, 0.0, 0.0};
    const Eigen::VectorXd y = QuantizeWithDither(x, 2, NormIndex::kInf, u);
    CHECK(y[0] == 0.5);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == 1.0);
  }
  {
    const std::vector<double> u = {0.5, 0.5, 0.5};
    const Eigen::VectorXd y = QuantizeWithDither(x, 2, NormIndex::kInf, u);
    CHECK(y[0] == 0.5);
    CHECK(y[1] == -0.5);
    CHECK(y[2] == 1.0);
  }
  {
    // Two-norm scale: ||x||_2 = sqrt(1.3125).
    const std::vector<double> u = {0.5, 0.5, 0.5};
    const Eigen::VectorXd y = QuantizeWithDither(x, 2, NormIndex::kTwo, u);
    const double nrm = std::sqrt(1.3125);
    CHECK(y[0] == doctest::Approx(nrm / 2 * std::floor(2 * 0.5 / nrm + 0.5)));
    CHECK(y[1] == doctest::Approx(-nrm / 2 * std::floor(2 * 0.25 / nrm + 0.5)));
    CHECK(y[2] == doctest::Approx(nrm / 2 * std::floor(2 * 1.0 / nrm + 0.5)));
  }
}

TEST_CASE("top-k keeps the largest magnitudes, ties to the lower index") {
  Stream rng(1);
  Eigen::VectorXd x(5);
  x << 0.1, -3.0, 2.0, 3.0, -0.5;
  const Eigen::VectorXd y1 = Apply(CompressorSpec::TopK(5, 1), x, rng);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1[1] = -3.0;
  CHECK(y1 == e1);
  const Eigen::VectorXd y2 = Apply(CompressorSpec::TopK(5, 2), x, rng);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(5);
  e2[1] = -3.0;
  e2[3] = 3.0;
  CHECK(y2 == e2);
  const Eigen::VectorXd y3 = Apply(CompressorSpec::TopK(5, 3), x, rng);
  CHECK(y3[2] == 2.0);
  CHECK(y3[0] == 0.0);
  Eigen::VectorXd ties = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd yt = Apply(CompressorSpec::TopK(4, 2), ties, rng);
  CHECK(yt == Eigen::Vector4d(1, 1, 0, 0));
}

TEST_CASE("norm-sign by hand") {
  Stream rng(1);
  Eigen::VectorXd x(2);
  x << 3.0, -4.0;
  CHECK(Apply(CompressorSpec::NormSign(2, NormIndex::kTwo), x, rng) == Eigen::Vector2d(5, -5));
  CHECK(Apply(CompressorSpec::NormSign(2, NormIndex::kInf), x, rng) == Eigen::Vector2d(4, -4));
}

TEST_CASE("zero input gives a zero payload for every kind") {
  Stream rng(3);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
  for (const CompressorSpec& spec :
       {CompressorSpec::Identity(6), CompressorSpec::Quantize(6, 2), CompressorSpec::TopK(6, 2),
        CompressorSpec::NormSign(6)}) {
    const CompressedMessage m = Compress(spec, {z.data(), 6}, rng);
    CHECK(m.payload.isZero(0.0));
    CHECK(m.bit_cost == BitCost(spec));
  }
}

TEST_CASE("deterministic kinds leave the stream untouched") {
  Stream rng(3);
  const uint64_t before = rng.state();
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  Apply(CompressorSpec::TopK(4, 1), x, rng);
  Apply(CompressorSpec::NormSign(4), x, rng);
  Apply(CompressorSpec::Identity(4), x, rng);
  CHECK(rng.state() == before);
  Apply(CompressorSpec::Quantize(4, 2), x, rng);
  CHECK(rng.state() != before);
}

TEST_CASE("quantizer is unbiased (sampled)") {
  Stream rng(17);
  const int d = 8, draws = 20000;
  const Eigen::VectorXd x = RandomVector(d, rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < draws; ++t) {
    const Eigen::VectorXd y = Apply(CompressorSpec::Quantize(d, 2), x, rng);
    sum += y;
    sq += y.cwiseProduct(y);
  }
  const Eigen::VectorXd mean = sum / draws;
  for (int i = 0; i < d; ++i) {
    const double var = sq[i] / draws - mean[i] * mean[i];
    const double se = std::sqrt(std::max(var, 0.0) / draws);
    CHECK(std::abs(mean[i] - x[i]) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("deterministic error bounds hold exactly") {
  Stream rng(23);
  for (int d : {2, 10, 100}) {
    const CompressorSpec top = CompressorSpec::TopK(d, std::max(1, d / 5));
    const CompressorSpec ns = CompressorSpec::NormSign(d);
    const auto ct = Constants(top);
    const auto cn = Constants(ns);
    for (int t = 0; t < 500; ++t) {
      const Eigen::VectorXd x = RandomVector(d, rng) * std::exp(rng.Uniform(-5, 5));
      const double nx = x.squaredNorm();
      const Eigen::VectorXd yt = Apply(top, x, rng);
      CHECK((yt - x).squaredNorm() <= ct.C * nx * (1 + 1e-12));
      const Eigen::VectorXd yn = Apply(ns, x, rng);
      CHECK((yn - x).squaredNorm() <= cn.C * nx * (1 + 1e-12));
      CHECK((yn / cn.r - x).squaredNorm() <= (1 - cn.delta) * nx * (1 + 1e-12));
    }
  }
}

TEST_CASE("general-class constants verified by sampling") {
  Stream rng(29);
  for (const CompressorSpec& spec :
       {CompressorSpec::Identity(10), CompressorSpec::TopK(10, 3), CompressorSpec::NormSign(10),
        CompressorSpec::NormSign(10, NormIndex::kTwo)}) {
    const CompressionCheck rep = VerifyCompressionConstants(spec, 200, rng);
    CHECK(rep.Holds());
  }
  for (const CompressorSpec& spec :
       {CompressorSpec::Quantize(10, 2), CompressorSpec::Quantize(10, 1),
        CompressorSpec::Quantize(100, 2), CompressorSpec::Quantize(10, 2, NormIndex::kTwo)}) {
    const CompressionCheck rep = VerifyCompressionConstants(spec, 40, rng, 2000);
    CHECK(rep.Holds(0.05));
  }
}
