/*
 * Copyright 2026 The cryptarank Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cryptarank/encoding.hpp"

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "cryptarank/paillier.hpp"

using namespace cryptarank;
using namespace cryptarank::encoding;

namespace {

// Large enough that c = 6 has ample headroom in every test here.
const mpz_class kModulus("1000000000000000000000000000000000");

FixedPointCodec codec10_6() { return FixedPointCodec::create(10, 6, kModulus); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace

TEST_CASE("codec construction validates its fields") {
  CHECK_THROWS_AS(FixedPointCodec::create(3, 6, kModulus),
                  std::invalid_argument);
  CHECK_THROWS_AS(FixedPointCodec::create(10, -1, kModulus),
                  std::invalid_argument);
  CHECK_THROWS_AS(FixedPointCodec::create(10, 6, mpz_class(0)),
                  std::invalid_argument);
  const auto c2 = FixedPointCodec::create(2, 10, kModulus);
  CHECK(c2.scale == 1024);
}

TEST_CASE("headroom guard reserves a product plus a column sum") {
  // scale^2 * dim * 2 must stay below the modulus
  const auto c = FixedPointCodec::create(10, 2, mpz_class(2000001));
  CHECK_NOTHROW(c.require_headroom(100));            // 2*10^4*100 = 2*10^6 < 2000001
  CHECK_THROWS_AS(c.require_headroom(101), OverflowError);
  CHECK_THROWS_AS(c.require_headroom(0), std::invalid_argument);
}

TEST_CASE("encode pins: powers of the base and a rounded third") {
  const auto c2 = FixedPointCodec::create(2, 10, kModulus);
  CHECK(encode(c2, 0.5) == 512);

  const auto c10 = codec10_6();
  CHECK(encode(c10, 0.0) == 0);
  CHECK(encode(c10, 1.0 / 3.0) == 333333);  // round(1e6 / 3)
}

TEST_CASE("decode pins: zero and the negative unit") {
  const auto c = codec10_6();
  CHECK(decode(c, 0) == 0.0);
  CHECK(decode(c, kModulus - c.scale) == -1.0);
  CHECK_THROWS_AS(decode(c, kModulus), std::invalid_argument);
  CHECK_THROWS_AS(decode(c, mpz_class(-1)), std::invalid_argument);
}

TEST_CASE("rounding is half away from zero") {
  const auto c = FixedPointCodec::create(10, 1, kModulus);
  CHECK(encode(c, 0.25) == 3);   // 2.5 -> 3
  CHECK(encode(c, -0.25) == kModulus - 3);
  CHECK(encode(c, 0.24) == 2);
  CHECK(encode(c, -0.24) == kModulus - 2);
}

TEST_CASE("round-trip error is bounded by half a quantization step") {
  const auto c = codec10_6();
  const double step = 1e-6;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(rng, -1.0, 1.0);
    const double back = decode(c, encode(c, x));
    CHECK(std::fabs(back - x) <= step / 2 + 1e-15);
  }
}

TEST_CASE("encode agrees with an independent long-double oracle") {
  const auto c = codec10_6();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(rng, -1.0, 1.0);
    const long oracle =
        static_cast<long>(llroundl(static_cast<long double>(x) * 1000000.0L));
    const mpz_class got = encode(c, x);
    const mpz_class expected =
        oracle >= 0 ? mpz_class(oracle) : mpz_class(kModulus + oracle);
    CHECK(got == expected);
  }
}

TEST_CASE("signed interpretation is monotone") {
  const auto c = codec10_6();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    double x = uniform(rng, -1.0, 1.0);
    double y = uniform(rng, -1.0, 1.0);
    if (x > y) std::swap(x, y);
    CHECK(decode(c, encode(c, x)) <= decode(c, encode(c, y)));
  }
}

TEST_CASE("magnitude overflow is refused") {
  const auto c = FixedPointCodec::create(10, 2, mpz_class(1000));
  // |x| * 100 must stay below 500
  CHECK_NOTHROW(encode(c, 4.9));
  CHECK_THROWS_AS(encode(c, 5.0), OverflowError);
  CHECK_THROWS_AS(encode(c, -5.0), OverflowError);
  CHECK_THROWS_AS(encode(c, std::nan("")), std::invalid_argument);

  // rounding may not cross the sign boundary either
  const auto tight = FixedPointCodec::create(10, 0, mpz_class(10));
  CHECK_THROWS_AS(encode(tight, 4.7), OverflowError);  // rounds to 5 = modulus/2
  CHECK(encode(tight, -4.7) == 5);                     // -5 is representable
  CHECK(decode(tight, 5) == -5.0);
}

TEST_CASE("encoded sums ride through the additive homomorphism") {
  Entropy rng(21);
  const auto kp = paillier::keygen(64, rng);
  const auto c = FixedPointCodec::create(10, 4, kp.pub.n);
  std::mt19937_64 dice(3);
  for (int i = 0; i < 25; ++i) {
    const double x = uniform(dice, -1.0, 1.0);
    const double y = uniform(dice, -1.0, 1.0);
    const auto cx = paillier::encrypt(kp.pub, encode(c, x), rng);
    const auto cy = paillier::encrypt(kp.pub, encode(c, y), rng);
    const mpz_class sum =
        paillier::decrypt(kp.priv, paillier::add_cipher(kp.pub, cx, cy));
    CHECK(std::fabs(decode(c, sum) - (x + y)) <= 1e-4);
  }
}
