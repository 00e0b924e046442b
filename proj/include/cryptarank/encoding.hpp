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
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "cryptarank/errors.hpp"

namespace cryptarank::encoding {

// Maps reals into the integer plaintext space [0, modulus): a value x is
// stored as round(x * base^exponent), with the upper half of the residue
// range representing negatives. Rounding is half away from zero.
struct FixedPointCodec {
  int base = 10;      // 2 or 10
  int exponent = 6;   // scale = base^exponent
  mpz_class modulus;  // plaintext space bound (the Paillier n)
  mpz_class scale;

  static FixedPointCodec create(int base, int exponent,
                                const mpz_class& modulus) {
    if (base != 2 && base != 10) {
      throw std::invalid_argument("codec base must be 2 or 10");
    }
    if (exponent < 0) {
      throw std::invalid_argument("codec exponent must be non-negative");
    }
    if (sgn(modulus) <= 0) {
      throw std::invalid_argument("codec modulus must be positive");
    }
    FixedPointCodec c;
    c.base = base;
    c.exponent = exponent;
    c.modulus = modulus;
    mpz_ui_pow_ui(c.scale.get_mpz_t(), static_cast<unsigned long>(base),
                  static_cast<unsigned long>(exponent));
    return c;
  }

  // One fixed-point multiplication followed by a column sum of max_dim
  // terms must stay inside the signed half-range.
  void require_headroom(int max_dim) const {
    if (max_dim < 1) {
      throw std::invalid_argument("headroom check needs a positive dimension");
    }
    if (2 * scale * scale * max_dim >= modulus) {
      throw OverflowError(
          "codec headroom: scale^2 * " + std::to_string(max_dim) +
          " exceeds half the plaintext space; lower --scale-exp or raise "
          "--key-bits");
    }
  }
};

inline mpz_class encode(const FixedPointCodec& codec, double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("encode: value must be finite");
  }
  mpq_class exact(x);  // doubles are rationals; this conversion is exact
  exact *= mpq_class(codec.scale);
  const mpz_class& num = exact.get_num();
  const mpz_class& den = exact.get_den();  // positive in canonical form

  // Precondition |x| * scale < modulus / 2, checked exactly.
  if (2 * abs(num) >= codec.modulus * den) {
    throw OverflowError("encode: magnitude overflows the plaintext half-range");
  }

  // Round half away from zero.
  mpz_class quot, rem;
  mpz_tdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(),
              den.get_mpz_t());
  if (2 * abs(rem) >= den) {
    quot += sgn(num) < 0 ? -1 : 1;
  }

  if (sgn(quot) >= 0) {
    if (2 * quot >= codec.modulus) {
      throw OverflowError("encode: rounded value reaches the sign boundary");
    }
    return quot;
  }
  return codec.modulus + quot;
}

inline double decode(const FixedPointCodec& codec, const mpz_class& v) {
  if (sgn(v) < 0 || v >= codec.modulus) {
    throw std::invalid_argument("decode: value outside [0, modulus)");
  }
  mpz_class signed_v = v;
  if (2 * v >= codec.modulus) {
    signed_v -= codec.modulus;
  }
  mpq_class q(signed_v, codec.scale);
  q.canonicalize();
  return q.get_d();
}

}  // namespace cryptarank::encoding
