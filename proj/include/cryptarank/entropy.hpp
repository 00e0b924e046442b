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

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>

namespace cryptarank {

// Seedable entropy stream over GMP's Mersenne Twister state. One stream is
// owned by one thread; independent streams may be drawn concurrently.
class Entropy {
 public:
  explicit Entropy(std::uint64_t seed) : state_(new_state()) {
    gmp_randseed_ui(state_.get(), static_cast<unsigned long>(seed));
  }

  // Nondeterministic stream for production key generation and encryption.
  static Entropy from_os() {
    std::random_device rd;
    mpz_class seed = 0;
    for (int i = 0; i < 8; ++i) {
      seed <<= 32;
      seed += static_cast<unsigned long>(rd());
    }
    Entropy e(0);
    gmp_randseed(e.state_.get(), seed.get_mpz_t());
    return e;
  }

  Entropy(Entropy&&) noexcept = default;
  Entropy& operator=(Entropy&&) noexcept = default;
  Entropy(const Entropy&) = delete;
  Entropy& operator=(const Entropy&) = delete;

  // Uniform in [0, bound).
  mpz_class below(const mpz_class& bound) {
    if (sgn(bound) <= 0) {
      throw std::invalid_argument("Entropy::below requires a positive bound");
    }
    mpz_class r;
    mpz_urandomm(r.get_mpz_t(), state_.get(), bound.get_mpz_t());
    return r;
  }

  // Uniform in [0, 2^nbits).
  mpz_class bits(mp_bitcnt_t nbits) {
    mpz_class r;
    mpz_urandomb(r.get_mpz_t(), state_.get(), nbits);
    return r;
  }

 private:
  struct StateDeleter {
    void operator()(__gmp_randstate_struct* s) const {
      gmp_randclear(s);
      delete s;
    }
  };
  using StatePtr = std::unique_ptr<__gmp_randstate_struct, StateDeleter>;

  static StatePtr new_state() {
    auto* s = new __gmp_randstate_struct;
    gmp_randinit_mt(s);
    return StatePtr(s);
  }

  StatePtr state_;
};

}  // namespace cryptarank
