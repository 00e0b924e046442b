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

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "cryptarank/bignum.hpp"
#include "cryptarank/entropy.hpp"
#include "cryptarank/errors.hpp"
#include <json.hpp>

namespace cryptarank::paillier {

// Paillier cryptosystem over Z_{n^2} with g = n + 1.
//
// Enc(m; r) = g^m * r^n mod n^2,   r a unit mod n
// Dec(c)    = L(c^lambda mod n^2) * mu mod n,   L(u) = (u - 1) / n
//
// Ciphertext multiplication adds plaintexts; ciphertext exponentiation by
// a public scalar multiplies the plaintext by that scalar. Both are pure
// public-key operations.
//
// Key sizes of 128 and 256 bits are accepted so timing grids can cover
// them, but they are far below any credible security margin. Use >= 2048
// bits for anything other than benchmarks and tests.
//
// Everything below keygen is a pure function of immutable inputs and may
// be called from any number of threads; each Entropy stream belongs to
// one thread.

struct PublicKey {
  mpz_class n;          // modulus, product of two equal-length odd primes
  mpz_class n_squared;  // cached n^2
  mpz_class g;          // generator of the plaintext embedding, g = n + 1
  std::uint64_t key_id = 0;

  static PublicKey from_modulus(const mpz_class& n) {
    PublicKey pk;
    pk.n = n;
    pk.n_squared = n * n;
    pk.g = n + 1;
    pk.key_id = fingerprint(n);
    return pk;
  }

  std::size_t bits() const { return bit_length(n); }
};

struct PrivateKey {
  mpz_class lambda;  // lcm(p-1, q-1)
  mpz_class mu;      // L(g^lambda mod n^2)^-1 mod n
  mpz_class n;
};

struct KeyPair {
  PublicKey pub;
  PrivateKey priv;
  int bits = 0;
};

struct Ciphertext {
  mpz_class value;  // unit of the group mod n^2, in [1, n^2 - 1]
  std::uint64_t key_id = 0;

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.key_id == b.key_id && a.value == b.value;
  }
};

namespace detail {

inline const std::array<unsigned, 25>& small_primes() {
  static const std::array<unsigned, 25> primes = {
      2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
      43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
  return primes;
}

}  // namespace detail

// Miller-Rabin with random bases, preceded by trial division. Candidates
// below 101^2 that survive trial division are certainly prime.
inline bool is_probable_prime(const mpz_class& n, int rounds, Entropy& rng) {
  if (n < 2) return false;
  for (const unsigned p : detail::small_primes()) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  if (n < 101 * 101) return true;

  // n - 1 = 2^s * d with d odd
  mpz_class d = n - 1;
  unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  d >>= s;

  const mpz_class n_minus_1 = n - 1;
  mpz_class a, x;
  for (int round = 0; round < rounds; ++round) {
    a = 2 + rng.below(n - 3);  // uniform in [2, n - 2]
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (unsigned long i = 0; i + 1 < s; ++i) {
      x = (x * x) % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

namespace detail {

constexpr int kMillerRabinRounds = 40;

// Random prime with exactly `bits` bits and the two top bits set, so the
// product of two such primes has exactly 2*bits bits.
inline mpz_class random_prime(mp_bitcnt_t bits, Entropy& rng, long& budget) {
  while (budget > 0) {
    --budget;
    mpz_class c = rng.bits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (is_probable_prime(c, kMillerRabinRounds, rng)) return c;
  }
  throw KeygenError("prime generation exceeded the attempt bound");
}

inline mpz_class L(const mpz_class& u, const mpz_class& n) {
  mpz_class r;
  mpz_divexact(r.get_mpz_t(), mpz_class(u - 1).get_mpz_t(), n.get_mpz_t());
  return r;
}

}  // namespace detail

inline KeyPair keygen(int bits, Entropy& rng) {
  if (bits < 16) {
    throw std::invalid_argument(
        "keygen: key size below 16 bits cannot hold two distinct primes");
  }
  if (bits % 2 != 0) {
    throw std::invalid_argument("keygen: key size must be even");
  }

  const mp_bitcnt_t half = static_cast<mp_bitcnt_t>(bits) / 2;
  long budget = 1000 + 64L * bits;
  mpz_class p = detail::random_prime(half, rng, budget);
  mpz_class q;
  do {
    q = detail::random_prime(half, rng, budget);
  } while (q == p);

  KeyPair kp;
  kp.bits = bits;
  kp.pub = PublicKey::from_modulus(p * q);
  if (bit_length(kp.pub.n) != static_cast<std::size_t>(bits)) {
    throw KeygenError("modulus missed the requested bit length");
  }

  mpz_class lambda;
  mpz_lcm(lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(),
          mpz_class(q - 1).get_mpz_t());
  mpz_class u;
  mpz_powm(u.get_mpz_t(), kp.pub.g.get_mpz_t(), lambda.get_mpz_t(),
           kp.pub.n_squared.get_mpz_t());
  mpz_class mu;
  if (mpz_invert(mu.get_mpz_t(), detail::L(u, kp.pub.n).get_mpz_t(),
                 kp.pub.n.get_mpz_t()) == 0) {
    // Unreachable for distinct equal-length odd primes.
    throw KeygenError("decryption parameter mu is not invertible");
  }
  kp.priv = PrivateKey{lambda, mu, kp.pub.n};
  return kp;
}

inline Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                          Entropy& rng) {
  if (sgn(m) < 0 || m >= pk.n) {
    throw std::invalid_argument("encrypt: plaintext outside [0, n)");
  }

  mpz_class r, gcd;
  for (int tries = 0;; ++tries) {
    r = rng.below(pk.n);
    mpz_gcd(gcd.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (sgn(r) != 0 && gcd == 1) break;
    if (tries > 4096) throw KeygenError("could not sample a unit mod n");
  }

  mpz_class gm;
  if (pk.g == pk.n + 1) {
    gm = 1 + m * pk.n;  // (n + 1)^m = 1 + m*n  (mod n^2)
  } else {
    mpz_powm(gm.get_mpz_t(), pk.g.get_mpz_t(), m.get_mpz_t(),
             pk.n_squared.get_mpz_t());
  }
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  return Ciphertext{mpz_class(gm * rn % pk.n_squared), pk.key_id};
}

inline mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c) {
  if (fingerprint(sk.n) != c.key_id) {
    throw KeyMismatchError("decrypt: ciphertext was made under another key");
  }
  const mpz_class n_squared = sk.n * sk.n;
  if (sgn(c.value) <= 0 || c.value >= n_squared) {
    throw Error("decrypt: ciphertext value outside [1, n^2 - 1]");
  }
  mpz_class gcd;
  mpz_gcd(gcd.get_mpz_t(), c.value.get_mpz_t(), n_squared.get_mpz_t());
  if (gcd != 1) {
    throw Error("decrypt: ciphertext value is not a unit mod n^2");
  }
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.value.get_mpz_t(), sk.lambda.get_mpz_t(),
           n_squared.get_mpz_t());
  return detail::L(u, sk.n) * sk.mu % sk.n;
}

inline Ciphertext add_cipher(const PublicKey& pk, const Ciphertext& c1,
                             const Ciphertext& c2) {
  if (c1.key_id != pk.key_id || c2.key_id != pk.key_id) {
    throw KeyMismatchError("add_cipher: ciphertexts under different keys");
  }
  return Ciphertext{mpz_class(c1.value * c2.value % pk.n_squared), pk.key_id};
}

inline Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& c,
                             const mpz_class& a) {
  if (c.key_id != pk.key_id) {
    throw KeyMismatchError("scalar_mul: ciphertext under a different key");
  }
  if (sgn(a) < 0 || a >= pk.n) {
    throw std::invalid_argument(
        "scalar_mul: scalar outside [0, n); encode signs separately");
  }
  mpz_class v;
  mpz_powm(v.get_mpz_t(), c.value.get_mpz_t(), a.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  return Ciphertext{v, pk.key_id};
}

// JSON export: {"bits": int, "n": hex, "g": hex, "lambda": hex, "mu": hex}.
// Public-only export omits lambda and mu.
inline nlohmann::ordered_json keypair_to_json(const KeyPair& kp,
                                              bool include_private) {
  nlohmann::ordered_json j;
  j["bits"] = kp.bits;
  j["n"] = to_hex(kp.pub.n);
  j["g"] = to_hex(kp.pub.g);
  if (include_private) {
    j["lambda"] = to_hex(kp.priv.lambda);
    j["mu"] = to_hex(kp.priv.mu);
  }
  return j;
}

inline PublicKey public_key_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("g")) {
    throw SerializationError("key JSON lacks 'n' or 'g'");
  }
  PublicKey pk = PublicKey::from_modulus(
      from_hex(j.at("n").get<std::string>(), "n"));
  pk.g = from_hex(j.at("g").get<std::string>(), "g");
  return pk;
}

inline KeyPair keypair_from_json(const nlohmann::json& j) {
  if (!j.contains("lambda") || !j.contains("mu")) {
    throw SerializationError("key JSON lacks private parameters");
  }
  KeyPair kp;
  kp.pub = public_key_from_json(j);
  kp.bits = j.contains("bits") ? j.at("bits").get<int>()
                               : static_cast<int>(kp.pub.bits());
  kp.priv = PrivateKey{from_hex(j.at("lambda").get<std::string>(), "lambda"),
                       from_hex(j.at("mu").get<std::string>(), "mu"), kp.pub.n};
  return kp;
}

}  // namespace cryptarank::paillier
