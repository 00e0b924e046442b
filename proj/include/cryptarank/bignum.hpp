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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "cryptarank/errors.hpp"

namespace cryptarank {

// All big integers cross module and process boundaries as lowercase
// hexadecimal strings without prefix.
inline std::string to_hex(const mpz_class& v) {
  if (sgn(v) < 0) {
    throw SerializationError("cannot hex-encode a negative big integer");
  }
  return v.get_str(16);
}

inline mpz_class from_hex(std::string_view s, const std::string& field) {
  if (s.empty()) {
    throw SerializationError("field '" + field + "': empty hex string");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) {
      throw SerializationError("field '" + field +
                               "': invalid hex character at offset " +
                               std::to_string(i));
    }
  }
  mpz_class v;
  v.set_str(std::string(s), 16);
  return v;
}

inline std::size_t bit_length(const mpz_class& v) {
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

// FNV-1a over the hex digits. Used to tag ciphertexts with the key they
// were produced under; a guardrail against cross-key operations, not a
// security mechanism.
inline std::uint64_t fingerprint(const mpz_class& n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : to_hex(n)) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace cryptarank
