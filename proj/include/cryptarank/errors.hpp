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

#include <stdexcept>
#include <string>

namespace cryptarank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ciphertext/key pairing violations (operating across different key pairs).
class KeyMismatchError : public Error {
 public:
  using Error::Error;
};

// Prime search exhausted its attempt budget or produced unusable parameters.
class KeygenError : public Error {
 public:
  using Error::Error;
};

// Fixed-point value does not fit the plaintext half-range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Malformed wire bytes: bad JSON, unknown kind tag, invalid hex.
class SerializationError : public Error {
 public:
  using Error::Error;
};

// Endpoint failures: closed peers, truncated frames, socket errors.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Violations of the message flow contract (missing party, wrong round, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace cryptarank
