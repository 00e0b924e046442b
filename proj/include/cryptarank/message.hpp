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
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <typeinfo>
#include <variant>
#include <vector>

#include "cryptarank/bignum.hpp"
#include "cryptarank/errors.hpp"
#include <json.hpp>

namespace cryptarank::transport {

// Coordinator <-> party messages. On the wire every message is one frame:
// a 4-byte big-endian payload length followed by a UTF-8 JSON payload.
// Big integers travel as lowercase hex strings; rank values travel as
// decimal strings with 17 significant digits so they parse back to the
// identical binary64 on any conforming platform.

enum class MessageKind {
  Setup,
  SliceDelivery,
  RoundBroadcast,
  Contribution,
  Shutdown,
  Error,
};

inline const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Setup: return "setup";
    case MessageKind::SliceDelivery: return "slice";
    case MessageKind::RoundBroadcast: return "broadcast";
    case MessageKind::Contribution: return "contribution";
    case MessageKind::Shutdown: return "shutdown";
    case MessageKind::Error: return "error";
  }
  return "?";
}

struct SetupBody {
  mpz_class n;
  mpz_class g;
  int codec_base = 10;
  int codec_exp = 6;
  int party_id = 0;

  friend bool operator==(const SetupBody&, const SetupBody&) = default;
};

struct SliceBody {
  std::vector<int> columns;
  // cipher_rows[i][c]: row i of the slice, column columns[c]
  std::vector<std::vector<mpz_class>> cipher_rows;

  friend bool operator==(const SliceBody&, const SliceBody&) = default;
};

struct BroadcastBody {
  std::vector<double> ranks;
  std::vector<std::int64_t> out_degree;

  friend bool operator==(const BroadcastBody&, const BroadcastBody&) = default;
};

struct ContributionBody {
  int party_id = 0;
  std::vector<int> columns;
  // cipher_cols[c][i]: column columns[c], row i
  std::vector<std::vector<mpz_class>> cipher_cols;

  friend bool operator==(const ContributionBody&,
                         const ContributionBody&) = default;
};

struct TextBody {
  std::string detail;

  friend bool operator==(const TextBody&, const TextBody&) = default;
};

struct ProtocolMessage {
  MessageKind kind = MessageKind::Shutdown;
  int round = 0;
  std::variant<SetupBody, SliceBody, BroadcastBody, ContributionBody, TextBody>
      body;

  template <typename T>
  const T& as() const {
    const T* p = std::get_if<T>(&body);
    if (p == nullptr) {
      throw ProtocolError(std::string("message body is not a ") +
                          typeid(T).name());
    }
    return *p;
  }

  friend bool operator==(const ProtocolMessage&,
                         const ProtocolMessage&) = default;
};

// 17 significant digits round-trip any binary64 exactly.
inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(const std::string& s, const std::string& field) {
  if (s.empty()) {
    throw SerializationError("field '" + field + "': empty decimal string");
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw SerializationError("field '" + field +
                             "': invalid decimal at offset " +
                             std::to_string(end - s.c_str()));
  }
  return v;
}

namespace detail {

inline nlohmann::json require_field(const nlohmann::json& j,
                                    const char* field) {
  if (!j.contains(field)) {
    throw SerializationError(std::string("message lacks field '") + field +
                             "'");
  }
  return j.at(field);
}

inline std::vector<int> parse_int_array(const nlohmann::json& j,
                                        const char* field) {
  if (!j.is_array()) {
    throw SerializationError(std::string("field '") + field +
                             "' must be an array");
  }
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw SerializationError(std::string("field '") + field +
                               "' must hold integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

inline std::vector<std::vector<mpz_class>> parse_hex_matrix(
    const nlohmann::json& j, const char* field) {
  if (!j.is_array()) {
    throw SerializationError(std::string("field '") + field +
                             "' must be an array of arrays");
  }
  std::vector<std::vector<mpz_class>> out;
  out.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array()) {
      throw SerializationError(std::string("field '") + field +
                               "' must be an array of arrays");
    }
    std::vector<mpz_class> r;
    r.reserve(row.size());
    for (const auto& cell : row) {
      if (!cell.is_string()) {
        throw SerializationError(std::string("field '") + field +
                                 "' must hold hex strings");
      }
      r.push_back(from_hex(cell.get<std::string>(), field));
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::ordered_json hex_matrix_to_json(
    const std::vector<std::vector<mpz_class>>& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : m) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& v : row) r.push_back(to_hex(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

inline std::string serialize(const ProtocolMessage& msg) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(msg.kind);
  j["round"] = msg.round;
  switch (msg.kind) {
    case MessageKind::Setup: {
      const auto& b = msg.as<SetupBody>();
      nlohmann::ordered_json pk;
      pk["n"] = to_hex(b.n);
      pk["g"] = to_hex(b.g);
      j["pk"] = std::move(pk);
      nlohmann::ordered_json codec;
      codec["base"] = b.codec_base;
      codec["exp"] = b.codec_exp;
      j["codec"] = std::move(codec);
      j["party_id"] = b.party_id;
      break;
    }
    case MessageKind::SliceDelivery: {
      const auto& b = msg.as<SliceBody>();
      j["columns"] = b.columns;
      j["cipher_rows"] = detail::hex_matrix_to_json(b.cipher_rows);
      break;
    }
    case MessageKind::RoundBroadcast: {
      const auto& b = msg.as<BroadcastBody>();
      nlohmann::ordered_json ranks = nlohmann::ordered_json::array();
      for (const double r : b.ranks) ranks.push_back(format_real(r));
      j["ranks"] = std::move(ranks);
      j["out_degree"] = b.out_degree;
      break;
    }
    case MessageKind::Contribution: {
      const auto& b = msg.as<ContributionBody>();
      j["party_id"] = b.party_id;
      j["columns"] = b.columns;
      j["cipher_cols"] = detail::hex_matrix_to_json(b.cipher_cols);
      break;
    }
    case MessageKind::Shutdown:
    case MessageKind::Error: {
      j["detail"] = msg.as<TextBody>().detail;
      break;
    }
  }
  return j.dump();
}

inline ProtocolMessage deserialize(std::string_view payload) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw SerializationError("malformed JSON at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw SerializationError("message payload must be a JSON object");
  }

  ProtocolMessage msg;
  const auto kind = detail::require_field(j, "kind");
  if (!kind.is_string()) {
    throw SerializationError("field 'kind' must be a string");
  }
  const std::string k = kind.get<std::string>();
  const auto round = detail::require_field(j, "round");
  if (!round.is_number_integer() || round.get<int>() < 0) {
    throw SerializationError("field 'round' must be a non-negative integer");
  }
  msg.round = round.get<int>();

  if (k == "setup") {
    msg.kind = MessageKind::Setup;
    SetupBody b;
    const auto pk = detail::require_field(j, "pk");
    b.n = from_hex(detail::require_field(pk, "n").get<std::string>(), "pk.n");
    b.g = from_hex(detail::require_field(pk, "g").get<std::string>(), "pk.g");
    const auto codec = detail::require_field(j, "codec");
    b.codec_base = detail::require_field(codec, "base").get<int>();
    b.codec_exp = detail::require_field(codec, "exp").get<int>();
    b.party_id = detail::require_field(j, "party_id").get<int>();
    msg.body = std::move(b);
  } else if (k == "slice") {
    msg.kind = MessageKind::SliceDelivery;
    SliceBody b;
    b.columns = detail::parse_int_array(detail::require_field(j, "columns"),
                                        "columns");
    b.cipher_rows = detail::parse_hex_matrix(
        detail::require_field(j, "cipher_rows"), "cipher_rows");
    msg.body = std::move(b);
  } else if (k == "broadcast") {
    msg.kind = MessageKind::RoundBroadcast;
    BroadcastBody b;
    const auto ranks = detail::require_field(j, "ranks");
    if (!ranks.is_array()) {
      throw SerializationError("field 'ranks' must be an array");
    }
    for (const auto& r : ranks) {
      if (!r.is_string()) {
        throw SerializationError("field 'ranks' must hold decimal strings");
      }
      b.ranks.push_back(parse_real(r.get<std::string>(), "ranks"));
    }
    const auto degs = detail::require_field(j, "out_degree");
    if (!degs.is_array()) {
      throw SerializationError("field 'out_degree' must be an array");
    }
    for (const auto& d : degs) {
      if (!d.is_number_integer()) {
        throw SerializationError("field 'out_degree' must hold integers");
      }
      b.out_degree.push_back(d.get<std::int64_t>());
    }
    msg.body = std::move(b);
  } else if (k == "contribution") {
    msg.kind = MessageKind::Contribution;
    ContributionBody b;
    b.party_id = detail::require_field(j, "party_id").get<int>();
    b.columns = detail::parse_int_array(detail::require_field(j, "columns"),
                                        "columns");
    b.cipher_cols = detail::parse_hex_matrix(
        detail::require_field(j, "cipher_cols"), "cipher_cols");
    msg.body = std::move(b);
  } else if (k == "shutdown" || k == "error") {
    msg.kind = k == "shutdown" ? MessageKind::Shutdown : MessageKind::Error;
    msg.body = TextBody{detail::require_field(j, "detail").get<std::string>()};
  } else {
    throw SerializationError("unknown kind tag '" + k + "'");
  }
  return msg;
}

// Frame = u32 big-endian payload length || payload bytes.
inline constexpr std::size_t kMaxFrameBytes = 1u << 30;

inline std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) {
    throw TransportError("frame payload exceeds the 1 GiB bound");
  }
  const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out.append(payload);
  return out;
}

inline std::uint32_t decode_frame_length(const unsigned char header[4]) {
  const std::uint32_t len = (static_cast<std::uint32_t>(header[0]) << 24) |
                            (static_cast<std::uint32_t>(header[1]) << 16) |
                            (static_cast<std::uint32_t>(header[2]) << 8) |
                            static_cast<std::uint32_t>(header[3]);
  if (len > kMaxFrameBytes) {
    throw TransportError("frame length " + std::to_string(len) +
                         " exceeds the 1 GiB bound");
  }
  return len;
}

}  // namespace cryptarank::transport
