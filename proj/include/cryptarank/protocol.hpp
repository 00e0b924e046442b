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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cryptarank/encoding.hpp"
#include "cryptarank/entropy.hpp"
#include "cryptarank/errors.hpp"
#include "cryptarank/graph.hpp"
#include "cryptarank/oracle.hpp"
#include "cryptarank/paillier.hpp"
#include "cryptarank/transport.hpp"

namespace cryptarank::protocol {

// The multi-party engine. A trusted coordinator owns the graph and the key
// pair; it encrypts column slices of the adjacency matrix and hands one
// slice to each party. Every round the coordinator broadcasts the current
// rank and out-degree vectors in plaintext (the parties are allowed to see
// them); each party exponentiates its ciphertext slice by the quantized
// per-row factor rank/out_degree and returns the result; the coordinator
// merges, decrypts, and applies the rank update. No party ever sees the
// private key, another party's slice, or any plaintext matrix entry.
//
// Everyone is semi-honest: all roles follow the protocol and merely try to
// infer extra information from what they legitimately receive.
//
// Parties run concurrently (one thread each, under either transport); the
// coordinator is one logical thread that barriers on all k contributions
// before it advances the round.

// Plaintext values every party receives each round.
struct RoundBroadcast {
  std::vector<double> ranks;
  std::vector<std::int64_t> out_degree;
};

// Everything a party holds: its slice, the public key, the codec. Never
// the private key, never another party's slice.
struct PartyState {
  int party_id = 0;
  graph::EncryptedSlice slice;
  paillier::PublicKey public_key;
  encoding::FixedPointCodec codec;
};

// One party's scaled ciphertext columns for one round.
struct EncryptedContribution {
  int party_id = 0;
  std::vector<int> column_indices;
  // cipher_columns[c][i]: global column column_indices[c], row i
  std::vector<std::vector<paillier::Ciphertext>> cipher_columns;
};

// Per-row factor round(ranks[i]/out_degree[i] * scale) as a plaintext
// scalar; dangling rows get zero. Hoisted out of the column loop because
// the factor only depends on the row.
inline std::vector<mpz_class> quantized_row_scalars(
    const encoding::FixedPointCodec& codec, const RoundBroadcast& broadcast) {
  if (broadcast.out_degree.size() != broadcast.ranks.size()) {
    throw std::invalid_argument(
        "broadcast rank and out-degree vectors differ in length");
  }
  std::vector<mpz_class> scalars;
  scalars.reserve(broadcast.ranks.size());
  for (std::size_t i = 0; i < broadcast.ranks.size(); ++i) {
    const std::int64_t deg = broadcast.out_degree[i];
    if (deg > 0) {
      scalars.push_back(encoding::encode(
          codec, broadcast.ranks[i] / static_cast<double>(deg)));
    } else {
      scalars.emplace_back(0);
    }
  }
  return scalars;
}

// The per-party round computation: scale every entry of the owned columns
// by the public row factor, entirely under encryption.
inline EncryptedContribution secure_int_matrix(const PartyState& party,
                                               const RoundBroadcast& broadcast) {
  const std::size_t m = broadcast.ranks.size();
  if (party.slice.cipher_rows.size() != m) {
    throw std::invalid_argument(
        "broadcast length does not match the slice row count");
  }
  const std::vector<mpz_class> scalars =
      quantized_row_scalars(party.codec, broadcast);

  EncryptedContribution out;
  out.party_id = party.party_id;
  out.column_indices = party.slice.column_indices;
  const std::size_t cols = party.slice.column_indices.size();
  out.cipher_columns.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    out.cipher_columns[c].reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (party.slice.cipher_rows[i].size() != cols) {
        throw std::invalid_argument("slice row has the wrong column count");
      }
      out.cipher_columns[c].push_back(paillier::scalar_mul(
          party.public_key, party.slice.cipher_rows[i][c], scalars[i]));
    }
  }
  return out;
}

// Reassembles the global m x m ciphertext matrix, each contributed column
// at its global index. Exactly one contribution per party; the contributed
// columns must be exactly the partition the plan prescribes.
inline std::vector<std::vector<paillier::Ciphertext>> merge_contributions(
    const std::vector<EncryptedContribution>& contributions,
    const graph::PartitionPlan& plan) {
  const int m = plan.node_count();
  const int k = plan.party_count;
  if (static_cast<int>(contributions.size()) != k) {
    throw ProtocolError("expected " + std::to_string(k) +
                        " contributions, got " +
                        std::to_string(contributions.size()));
  }
  const auto plan_columns = plan.columns_per_party();
  std::vector<bool> party_seen(k, false);
  std::vector<bool> column_filled(m, false);
  std::vector<std::vector<paillier::Ciphertext>> merged(
      m, std::vector<paillier::Ciphertext>(m));

  for (const auto& contrib : contributions) {
    const int p = contrib.party_id;
    if (p < 0 || p >= k) {
      throw ProtocolError("contribution from unknown party " +
                          std::to_string(p));
    }
    if (party_seen[p]) {
      throw ProtocolError("duplicate contribution from party " +
                          std::to_string(p));
    }
    party_seen[p] = true;
    if (contrib.column_indices != plan_columns[p]) {
      throw ProtocolError("party " + std::to_string(p) +
                          " contributed columns that differ from its plan");
    }
    if (contrib.cipher_columns.size() != contrib.column_indices.size()) {
      throw ProtocolError("party " + std::to_string(p) +
                          " contribution has a malformed column count");
    }
    for (std::size_t c = 0; c < contrib.column_indices.size(); ++c) {
      const int j = contrib.column_indices[c];
      if (j < 0 || j >= m || column_filled[j]) {
        throw ProtocolError("duplicate or out-of-range column " +
                            std::to_string(j));
      }
      if (contrib.cipher_columns[c].size() != static_cast<std::size_t>(m)) {
        throw ProtocolError("column " + std::to_string(j) +
                            " has the wrong row count");
      }
      column_filled[j] = true;
      for (int i = 0; i < m; ++i) {
        merged[i][j] = contrib.cipher_columns[c][i];
      }
    }
  }
  for (int p = 0; p < k; ++p) {
    if (!party_seen[p]) {
      throw ProtocolError("missing contribution from party " +
                          std::to_string(p));
    }
  }
  for (int j = 0; j < m; ++j) {
    if (!column_filled[j]) {
      throw ProtocolError("column " + std::to_string(j) +
                          " was contributed by no party");
    }
  }
  return merged;
}

// Everything the trusted coordinator holds. The private key lives here and
// nowhere else.
struct CoordinatorState {
  paillier::KeyPair keys;
  graph::AdjacencyGraph graph;
  graph::PartitionPlan plan;
  encoding::FixedPointCodec codec;
  oracle::PageRankState ranks;
  double damping = 0.85;
  double tolerance = 1e-6;
  int max_iter = 100;
};

// Decrypt the merged matrix, decode every entry, and apply the rank
// update. Mutates the coordinator's rank state only after the whole round
// validated; any error leaves the previous state untouched.
inline oracle::PageRankState coordinator_round(
    CoordinatorState& coord,
    const std::vector<EncryptedContribution>& contributions) {
  const int m = coord.graph.node_count();
  const auto merged = merge_contributions(contributions, coord.plan);

  // Every decoded entry is adjacency_bit * rank/out_degree, so anything
  // outside [0, 1] beyond one quantization step means the plaintext space
  // wrapped around.
  const double slack = 1.0 / coord.codec.scale.get_d();
  std::vector<std::vector<double>> t(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const mpz_class plain = paillier::decrypt(coord.keys.priv, merged[i][j]);
      const double e = encoding::decode(coord.codec, plain);
      if (e < 0.0 || e > 1.0 + slack) {
        throw OverflowError("decoded matrix entry " + std::to_string(e) +
                            " at (" + std::to_string(i) + ", " +
                            std::to_string(j) +
                            ") is outside [0, 1]: plaintext space overflow");
      }
      t[i][j] = e;
    }
  }

  std::vector<double> next(m);
  const double teleport = (1.0 - coord.damping) / m;
  for (int i = 0; i < m; ++i) {
    double inflow = 0.0;
    for (int j = 0; j < m; ++j) {
      inflow += t[j][i];
    }
    next[i] = teleport + coord.damping * inflow;
  }

  double delta = 0.0;
  for (int i = 0; i < m; ++i) {
    delta += std::fabs(next[i] - coord.ranks.ranks[i]);
  }
  coord.ranks.ranks = std::move(next);
  coord.ranks.last_delta = delta;
  ++coord.ranks.iteration;
  return coord.ranks;
}

struct RunOptions {
  int party_count = 3;
  int key_bits = 512;
  double damping = 0.85;
  int scale_base = 10;
  int scale_exp = 6;
  double tolerance = 1e-6;
  int max_iter = 100;
  std::uint64_t seed = 0;  // drives the column partition only
};

struct PhaseTimings {
  double keygen_s = 0.0;
  double encrypt_s = 0.0;
  double iterate_s = 0.0;
  double total_s = 0.0;
};

struct RunReport {
  std::vector<double> pagerank;
  int iterations = 0;
  bool converged = false;
  int key_bits = 0;
  int parties = 0;
  int scale_base = 10;
  int scale_exp = 6;
  PhaseTimings elapsed_s;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["pagerank"] = pagerank;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["key_bits"] = key_bits;
    j["parties"] = parties;
    j["scale_base"] = scale_base;
    j["scale_exp"] = scale_exp;
    nlohmann::ordered_json e;
    e["keygen"] = elapsed_s.keygen_s;
    e["encrypt"] = elapsed_s.encrypt_s;
    e["iterate"] = elapsed_s.iterate_s;
    e["total"] = elapsed_s.total_s;
    j["elapsed_s"] = std::move(e);
    return j;
  }
};

struct RunResult {
  oracle::PageRankState state;
  RunReport report;
  transport::Transcript transcript;
  paillier::KeyPair keys;
  graph::PartitionPlan plan;
  // Rank state after each completed round, for replay comparison.
  std::vector<oracle::PageRankState> state_history;
};

// Party-side message loop: consume Setup and SliceDelivery, answer every
// RoundBroadcast with a Contribution, stop on Shutdown. Internal failures
// are reported to the coordinator as an Error message.
inline void serve_party(transport::Endpoint& ep) {
  std::optional<PartyState> state;
  std::optional<paillier::PublicKey> pk;
  std::optional<encoding::FixedPointCodec> codec;
  int party_id = -1;

  for (;;) {
    transport::ProtocolMessage msg;
    try {
      msg = ep.receive();
    } catch (const TransportError&) {
      return;  // coordinator went away; nothing left to serve
    }
    try {
      switch (msg.kind) {
        case transport::MessageKind::Setup: {
          const auto& b = msg.as<transport::SetupBody>();
          pk = paillier::PublicKey::from_modulus(b.n);
          pk->g = b.g;
          codec = encoding::FixedPointCodec::create(b.codec_base, b.codec_exp,
                                                    b.n);
          party_id = b.party_id;
          break;
        }
        case transport::MessageKind::SliceDelivery: {
          if (!pk || !codec) {
            throw ProtocolError("slice delivered before setup");
          }
          const auto& b = msg.as<transport::SliceBody>();
          graph::EncryptedSlice slice;
          slice.party_id = party_id;
          slice.column_indices = b.columns;
          slice.public_key = *pk;
          slice.cipher_rows.reserve(b.cipher_rows.size());
          for (const auto& row : b.cipher_rows) {
            std::vector<paillier::Ciphertext> r;
            r.reserve(row.size());
            for (const auto& v : row) {
              r.push_back(paillier::Ciphertext{v, pk->key_id});
            }
            slice.cipher_rows.push_back(std::move(r));
          }
          state = PartyState{party_id, std::move(slice), *pk, *codec};
          break;
        }
        case transport::MessageKind::RoundBroadcast: {
          if (!state) {
            throw ProtocolError("broadcast received before the slice");
          }
          const auto& b = msg.as<transport::BroadcastBody>();
          EncryptedContribution contrib =
              secure_int_matrix(*state, RoundBroadcast{b.ranks, b.out_degree});
          transport::ContributionBody reply;
          reply.party_id = contrib.party_id;
          reply.columns = contrib.column_indices;
          reply.cipher_cols.resize(contrib.cipher_columns.size());
          for (std::size_t c = 0; c < contrib.cipher_columns.size(); ++c) {
            reply.cipher_cols[c].reserve(contrib.cipher_columns[c].size());
            for (const auto& ct : contrib.cipher_columns[c]) {
              reply.cipher_cols[c].push_back(ct.value);
            }
          }
          ep.send(transport::ProtocolMessage{
              transport::MessageKind::Contribution, msg.round,
              std::move(reply)});
          break;
        }
        case transport::MessageKind::Shutdown:
          return;
        case transport::MessageKind::Error:
          return;
        case transport::MessageKind::Contribution:
          throw ProtocolError("party received a contribution message");
      }
    } catch (const OverflowError& e) {
      ep.send(transport::ProtocolMessage{
          transport::MessageKind::Error, msg.round,
          transport::TextBody{std::string("overflow: ") + e.what()}});
      return;
    } catch (const std::exception& e) {
      ep.send(transport::ProtocolMessage{transport::MessageKind::Error,
                                         msg.round,
                                         transport::TextBody{e.what()}});
      return;
    }
  }
}

namespace detail {

inline void validate_options(const RunOptions& opts, int node_count) {
  if (opts.party_count < 1) {
    throw std::invalid_argument("party count must be at least 1");
  }
  if (opts.party_count > node_count) {
    throw std::invalid_argument(
        "party count exceeds the number of matrix columns");
  }
  if (!(opts.damping > 0.0 && opts.damping < 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1)");
  }
  if (!(opts.tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  if (opts.max_iter < 1) {
    throw std::invalid_argument("max_iter must be at least 1");
  }
  if (opts.key_bits < 16 || opts.key_bits % 2 != 0) {
    throw std::invalid_argument("key bits must be an even number >= 16");
  }
  // Cheap headroom check against the smallest possible modulus, so codec
  // misconfiguration surfaces before any key is generated.
  mpz_class floor_modulus;
  mpz_ui_pow_ui(floor_modulus.get_mpz_t(), 2,
                static_cast<unsigned long>(opts.key_bits - 1));
  encoding::FixedPointCodec::create(opts.scale_base, opts.scale_exp,
                                    floor_modulus)
      .require_headroom(node_count);
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace detail

// Executes the whole protocol: keygen, partition, slice encryption and
// delivery, then broadcast/contribute/decrypt rounds until the L1 delta
// drops below the tolerance or max_iter is reached.
//
// The seed drives the column partition; key generation and encryption
// randomness is always fresh, so ciphertext bytes differ run to run while
// every plaintext output is deterministic.
inline RunResult run_protocol(const graph::AdjacencyGraph& g,
                              const RunOptions& opts,
                              transport::Transport& transport,
                              Entropy* crypto_rng = nullptr) {
  using transport::Direction;
  using transport::MessageKind;
  using transport::ProtocolMessage;

  const int m = g.node_count();
  const int k = opts.party_count;
  detail::validate_options(opts, m);

  const auto t_total = detail::Clock::now();
  Entropy own_rng = Entropy::from_os();
  Entropy& rng = crypto_rng != nullptr ? *crypto_rng : own_rng;

  RunResult result;
  auto& timings = result.report.elapsed_s;

  const auto t_keygen = detail::Clock::now();
  paillier::KeyPair keys = paillier::keygen(opts.key_bits, rng);
  timings.keygen_s = detail::seconds_since(t_keygen);

  const auto codec = encoding::FixedPointCodec::create(
      opts.scale_base, opts.scale_exp, keys.pub.n);
  codec.require_headroom(m);
  const auto plan = graph::make_partition(m, k, opts.seed);

  const auto t_encrypt = detail::Clock::now();
  const auto slices = graph::encrypt_slices(g, plan, keys.pub, rng);
  timings.encrypt_s = detail::seconds_since(t_encrypt);

  CoordinatorState coord{keys,          g,
                         plan,          codec,
                         oracle::PageRankState{}, opts.damping,
                         opts.tolerance, opts.max_iter};
  coord.ranks.ranks.assign(m, 1.0 / m);

  auto endpoints = transport.launch(k, serve_party);
  auto& transcript = result.transcript;

  const auto post = [&](int p, const ProtocolMessage& msg) {
    const std::string payload = transport::serialize(msg);
    transcript.record(Direction::ToParty, p, msg, payload);
    try {
      endpoints[p]->send_payload(payload);
    } catch (const TransportError& e) {
      throw TransportError("round " + std::to_string(msg.round) +
                           ", sending to party " + std::to_string(p) + ": " +
                           e.what());
    }
  };
  const auto fetch = [&](int p, int round) {
    std::string payload;
    try {
      payload = endpoints[p]->receive_payload();
    } catch (const TransportError& e) {
      throw TransportError("round " + std::to_string(round) +
                           ", receiving from party " + std::to_string(p) +
                           ": " + e.what());
    }
    const ProtocolMessage msg = transport::deserialize(payload);
    transcript.record(Direction::FromParty, p, msg, payload);
    return msg;
  };

  for (int p = 0; p < k; ++p) {
    transport::SetupBody setup;
    setup.n = keys.pub.n;
    setup.g = keys.pub.g;
    setup.codec_base = opts.scale_base;
    setup.codec_exp = opts.scale_exp;
    setup.party_id = p;
    post(p, ProtocolMessage{MessageKind::Setup, 0, std::move(setup)});

    transport::SliceBody slice;
    slice.columns = slices[p].column_indices;
    slice.cipher_rows.resize(slices[p].cipher_rows.size());
    for (std::size_t i = 0; i < slices[p].cipher_rows.size(); ++i) {
      slice.cipher_rows[i].reserve(slices[p].cipher_rows[i].size());
      for (const auto& ct : slices[p].cipher_rows[i]) {
        slice.cipher_rows[i].push_back(ct.value);
      }
    }
    post(p, ProtocolMessage{MessageKind::SliceDelivery, 0, std::move(slice)});
  }

  bool converged = false;
  const auto t_iterate = detail::Clock::now();
  for (int round = 1; round <= opts.max_iter && !converged; ++round) {
    transport::BroadcastBody bc;
    bc.ranks = coord.ranks.ranks;
    bc.out_degree = g.out_degree();
    const ProtocolMessage broadcast{MessageKind::RoundBroadcast, round,
                                    std::move(bc)};
    for (int p = 0; p < k; ++p) post(p, broadcast);

    std::vector<EncryptedContribution> contributions(k);
    for (int p = 0; p < k; ++p) {
      const ProtocolMessage msg = fetch(p, round);
      if (msg.kind == MessageKind::Error) {
        const std::string detail = msg.as<transport::TextBody>().detail;
        const std::string context = "party " + std::to_string(p) +
                                    " failed in round " +
                                    std::to_string(round) + ": " + detail;
        if (detail.rfind("overflow: ", 0) == 0) throw OverflowError(context);
        throw ProtocolError(context);
      }
      if (msg.kind != MessageKind::Contribution || msg.round != round) {
        throw ProtocolError("party " + std::to_string(p) +
                            " sent an unexpected message in round " +
                            std::to_string(round));
      }
      const auto& body = msg.as<transport::ContributionBody>();
      if (body.party_id != p) {
        throw ProtocolError("contribution claims party " +
                            std::to_string(body.party_id) + " on channel " +
                            std::to_string(p));
      }
      EncryptedContribution contrib;
      contrib.party_id = body.party_id;
      contrib.column_indices = body.columns;
      contrib.cipher_columns.resize(body.cipher_cols.size());
      for (std::size_t c = 0; c < body.cipher_cols.size(); ++c) {
        contrib.cipher_columns[c].reserve(body.cipher_cols[c].size());
        for (const auto& v : body.cipher_cols[c]) {
          contrib.cipher_columns[c].push_back(
              paillier::Ciphertext{v, keys.pub.key_id});
        }
      }
      contributions[p] = std::move(contrib);
    }

    coordinator_round(coord, contributions);
    result.state_history.push_back(coord.ranks);
    converged = coord.ranks.last_delta < opts.tolerance;
  }
  timings.iterate_s = detail::seconds_since(t_iterate);

  for (int p = 0; p < k; ++p) {
    post(p, ProtocolMessage{MessageKind::Shutdown, coord.ranks.iteration,
                            transport::TextBody{"run complete"}});
  }
  for (auto& ep : endpoints) ep->close();
  transport.join();

  timings.total_s = detail::seconds_since(t_total);
  result.state = coord.ranks;
  result.keys = std::move(keys);
  result.plan = plan;
  result.report.pagerank = result.state.ranks;
  result.report.iterations = result.state.iteration;
  result.report.converged = converged;
  result.report.key_bits = opts.key_bits;
  result.report.parties = k;
  result.report.scale_base = opts.scale_base;
  result.report.scale_exp = opts.scale_exp;
  return result;
}

// Re-runs the coordinator side of a recorded run: contributions are taken
// from the transcript instead of live parties. Produces the same state
// sequence as the original run.
inline std::vector<oracle::PageRankState> replay_transcript(
    const transport::Transcript& transcript, const paillier::KeyPair& keys,
    const graph::AdjacencyGraph& g, const graph::PartitionPlan& plan,
    const RunOptions& opts) {
  const auto codec = encoding::FixedPointCodec::create(
      opts.scale_base, opts.scale_exp, keys.pub.n);
  CoordinatorState coord{keys,          g,
                         plan,          codec,
                         oracle::PageRankState{}, opts.damping,
                         opts.tolerance, opts.max_iter};
  coord.ranks.ranks.assign(g.node_count(), 1.0 / g.node_count());

  std::vector<oracle::PageRankState> states;
  std::vector<EncryptedContribution> pending;
  int pending_round = -1;
  for (const auto& entry : transcript.entries()) {
    if (entry.direction != transport::Direction::FromParty ||
        entry.kind != transport::MessageKind::Contribution) {
      continue;
    }
    const auto msg = transport::deserialize(entry.payload);
    const auto& body = msg.as<transport::ContributionBody>();
    if (pending_round >= 0 && msg.round != pending_round) {
      throw ProtocolError("transcript mixes contributions of rounds " +
                          std::to_string(pending_round) + " and " +
                          std::to_string(msg.round));
    }
    pending_round = msg.round;
    EncryptedContribution contrib;
    contrib.party_id = body.party_id;
    contrib.column_indices = body.columns;
    contrib.cipher_columns.resize(body.cipher_cols.size());
    for (std::size_t c = 0; c < body.cipher_cols.size(); ++c) {
      for (const auto& v : body.cipher_cols[c]) {
        contrib.cipher_columns[c].push_back(
            paillier::Ciphertext{v, keys.pub.key_id});
      }
    }
    pending.push_back(std::move(contrib));
    if (static_cast<int>(pending.size()) == plan.party_count) {
      std::sort(pending.begin(), pending.end(),
                [](const EncryptedContribution& a,
                   const EncryptedContribution& b) {
                  return a.party_id < b.party_id;
                });
      coordinator_round(coord, pending);
      states.push_back(coord.ranks);
      pending.clear();
      pending_round = -1;
    }
  }
  if (!pending.empty()) {
    throw ProtocolError("transcript ends with an incomplete round");
  }
  return states;
}

// Inspects every party-bound message of a recorded run: only the allowed
// message kinds with exactly the documented fields, no private key
// material anywhere, and no raw 0/1 adjacency entries in slice payloads.
struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;

  void flag(std::string what) {
    ok = false;
    violations.push_back(std::move(what));
  }
};

inline AuditReport audit_transcript(const transport::Transcript& transcript,
                                    const paillier::KeyPair& keys) {
  AuditReport report;
  const std::string lambda_hex = to_hex(keys.priv.lambda);
  const std::string mu_hex = to_hex(keys.priv.mu);

  const auto keys_of = [](const nlohmann::json& obj) {
    std::set<std::string> s;
    for (auto it = obj.begin(); it != obj.end(); ++it) s.insert(it.key());
    return s;
  };

  for (const auto& entry : transcript.entries()) {
    if (entry.direction != transport::Direction::ToParty) continue;
    const std::string where =
        "seq " + std::to_string(entry.seq) + " to party " +
        std::to_string(entry.party_id);

    if (entry.payload.find(lambda_hex) != std::string::npos ||
        entry.payload.find(mu_hex) != std::string::npos) {
      report.flag(where + ": payload contains private key material");
    }

    nlohmann::json j = nlohmann::json::parse(entry.payload);
    const std::set<std::string> fields = keys_of(j);
    switch (entry.kind) {
      case transport::MessageKind::Setup: {
        if (fields != std::set<std::string>{"kind", "round", "pk", "codec",
                                            "party_id"} ||
            keys_of(j.at("pk")) != std::set<std::string>{"n", "g"} ||
            keys_of(j.at("codec")) != std::set<std::string>{"base", "exp"}) {
          report.flag(where + ": setup carries undocumented fields");
        }
        break;
      }
      case transport::MessageKind::SliceDelivery: {
        if (fields !=
            std::set<std::string>{"kind", "round", "columns", "cipher_rows"}) {
          report.flag(where + ": slice carries undocumented fields");
        }
        std::set<std::string> seen;
        for (const auto& row : j.at("cipher_rows")) {
          for (const auto& cell : row) {
            const std::string hex = cell.get<std::string>();
            if (hex == "0" || hex == "1") {
              report.flag(where + ": slice exposes a plaintext 0/1 entry");
            }
            if (!seen.insert(hex).second) {
              report.flag(where + ": repeated ciphertext betrays equal "
                                  "plaintexts");
            }
          }
        }
        break;
      }
      case transport::MessageKind::RoundBroadcast: {
        if (fields !=
            std::set<std::string>{"kind", "round", "ranks", "out_degree"}) {
          report.flag(where + ": broadcast carries undocumented fields");
        }
        break;
      }
      case transport::MessageKind::Shutdown: {
        if (fields != std::set<std::string>{"kind", "round", "detail"}) {
          report.flag(where + ": shutdown carries undocumented fields");
        }
        break;
      }
      default:
        report.flag(where + ": unexpected party-bound message kind '" +
                    transport::kind_name(entry.kind) + "'");
    }
  }
  return report;
}

// Runs the protocol and the plaintext oracle side by side and compares.
// The pass bound scales with the quantization step, the matrix dimension,
// and the iteration count.
struct VerifyReport {
  RunReport run;
  std::vector<double> oracle_ranks;
  int oracle_iterations = 0;
  bool oracle_converged = false;
  double max_abs_diff = 0.0;
  double l1_diff = 0.0;
  double bound = 0.0;
  bool pass = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["max_abs_diff"] = max_abs_diff;
    j["l1_diff"] = l1_diff;
    j["bound"] = bound;
    j["pass"] = pass;
    j["protocol"] = run.to_json();
    nlohmann::ordered_json o;
    o["pagerank"] = oracle_ranks;
    o["iterations"] = oracle_iterations;
    o["converged"] = oracle_converged;
    j["oracle"] = std::move(o);
    return j;
  }
};

inline VerifyReport verify_against_oracle(const graph::AdjacencyGraph& g,
                                          const RunOptions& opts,
                                          transport::Transport& transport) {
  VerifyReport report;
  RunResult run = run_protocol(g, opts, transport);
  report.run = run.report;

  const oracle::PageRankState reference =
      oracle::pagerank(g, opts.damping, opts.tolerance, opts.max_iter);
  report.oracle_ranks = reference.ranks;
  report.oracle_iterations = reference.iteration;
  report.oracle_converged = reference.converged(opts.tolerance);

  for (int i = 0; i < g.node_count(); ++i) {
    const double d = std::fabs(run.report.pagerank[i] - reference.ranks[i]);
    report.max_abs_diff = std::max(report.max_abs_diff, d);
    report.l1_diff += d;
  }
  report.bound = 10.0 * g.node_count() *
                 std::pow(static_cast<double>(opts.scale_base),
                          -opts.scale_exp) *
                 run.report.iterations;
  report.pass = report.max_abs_diff <= report.bound;
  return report;
}

}  // namespace cryptarank::protocol
