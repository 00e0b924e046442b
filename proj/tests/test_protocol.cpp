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
#include "cryptarank/protocol.hpp"

#include <cmath>
#include <thread>

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace cryptarank;
using namespace cryptarank::protocol;
using cryptarank::graph::AdjacencyGraph;

namespace {

struct Fixture {
  paillier::KeyPair keys;
  encoding::FixedPointCodec codec;
  Entropy rng;

  explicit Fixture(int key_bits = 64, int base = 10, int exp = 4,
                   std::uint64_t seed = 77)
      : keys(make_keys(key_bits, seed)),
        codec(encoding::FixedPointCodec::create(base, exp, keys.pub.n)),
        rng(seed + 1) {}

  static paillier::KeyPair make_keys(int bits, std::uint64_t seed) {
    Entropy rng(seed);
    return paillier::keygen(bits, rng);
  }

  PartyState party_for(const AdjacencyGraph& g,
                       const graph::PartitionPlan& plan, int party_id) {
    auto slices = graph::encrypt_slices(g, plan, keys.pub, rng);
    return PartyState{party_id, std::move(slices[party_id]), keys.pub, codec};
  }
};

RunOptions small_run_options(int parties, int key_bits = 128, int exp = 6) {
  RunOptions opts;
  opts.party_count = parties;
  opts.key_bits = key_bits;
  opts.scale_exp = exp;
  opts.seed = 5;
  return opts;
}

}  // namespace

TEST_CASE("row scalars quantize rank over out-degree") {
  Fixture fx(64, 10, 6);
  const RoundBroadcast bc{{0.5, 0.25, 0.125}, {2, 0, 5}};
  const auto scalars = quantized_row_scalars(fx.codec, bc);
  CHECK(scalars[0] == 250000);  // 0.5/2 * 1e6
  CHECK(scalars[1] == 0);       // dangling row
  CHECK(scalars[2] == 25000);   // 0.125/5 * 1e6
  CHECK_THROWS_AS(quantized_row_scalars(fx.codec,
                                        RoundBroadcast{{0.5}, {1, 2}}),
                  std::invalid_argument);
}

TEST_CASE("secureIntMatrix scales ciphertext entries by the row factor") {
  Fixture fx(64, 10, 6);
  const auto g = AdjacencyGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
  const auto plan = graph::make_partition(2, 1, 3);
  const auto party = fx.party_for(g, plan, 0);

  const RoundBroadcast bc{{0.5, 0.5}, {1, 1}};
  const auto contrib = secure_int_matrix(party, bc);
  REQUIRE(contrib.column_indices == std::vector<int>{0, 1});

  // entry (i, j) decrypts to matrix[i][j] * round(ranks[i]/deg[i] * 1e6)
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 2; ++i) {
      const mpz_class plain =
          paillier::decrypt(fx.keys.priv, contrib.cipher_columns[c][i]);
      const mpz_class expected = g.at(i, c) ? mpz_class(500000) : mpz_class(0);
      REQUIRE(plain == expected);
    }
  }
}

TEST_CASE("an encrypted zero annihilates any scalar") {
  Fixture fx;
  const auto zero = paillier::encrypt(fx.keys.pub, 0, fx.rng);
  const auto scaled = paillier::scalar_mul(fx.keys.pub, zero, 987654);
  CHECK(paillier::decrypt(fx.keys.priv, scaled) == 0);
}

TEST_CASE("a full contribution equals the plaintext product row by row") {
  Fixture fx(64, 10, 6);
  const auto g = AdjacencyGraph::random(8, 0.4, 21);
  const auto plan = graph::make_partition(8, 3, 21);

  RoundBroadcast bc;
  bc.out_degree = g.out_degree();
  for (int i = 0; i < 8; ++i) bc.ranks.push_back(0.02 + 0.02 * i);
  const auto scalars = quantized_row_scalars(fx.codec, bc);

  for (int p = 0; p < 3; ++p) {
    const auto party = fx.party_for(g, plan, p);
    const auto contrib = secure_int_matrix(party, bc);
    for (std::size_t c = 0; c < contrib.column_indices.size(); ++c) {
      const int j = contrib.column_indices[c];
      for (int i = 0; i < 8; ++i) {
        const mpz_class plain =
            paillier::decrypt(fx.keys.priv, contrib.cipher_columns[c][i]);
        const mpz_class expected = g.at(i, j) ? scalars[i] : mpz_class(0);
        REQUIRE(plain == expected);
      }
    }
  }
}

TEST_CASE("merge reassembles every column exactly once") {
  Fixture fx(64, 10, 4);
  const auto g = AdjacencyGraph::random(6, 0.5, 11);

  SECTION("single party is the identity reassembly") {
    const auto plan = graph::make_partition(6, 1, 2);
    const auto party = fx.party_for(g, plan, 0);
    const RoundBroadcast bc{std::vector<double>(6, 1.0 / 6),
                            g.out_degree()};
    const auto merged = merge_contributions({secure_int_matrix(party, bc)},
                                            plan);
    const auto scalars = quantized_row_scalars(fx.codec, bc);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const mpz_class plain = paillier::decrypt(fx.keys.priv, merged[i][j]);
        REQUIRE(plain == (g.at(i, j) ? scalars[i] : mpz_class(0)));
      }
    }
  }

  SECTION("three parties cover six columns") {
    const auto plan = graph::make_partition(6, 3, 2);
    const RoundBroadcast bc{std::vector<double>(6, 1.0 / 6),
                            g.out_degree()};
    std::vector<EncryptedContribution> contribs;
    for (int p = 0; p < 3; ++p) {
      contribs.push_back(secure_int_matrix(fx.party_for(g, plan, p), bc));
    }
    CHECK_NOTHROW(merge_contributions(contribs, plan));

    SECTION("a missing party is detected") {
      contribs.pop_back();
      CHECK_THROWS_AS(merge_contributions(contribs, plan), ProtocolError);
    }
    SECTION("a duplicated party is detected") {
      contribs[2] = contribs[0];
      CHECK_THROWS_AS(merge_contributions(contribs, plan), ProtocolError);
    }
    SECTION("columns that disagree with the plan are detected") {
      contribs[0].column_indices.back() += 1;
      CHECK_THROWS_AS(merge_contributions(contribs, plan), ProtocolError);
    }
  }
}

TEST_CASE("coordinator rounds keep the two-cycle at its fixed point") {
  Fixture fx(64, 10, 6, 123);
  const auto g = AdjacencyGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
  const auto plan = graph::make_partition(2, 1, 1);
  const auto party = fx.party_for(g, plan, 0);

  CoordinatorState coord{fx.keys, g, plan, fx.codec,
                         oracle::PageRankState{}, 0.85, 1e-6, 100};
  coord.ranks.ranks = {0.5, 0.5};

  for (int round = 0; round < 3; ++round) {
    const RoundBroadcast bc{coord.ranks.ranks, g.out_degree()};
    const auto state =
        coordinator_round(coord, {secure_int_matrix(party, bc)});
    CHECK(std::fabs(state.ranks[0] - 0.5) <= 1e-6);
    CHECK(std::fabs(state.ranks[1] - 0.5) <= 1e-6);
    CHECK(state.iteration == round + 1);
  }
}

TEST_CASE("a failed round leaves the coordinator state untouched") {
  Fixture fx(64, 10, 6, 124);
  const auto g = AdjacencyGraph::random(6, 0.5, 9);
  const auto plan = graph::make_partition(6, 3, 9);
  CoordinatorState coord{fx.keys, g, plan, fx.codec,
                         oracle::PageRankState{}, 0.85, 1e-6, 100};
  coord.ranks.ranks.assign(6, 1.0 / 6);

  const auto before = coord.ranks;
  CHECK_THROWS_AS(coordinator_round(coord, {}), ProtocolError);
  CHECK(coord.ranks.ranks == before.ranks);
  CHECK(coord.ranks.iteration == before.iteration);
}

TEST_CASE("the protocol and the quantized replay agree bit for bit") {
  const auto g = AdjacencyGraph::random(12, 0.3, 31);
  for (const int parties : {1, 2, 3}) {
    auto opts = small_run_options(parties);
    transport::InprocTransport transport;
    const auto result = run_protocol(g, opts, transport);

    const auto codec = encoding::FixedPointCodec::create(
        opts.scale_base, opts.scale_exp, result.keys.pub.n);
    const auto replay = testing::quantized_replay(
        g, codec, opts.damping, opts.tolerance, opts.max_iter);

    REQUIRE(replay.history.size() == result.state_history.size());
    for (std::size_t r = 0; r < replay.history.size(); ++r) {
      REQUIRE(replay.history[r].ranks == result.state_history[r].ranks);
      REQUIRE(replay.history[r].last_delta ==
              result.state_history[r].last_delta);
    }
    CHECK(result.report.converged == replay.converged);

    // and the un-quantized oracle stays within the quantization budget
    const auto reference =
        oracle::pagerank(g, opts.damping, opts.tolerance, opts.max_iter);
    for (int i = 0; i < g.node_count(); ++i) {
      CHECK(std::fabs(result.report.pagerank[i] - reference.ranks[i]) <=
            12 * 1e-6 * result.report.iterations);
    }
  }
}

TEST_CASE("quantization can pin the delta above a too-tight tolerance") {
  // At c=6 the quantization step equals a 1e-6 tolerance, and this graph
  // locks into a limit cycle: the per-row scalars keep flipping between
  // adjacent lattice points, so the L1 delta never drops below d*1e-6
  // multiples. Two more digits of scale restore oracle-like convergence.
  const auto g = AdjacencyGraph::random(20, 0.2, 4);
  REQUIRE(testing::strongly_connected(g));
  REQUIRE(oracle::pagerank(g, 0.85, 1e-6, 100).converged(1e-6));

  const mpz_class roomy("100000000000000000000000000000000000000");
  const auto coarse = encoding::FixedPointCodec::create(10, 6, roomy);
  const auto cycling = testing::quantized_replay(g, coarse, 0.85, 1e-6, 500);
  CHECK_FALSE(cycling.converged);
  CHECK(cycling.final_state.last_delta > 1e-6);

  const auto fine = encoding::FixedPointCodec::create(10, 8, roomy);
  const auto settled = testing::quantized_replay(g, fine, 0.85, 1e-6, 100);
  CHECK(settled.converged);
  CHECK(settled.final_state.iteration <= 40);
}

TEST_CASE("final ranks are identical for any party count") {
  const auto g = AdjacencyGraph::random(10, 0.3, 41);
  std::vector<std::vector<double>> outcomes;
  for (const int parties : {1, 3, 5}) {
    auto opts = small_run_options(parties, 64, 4);
    transport::InprocTransport transport;
    outcomes.push_back(run_protocol(g, opts, transport).report.pagerank);
  }
  CHECK(outcomes[0] == outcomes[1]);
  CHECK(outcomes[0] == outcomes[2]);
}

TEST_CASE("the empty graph settles on the teleport floor") {
  const auto g = AdjacencyGraph::from_edge_list({}, 4);
  auto opts = small_run_options(1, 64, 4);
  transport::InprocTransport transport;
  const auto result = run_protocol(g, opts, transport);

  CHECK(result.report.converged);
  CHECK(result.report.iterations <= 2);
  const double floor = (1.0 - opts.damping) / 4;
  for (const double r : result.state_history.front().ranks) {
    CHECK(r == floor);
  }
  for (const double r : result.report.pagerank) {
    CHECK(r == floor);
  }
}

TEST_CASE("run options are validated before any key is generated") {
  const auto g = AdjacencyGraph::random(6, 0.5, 1);
  transport::InprocTransport transport;

  auto bad = small_run_options(0);
  CHECK_THROWS_AS(run_protocol(g, bad, transport), std::invalid_argument);
  bad = small_run_options(7);  // more parties than columns
  CHECK_THROWS_AS(run_protocol(g, bad, transport), std::invalid_argument);
  bad = small_run_options(2);
  bad.damping = 1.0;
  CHECK_THROWS_AS(run_protocol(g, bad, transport), std::invalid_argument);
  bad = small_run_options(2);
  bad.key_bits = 15;
  CHECK_THROWS_AS(run_protocol(g, bad, transport), std::invalid_argument);
  // codec too wide for the key: rejected before keygen
  bad = small_run_options(2, 16, 6);
  CHECK_THROWS_AS(run_protocol(g, bad, transport), OverflowError);
}

TEST_CASE("a party reports codec overflow instead of wrapping around") {
  // The codec itself is fine at setup, but a broadcast rank far above 1
  // pushes the scaled value past the half-range.
  Fixture fx(32, 10, 4, 125);
  auto pair = transport::make_inproc_pair();
  std::thread party([&] { serve_party(*pair.second); });

  transport::SetupBody setup;
  setup.n = fx.keys.pub.n;
  setup.g = fx.keys.pub.g;
  setup.codec_base = 10;
  setup.codec_exp = 4;
  setup.party_id = 0;
  pair.first->send(transport::ProtocolMessage{
      transport::MessageKind::Setup, 0, std::move(setup)});

  const auto g = AdjacencyGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
  const auto plan = graph::make_partition(2, 1, 1);
  Entropy rng(126);
  auto slices = graph::encrypt_slices(g, plan, fx.keys.pub, rng);
  transport::SliceBody slice;
  slice.columns = slices[0].column_indices;
  for (const auto& row : slices[0].cipher_rows) {
    std::vector<mpz_class> r;
    for (const auto& ct : row) r.push_back(ct.value);
    slice.cipher_rows.push_back(std::move(r));
  }
  pair.first->send(transport::ProtocolMessage{
      transport::MessageKind::SliceDelivery, 0, std::move(slice)});

  transport::BroadcastBody bc;
  bc.ranks = {1e9, 1e9};  // scaled value blows past n/2 at a 32-bit key
  bc.out_degree = {1, 1};
  pair.first->send(transport::ProtocolMessage{
      transport::MessageKind::RoundBroadcast, 1, std::move(bc)});

  const auto reply = pair.first->receive();
  CHECK(reply.kind == transport::MessageKind::Error);
  CHECK(reply.as<transport::TextBody>().detail.rfind("overflow: ", 0) == 0);
  party.join();
}

TEST_CASE("inproc and tcp backends produce identical plaintext results") {
  const auto g = AdjacencyGraph::random(8, 0.35, 77);
  const auto opts = small_run_options(3, 64, 4);

  transport::InprocTransport inproc;
  const auto a = run_protocol(g, opts, inproc);
  transport::TcpTransport tcp;
  const auto b = run_protocol(g, opts, tcp);

  CHECK(a.report.pagerank == b.report.pagerank);
  CHECK(a.report.iterations == b.report.iterations);
  CHECK(a.report.converged == b.report.converged);
}

TEST_CASE("replaying a transcript reproduces the recorded run") {
  const auto g = AdjacencyGraph::random(9, 0.35, 78);
  const auto opts = small_run_options(3, 64, 4);
  transport::InprocTransport transport;
  const auto result = run_protocol(g, opts, transport);

  const auto states = replay_transcript(result.transcript, result.keys, g,
                                        result.plan, opts);
  REQUIRE(states.size() == result.state_history.size());
  for (std::size_t r = 0; r < states.size(); ++r) {
    REQUIRE(states[r].ranks == result.state_history[r].ranks);
    REQUIRE(states[r].last_delta == result.state_history[r].last_delta);
  }

  // serialized transcripts replay just as well
  const auto reloaded = transport::Transcript::from_json(
      result.transcript.to_json());
  const auto again =
      replay_transcript(reloaded, result.keys, g, result.plan, opts);
  REQUIRE(again.size() == states.size());
  CHECK(again.back().ranks == states.back().ranks);
}

TEST_CASE("the transcript audit clears an honest run and catches leaks") {
  const auto g = AdjacencyGraph::random(8, 0.35, 79);
  const auto opts = small_run_options(2, 64, 4);
  transport::InprocTransport transport;
  const auto result = run_protocol(g, opts, transport);

  const auto clean = audit_transcript(result.transcript, result.keys);
  CHECK(clean.ok);
  CHECK(clean.violations.empty());

  // leaking the private key is flagged
  transport::Transcript tainted;
  transport::ProtocolMessage msg{
      transport::MessageKind::Shutdown, 1,
      transport::TextBody{to_hex(result.keys.priv.lambda)}};
  tainted.record(transport::Direction::ToParty, 0, msg,
                 transport::serialize(msg));
  CHECK_FALSE(audit_transcript(tainted, result.keys).ok);

  // a plaintext 0/1 slice entry is flagged
  transport::SliceBody raw;
  raw.columns = {0};
  raw.cipher_rows = {{mpz_class(1)}};
  transport::ProtocolMessage leak{transport::MessageKind::SliceDelivery, 0,
                                  std::move(raw)};
  transport::Transcript tainted2;
  tainted2.record(transport::Direction::ToParty, 0, leak,
                  transport::serialize(leak));
  CHECK_FALSE(audit_transcript(tainted2, result.keys).ok);
}

TEST_CASE("verify compares the protocol against the oracle") {
  const auto g = AdjacencyGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
  auto opts = small_run_options(1, 64, 4);
  transport::InprocTransport transport;
  const auto report = verify_against_oracle(g, opts, transport);
  CHECK(report.pass);
  CHECK(report.max_abs_diff <= 1e-4);  // one-term sums: within one step
  CHECK(report.bound ==
        10.0 * 2 * std::pow(10.0, -4) * report.run.iterations);
}
