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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cryptarank/errors.hpp"
#include "cryptarank/message.hpp"

namespace cryptarank::transport {

// A reliable, ordered, exactly-once message pipe between the coordinator
// and one party. Both backends move the same length-prefixed JSON frames;
// the in-process backend swaps byte queues where the TCP backend swaps
// socket writes.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  void send(const ProtocolMessage& msg) { send_payload(serialize(msg)); }

  ProtocolMessage receive() { return deserialize(receive_payload()); }

  virtual void send_payload(const std::string& payload) = 0;
  virtual std::string receive_payload() = 0;
  virtual void close() = 0;
};

// Receive calls give up after this long; a silent peer is a failed run,
// not a hung one.
inline constexpr std::chrono::seconds kReceiveTimeout{300};

namespace detail {

struct InprocShared {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::string> to_a;
  std::deque<std::string> to_b;
  bool a_closed = false;
  bool b_closed = false;
};

class InprocEndpoint final : public Endpoint {
 public:
  InprocEndpoint(std::shared_ptr<InprocShared> shared, bool is_a)
      : shared_(std::move(shared)), is_a_(is_a) {}

  ~InprocEndpoint() override { close(); }

  void send_payload(const std::string& payload) override {
    std::lock_guard lock(shared_->mutex);
    if (closed(is_a_) || closed(!is_a_)) {
      throw TransportError("send on a closed in-process endpoint");
    }
    (is_a_ ? shared_->to_b : shared_->to_a).push_back(payload);
    shared_->ready.notify_all();
  }

  std::string receive_payload() override {
    std::unique_lock lock(shared_->mutex);
    auto& inbox = is_a_ ? shared_->to_a : shared_->to_b;
    const bool ok = shared_->ready.wait_for(lock, kReceiveTimeout, [&] {
      return !inbox.empty() || closed(is_a_) || closed(!is_a_);
    });
    if (!ok) {
      throw TransportError("receive timed out on in-process endpoint");
    }
    if (closed(is_a_)) {
      throw TransportError("receive on a closed in-process endpoint");
    }
    // frames queued before a peer close still drain, like TCP
    if (inbox.empty()) {
      throw TransportError("peer closed the in-process endpoint");
    }
    std::string payload = std::move(inbox.front());
    inbox.pop_front();
    return payload;
  }

  void close() override {
    std::lock_guard lock(shared_->mutex);
    (is_a_ ? shared_->a_closed : shared_->b_closed) = true;
    shared_->ready.notify_all();
  }

 private:
  bool closed(bool side_a) const {
    return side_a ? shared_->a_closed : shared_->b_closed;
  }

  std::shared_ptr<InprocShared> shared_;
  bool is_a_;
};

}  // namespace detail

inline std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>>
make_inproc_pair() {
  auto shared = std::make_shared<detail::InprocShared>();
  return {std::make_unique<detail::InprocEndpoint>(shared, true),
          std::make_unique<detail::InprocEndpoint>(shared, false)};
}

namespace detail {

class SocketEndpoint final : public Endpoint {
 public:
  explicit SocketEndpoint(int fd) : fd_(fd) {
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    timeval tv{};
    tv.tv_sec = std::chrono::seconds(kReceiveTimeout).count();
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }

  ~SocketEndpoint() override { close(); }

  SocketEndpoint(const SocketEndpoint&) = delete;
  SocketEndpoint& operator=(const SocketEndpoint&) = delete;

  void send_payload(const std::string& payload) override {
    if (fd_ < 0) throw TransportError("send on a closed socket endpoint");
    const std::string frame = encode_frame(payload);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n =
          ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        throw TransportError(std::string("socket send failed: ") +
                             std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string receive_payload() override {
    if (fd_ < 0) throw TransportError("receive on a closed socket endpoint");
    unsigned char header[4];
    read_exact(header, 4);
    const std::uint32_t len = decode_frame_length(header);
    std::string payload(len, '\0');
    if (len > 0) read_exact(payload.data(), len);
    return payload;
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  void read_exact(void* buf, std::size_t len) {
    std::size_t off = 0;
    while (off < len) {
      const ssize_t n =
          ::recv(fd_, static_cast<char*>(buf) + off, len - off, 0);
      if (n == 0) {
        throw TransportError("peer closed the connection mid-frame");
      }
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) {
          throw TransportError("receive timed out on socket endpoint");
        }
        throw TransportError(std::string("socket receive failed: ") +
                             std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  int fd_;
};

}  // namespace detail

// Runs one party's message loop over its endpoint.
using PartyMain = std::function<void(Endpoint&)>;

// Launches k party loops and hands back the coordinator-side endpoints,
// index = party id. join() must be called after the run; it surfaces any
// failure a party loop raised.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::vector<std::unique_ptr<Endpoint>> launch(int k,
                                                        PartyMain party) = 0;
  virtual void join() = 0;

 protected:
  void run_party(PartyMain& party, Endpoint& ep, int id) {
    try {
      party(ep);
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mutex_);
      failures_.push_back("party " + std::to_string(id) + ": " + e.what());
    }
    ep.close();
  }

  void check_failures() {
    std::lock_guard lock(failure_mutex_);
    if (!failures_.empty()) {
      std::string all;
      for (const auto& f : failures_) {
        if (!all.empty()) all += "; ";
        all += f;
      }
      throw TransportError("party loop failed: " + all);
    }
  }

  std::mutex failure_mutex_;
  std::vector<std::string> failures_;
};

class InprocTransport final : public Transport {
 public:
  ~InprocTransport() override {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }

  std::vector<std::unique_ptr<Endpoint>> launch(int k,
                                                PartyMain party) override {
    std::vector<std::unique_ptr<Endpoint>> coordinator_side;
    coordinator_side.reserve(k);
    for (int i = 0; i < k; ++i) {
      auto pair = make_inproc_pair();
      coordinator_side.push_back(std::move(pair.first));
      threads_.emplace_back(
          [this, party, ep = std::shared_ptr<Endpoint>(std::move(pair.second)),
           i]() mutable { run_party(party, *ep, i); });
    }
    return coordinator_side;
  }

  void join() override {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
    threads_.clear();
    check_failures();
  }

 private:
  std::vector<std::thread> threads_;
};

// Parties listen on loopback; the coordinator dials each party exactly
// once and keeps the connection for the whole run. Any transport failure
// aborts the run; there is no retry logic.
class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(const std::string& host = "127.0.0.1")
      : host_(host) {}

  ~TcpTransport() override {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }

  std::vector<std::unique_ptr<Endpoint>> launch(int k,
                                                PartyMain party) override {
    std::vector<int> ports(k);
    std::vector<int> listeners(k);
    for (int i = 0; i < k; ++i) {
      listeners[i] = open_listener(&ports[i]);
    }
    for (int i = 0; i < k; ++i) {
      const int lst = listeners[i];
      threads_.emplace_back([this, party, lst, i]() mutable {
        const int fd = ::accept(lst, nullptr, nullptr);
        ::close(lst);
        if (fd < 0) {
          std::lock_guard lock(failure_mutex_);
          failures_.push_back("party " + std::to_string(i) +
                              ": accept failed: " + std::strerror(errno));
          return;
        }
        detail::SocketEndpoint ep(fd);
        run_party(party, ep, i);
      });
    }

    std::vector<std::unique_ptr<Endpoint>> coordinator_side;
    coordinator_side.reserve(k);
    for (int i = 0; i < k; ++i) {
      coordinator_side.push_back(dial(ports[i]));
    }
    return coordinator_side;
  }

  void join() override {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
    threads_.clear();
    check_failures();
  }

 private:
  int open_listener(int* port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("cannot create listening socket");
    // accept() honors the receive timeout; a coordinator that never dials
    // must not strand the accept thread
    timeval tv{};
    tv.tv_sec = std::chrono::seconds(kReceiveTimeout).count();
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = 0;  // ephemeral
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw TransportError("invalid transport host: " + host_);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd, 1) != 0) {
      ::close(fd);
      throw TransportError(std::string("cannot listen on ") + host_ + ": " +
                           std::strerror(errno));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    *port = ntohs(addr.sin_port);
    return fd;
  }

  std::unique_ptr<Endpoint> dial(int port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("cannot create socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd);
      throw TransportError("cannot connect to " + host_ + ":" +
                           std::to_string(port) + ": " + std::strerror(errno));
    }
    return std::make_unique<detail::SocketEndpoint>(fd);
  }

  std::string host_;
  std::vector<std::thread> threads_;
};

// Coordinator-side log of every message sent or received, in one global
// order. Party-bound entries are what a semi-honest party gets to see;
// the privacy audit inspects exactly these.
enum class Direction { ToParty, FromParty };

struct TranscriptEntry {
  int seq = 0;
  Direction direction = Direction::ToParty;
  int party_id = 0;
  int round = 0;
  MessageKind kind = MessageKind::Shutdown;
  std::string payload;  // the exact JSON that crossed the wire
};

class Transcript {
 public:
  void record(Direction dir, int party_id, const ProtocolMessage& msg,
              const std::string& payload) {
    entries_.push_back(TranscriptEntry{next_seq_++, dir, party_id, msg.round,
                                       msg.kind, payload});
  }

  const std::vector<TranscriptEntry>& entries() const { return entries_; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : entries_) {
      nlohmann::ordered_json item;
      item["seq"] = e.seq;
      item["direction"] = e.direction == Direction::ToParty ? "to_party"
                                                            : "from_party";
      item["party_id"] = e.party_id;
      item["message"] = nlohmann::ordered_json::parse(e.payload);
      arr.push_back(std::move(item));
    }
    return arr;
  }

  static Transcript from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) {
      throw SerializationError("transcript JSON must be an array");
    }
    Transcript t;
    for (const auto& item : arr) {
      const std::string payload = item.at("message").dump();
      const ProtocolMessage msg = deserialize(payload);
      const Direction dir = item.at("direction").get<std::string>() ==
                                    "to_party"
                                ? Direction::ToParty
                                : Direction::FromParty;
      t.record(dir, item.at("party_id").get<int>(), msg, payload);
    }
    return t;
  }

 private:
  std::vector<TranscriptEntry> entries_;
  int next_seq_ = 0;
};

}  // namespace cryptarank::transport
