// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/bus/transport.hpp"
#include "rr/msg/message.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rr::bus {

struct BrokerConfig {
    /// TCP listen address "host:port"; nullopt runs in-process only.
    std::optional<std::string> listen_address;
    std::chrono::milliseconds conversation_timeout{5000};
    std::size_t max_conversations = 1024;
    /// When set, every message in and out is appended to this file as
    /// `<timestamp-us>\t<in|out>\t<raw line>`.
    std::optional<std::string> trace_path;
    /// Log registrations and replacements to stderr.
    bool log_registrations = false;
};

class BrokerError : public std::runtime_error {
public:
    explicit BrokerError(const std::string& what) : std::runtime_error(what) {}
};

/// Star-topology router. Every endpoint connects, registers a name, and
/// exchanges messages addressed by name. Query conversations are tracked
/// and expired; message bytes pass through unmodified.
class Broker {
public:
    /// Binds (when configured), spawns the acceptor and the conversation
    /// sweeper. Throws BrokerError on startup failure (e.g. address in use,
    /// timeout < 1ms).
    static std::unique_ptr<Broker> start(const BrokerConfig& cfg);

    ~Broker();

    void stop();

    /// Port of the TCP listener; 0 when TCP is not enabled.
    std::uint16_t tcp_port() const;

    /// Client side of a fresh in-process connection to this broker.
    std::unique_ptr<LineConn> connect_inproc();

    /// Closes every open conversation whose deadline has passed and sends
    /// error(timeout, cid) to its initiator. Returns the expired cids.
    /// The internal sweeper calls this continuously; exposed for tests.
    std::vector<std::string> expire_conversations(Clock::time_point now);

    bool is_registered(const std::string& name) const;
    std::size_t open_conversations() const;

    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

private:
    Broker() = default;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace rr::bus
