// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace rr::bus {

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

enum class RecvStatus { got_line, timed_out, closed };

struct RecvResult {
    RecvStatus status = RecvStatus::closed;
    std::string line; // includes the trailing '\n' when status == got_line
};

/// Bidirectional pipe carrying newline-terminated lines. send_line is
/// thread safe; recv_line expects a single reader.
class LineConn {
public:
    virtual ~LineConn() = default;

    /// Sends one complete line ending in '\n'. False when the peer is gone.
    virtual bool send_line(std::string_view line) = 0;

    /// Blocks for the next line, an optional deadline, or close/EOF.
    virtual RecvResult recv_line(const Deadline& deadline = std::nullopt) = 0;

    /// Shuts the connection down; concurrent recv_line calls wake up.
    virtual void close() = 0;

    virtual std::string peer() const = 0;
};

class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// Connected pair of in-process endpoints backed by two line queues.
std::pair<std::unique_ptr<LineConn>, std::unique_ptr<LineConn>> make_inproc_pair();

/// Blocking TCP connect; throws TransportError on failure.
std::unique_ptr<LineConn> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
public:
    /// Binds and listens; port 0 picks an ephemeral port. Throws
    /// TransportError (message contains "address in use" when applicable).
    static std::unique_ptr<TcpListener> bind(const std::string& host, std::uint16_t port);

    virtual ~TcpListener() = default;

    virtual std::uint16_t port() const = 0;

    /// Blocks for the next connection; nullptr once closed.
    virtual std::unique_ptr<LineConn> accept() = 0;

    virtual void close() = 0;
};

/// Splits "host:port"; throws TransportError on malformed input.
std::pair<std::string, std::uint16_t> parse_hostport(const std::string& address);

} // namespace rr::bus
