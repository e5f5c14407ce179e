// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/bus/transport.hpp"
#include "rr/msg/message.hpp"
#include "rr/term.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rr::agent {

/// Outcome of one query conversation.
struct QueryResult {
    enum class Status { completed, error, timed_out };

    Status status = Status::completed;
    /// Answers in arrival order; each answer is the (name, term) list in
    /// wire order.
    std::vector<std::vector<std::pair<std::string, Term>>> answers;
    std::string error_code;
    std::string error_detail;
};

/// Synchronous requester endpoint: registers a name with the broker and
/// runs one query conversation at a time.
class QueryClient {
public:
    /// Registers with the broker over the given connection; throws
    /// AgentError (from agent.hpp semantics) as std::runtime_error on
    /// handshake failure.
    QueryClient(std::unique_ptr<bus::LineConn> conn, std::string name);
    ~QueryClient();

    /// Sends `goal` to `target` and collects answers until end_of_answers,
    /// an error, the timeout, or max_answers answers.
    QueryResult ask(const std::string& target, const Term& goal,
                    std::chrono::milliseconds timeout,
                    std::optional<std::size_t> max_answers = std::nullopt);

    const std::string& name() const { return name_; }

private:
    std::unique_ptr<bus::LineConn> conn_;
    std::string name_;
};

} // namespace rr::agent
