// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/agent/config.hpp"
#include "rr/bus/transport.hpp"
#include "rr/engine/solver.hpp"
#include "rr/msg/message.hpp"
#include "rr/rulebase.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace rr::agent {

using ConnFactory = std::function<std::unique_ptr<bus::LineConn>()>;

/// Could not reach or register with the broker.
class AgentError : public std::runtime_error {
public:
    explicit AgentError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the rulebase file, ingests every adapter (facts appended in
/// adapter then row order), runs the stratification check and enforces the
/// config invariants. Throws ConfigError naming the offending field.
RuleBase build_rulebase(const AgentConfig& cfg);

/// A running rule agent: registered with the broker, answering queries
/// against its local rulebase and delegating via ask/delegate. Knowledge
/// is immutable after start; each conversation runs on its own thread.
class Agent {
public:
    /// Loads and validates the config, connects through `connect`,
    /// registers under cfg.name and starts the message loop.
    static std::unique_ptr<Agent> start(AgentConfig cfg, const ConnFactory& connect);

    ~Agent();

    void stop();

    const AgentConfig& config() const { return cfg_; }
    const RuleBase& rulebase() const { return rb_; }

    bool exports(const PredId& pred) const;

    /// Responsibility lookup for delegated goals (organizational agents).
    std::optional<std::string> responsible_agent(const PredId& pred) const;

    /// Opens a sub-conversation asking `target` to solve `goal`; streams
    /// each remote answer as ground bindings over the goal's named
    /// variables. Throws engine::RemoteError on error/timeout. Public for
    /// tests; the engine reaches it through its remote handle.
    void perform_ask(const std::string& target, const Term& goal,
                     bus::Clock::time_point deadline,
                     const std::function<bool(const std::map<std::string, Term>&)>& on_answer);

    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

private:
    Agent(AgentConfig cfg, RuleBase rb);

    void handle_query(const msg::Message& m);

    struct Impl;
    AgentConfig cfg_;
    RuleBase rb_;
    std::unique_ptr<Impl> impl_;
};

} // namespace rr::agent
