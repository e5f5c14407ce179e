// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/engine/substitution.hpp"
#include "rr/rulebase.hpp"
#include "rr/term.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rr::engine {

struct SolveLimits {
    std::size_t max_depth = 5000;
    std::optional<std::size_t> max_answers; // nullopt = unbounded

    static SolveLimits defaults() { return {}; }
};

enum class EngineErrc {
    non_ground_negation,
    builtin_type,
    no_responsible_agent,
};

const char* to_string(EngineErrc code);

/// Hard derivation failure: the answer stream ends and no further answers
/// exist. Soft conditions (depth limit) are reported in SolveResult instead.
class EngineError : public std::runtime_error {
public:
    EngineError(EngineErrc code, std::string detail);

    EngineErrc code() const { return code_; }
    const std::string& detail() const { return detail_; }

private:
    EngineErrc code_;
    std::string detail_;
};

/// A remote ask or delegate failed; `code` carries the remote error code
/// (timeout, unknown_receiver, non_ground_answer, ...).
class RemoteError : public std::runtime_error {
public:
    RemoteError(std::string code, std::string detail);

    const std::string& code() const { return code_; }
    const std::string& detail() const { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

/// Boundary to other agents. ask() blocks the derivation until remote
/// answers arrive or the conversation fails.
class RemoteAsk {
public:
    virtual ~RemoteAsk() = default;

    /// Sends `goal` to the named agent and streams back one ground binding
    /// map per remote answer, keyed by the goal's variable names. Returning
    /// false from on_answer stops consumption early.
    virtual void ask(const std::string& agent, const Term& goal,
                     const std::function<bool(const std::map<std::string, Term>&)>& on_answer) = 0;

    /// Agent responsible for a delegated predicate; nullopt when nobody is.
    virtual std::optional<std::string> responsible_for(const PredId& pred) = 0;
};

/// One solution, restricted to the query's named free variables (names
/// starting with `_` are treated as don't-care and never reported).
struct Answer {
    std::map<std::string, Term> bindings;

    /// Canonical `X=...;Y=...` form; doubles as the dedup key.
    std::string key() const;

    friend bool operator==(const Answer& a, const Answer& b) { return a.key() == b.key(); }
};

struct SolveResult {
    bool depth_limited = false; // some branch was pruned at max_depth
    std::uint64_t steps = 0;    // resolution attempts, for laziness checks
    std::size_t answers = 0;    // distinct answers delivered to the sink
};

/// Receives answers in derivation order; return false to stop enumerating.
using AnswerSink = std::function<bool(const Answer&)>;

/// SLD resolution with left-to-right selection, source clause order and
/// depth-first search. Negated literals must be ground when selected.
/// Structurally identical answers are delivered once. Unknown predicates
/// fail silently.
SolveResult solve(const RuleBase& rb, const std::vector<Literal>& goals,
                  const SolveLimits& limits, RemoteAsk* remote, const AnswerSink& sink);

/// Convenience: collects all answers.
std::vector<Answer> solve_all(const RuleBase& rb, const std::vector<Literal>& goals,
                              const SolveLimits& limits = {}, RemoteAsk* remote = nullptr);

/// Splits a goal term into literals: `and(g1,g2,...)` flattens into its
/// conjuncts, `not(g)` becomes a negated literal, anything else is one
/// positive literal. Throws EngineError(builtin_type) for non-atom goals.
std::vector<Literal> goal_to_literals(const Term& goal);

/// True when the engine evaluates this atom itself instead of resolving it
/// against the rulebase.
bool is_builtin_goal(const Term& atom);

} // namespace rr::engine
