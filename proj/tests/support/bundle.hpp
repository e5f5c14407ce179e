// SPDX-License-Identifier: Apache-2.0
//
// Harness for running complete broker + agents topologies in-process or
// over TCP, plus the seeded synthetic bundle and the random query source
// used by the delegation-transparency checks.
#pragma once

#include "rr/agent/agent.hpp"
#include "rr/agent/client.hpp"
#include "rr/bus/broker.hpp"
#include "rr/engine/solver.hpp"

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace rr::testing {

/// Directory holding the shipped bundle (configs, rulebases, datasets).
std::string usecase_dir();

/// The four shipped agent configs, loaded from JSON.
std::vector<agent::AgentConfig> usecase_configs();

struct Topology {
    std::unique_ptr<bus::Broker> broker;
    std::vector<std::unique_ptr<agent::Agent>> agents;
    std::unique_ptr<agent::QueryClient> client;

    agent::QueryResult ask(const std::string& target, const Term& goal,
                           std::chrono::milliseconds timeout = std::chrono::seconds(10),
                           std::optional<std::size_t> max_answers = std::nullopt);

    Topology() = default;
    Topology(Topology&&) = default;
    Topology& operator=(Topology&&) = default;
    ~Topology();
};

/// Canonical, order-independent view of a query result. Errors map to a
/// single `<error:code>` marker so mismatches show up as set differences.
std::set<std::string> answer_keys(const agent::QueryResult& result);

/// Starts broker + agents + one client named "client".
Topology start_topology(const std::vector<agent::AgentConfig>& configs, bool tcp,
                        bus::BrokerConfig broker_cfg = {});

Topology start_usecase_topology(bool tcp);

/// Seeded synthetic dataset: n_authors authors, n_pubs publications over 10
/// fields and 20 locations, plus patents and the kb file. Reuses the
/// shipped rulebases; returns ready-to-start configs.
std::vector<agent::AgentConfig> generate_bundle(std::mt19937& rng, const std::string& dir,
                                                int n_authors, int n_pubs);

struct RandomQuery {
    std::string target;
    Term goal;
};

/// Random query over the exported predicates of the topology, mixing bound
/// and free argument positions.
RandomQuery random_usecase_query(std::mt19937& rng, const std::vector<std::string>& authors,
                                 const std::vector<std::string>& fields,
                                 const std::vector<std::string>& locations);

/// Single-engine merged rulebase over the configs (facts ingested, remote
/// calls unwrapped).
RuleBase merged_of_configs(const std::vector<agent::AgentConfig>& configs);

/// Answer keys of `goal` against the merged rulebase.
std::set<std::string> merged_answer_keys(const RuleBase& merged, const Term& goal);

} // namespace rr::testing
