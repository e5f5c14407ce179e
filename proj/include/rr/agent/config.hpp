// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/term.hpp"

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

namespace rr::agent {

/// Maps a delegated predicate to the agent answering it. At most one agent
/// is responsible per (predicate, arity).
struct ResponsibilityAssignment {
    std::string predicate;
    std::size_t arity = 0;
    std::string agent;

    PredId pred() const { return {predicate, arity}; }
};

/// How a local data file turns into facts. `columns` gives the argument
/// order; names must exist in the csv header (or json object keys). Columns
/// listed in `integer_columns` become integers, everything else strings.
struct DataAdapterSpec {
    enum class Kind { csv, json_facts };

    Kind kind = Kind::csv;
    std::string path;
    std::string predicate;
    std::vector<std::string> columns;
    std::vector<std::string> integer_columns;
};

enum class AgentRole { organizational, source };

struct AgentConfig {
    std::string name;
    AgentRole role = AgentRole::source;
    std::string rulebase_path;
    std::vector<PredId> public_interface;
    std::vector<ResponsibilityAssignment> responsibility; // organizational only
    std::vector<DataAdapterSpec> adapters;                // source only
    std::string broker_address; // host:port; empty when the caller wires a transport
    std::chrono::milliseconds query_timeout{5000};
};

/// Configuration rejected; `field` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::string detail);

    const std::string& field() const { return field_; }
    const std::string& detail() const { return detail_; }

private:
    std::string field_;
    std::string detail_;
};

/// Loads a JSON config file. Relative paths inside (rulebase, adapters,
/// responsibility_file) are resolved against the config file's directory.
/// Throws ConfigError; JSON parse failures report the byte position.
AgentConfig load_agent_config(const std::string& path);

} // namespace rr::agent
