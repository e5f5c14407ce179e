// SPDX-License-Identifier: Apache-2.0
#include "rr/agent/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace rr::agent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& detail) {
    throw ConfigError(field, detail);
}

bool valid_lower_name(const std::string& s) {
    if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z'))
        return false;
    for (char c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_'))
            return false;
    return true;
}

PredId parse_pred_indicator(const std::string& field, const std::string& text) {
    auto slash = text.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= text.size())
        bad(field, "expected predicate/arity, got '" + text + "'");
    PredId id;
    id.name = text.substr(0, slash);
    if (!valid_lower_name(id.name))
        bad(field, "bad predicate name '" + id.name + "'");
    for (char c : text.substr(slash + 1)) {
        if (c < '0' || c > '9')
            bad(field, "bad arity in '" + text + "'");
        id.arity = id.arity * 10 + static_cast<std::size_t>(c - '0');
    }
    return id;
}

std::string resolve(const fs::path& base_dir, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute())
        return path.string();
    return (base_dir / path).string();
}

std::vector<ResponsibilityAssignment> parse_responsibility(const std::string& field,
                                                           const json& arr) {
    if (!arr.is_array())
        bad(field, "must be an array");
    std::vector<ResponsibilityAssignment> out;
    std::set<std::pair<std::string, std::size_t>> seen;
    for (const json& item : arr) {
        if (!item.is_object() || !item.contains("predicate") || !item.contains("arity") ||
            !item.contains("agent"))
            bad(field, "each entry needs predicate, arity and agent");
        ResponsibilityAssignment r;
        r.predicate = item.at("predicate").get<std::string>();
        r.arity = item.at("arity").get<std::size_t>();
        r.agent = item.at("agent").get<std::string>();
        if (!valid_lower_name(r.predicate) || !valid_lower_name(r.agent))
            bad(field, "bad name in assignment for '" + r.predicate + "'");
        if (!seen.insert({r.predicate, r.arity}).second)
            bad(field, "duplicate assignment for " + r.pred().to_string());
        out.push_back(std::move(r));
    }
    return out;
}

DataAdapterSpec parse_adapter(const fs::path& base_dir, const json& a) {
    const std::string field = "adapters";
    if (!a.is_object())
        bad(field, "each adapter must be an object");
    DataAdapterSpec spec;
    const std::string kind = a.value("kind", "");
    if (kind == "csv")
        spec.kind = DataAdapterSpec::Kind::csv;
    else if (kind == "json-facts")
        spec.kind = DataAdapterSpec::Kind::json_facts;
    else
        bad(field, "kind must be csv or json-facts, got '" + kind + "'");
    if (!a.contains("path") || !a.at("path").is_string())
        bad(field, "adapter needs a path");
    spec.path = resolve(base_dir, a.at("path").get<std::string>());
    if (!a.contains("predicate") || !valid_lower_name(a.value("predicate", "")))
        bad(field, "adapter needs a valid predicate name");
    spec.predicate = a.at("predicate").get<std::string>();
    if (!a.contains("columns") || !a.at("columns").is_array() || a.at("columns").empty())
        bad(field, "adapter needs a non-empty columns array");
    for (const json& c : a.at("columns"))
        spec.columns.push_back(c.get<std::string>());
    for (const json& c : a.value("integer_columns", json::array()))
        spec.integer_columns.push_back(c.get<std::string>());
    for (const std::string& ic : spec.integer_columns) {
        bool mapped = false;
        for (const std::string& c : spec.columns)
            mapped = mapped || c == ic;
        if (!mapped)
            bad(field, "integer column '" + ic + "' is not in columns");
    }
    return spec;
}

} // namespace

ConfigError::ConfigError(std::string field, std::string detail)
    : std::runtime_error("config error in " + field + ": " + detail),
      field_(std::move(field)), detail_(std::move(detail)) {}

namespace {

AgentConfig load_agent_config_impl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        bad("config", "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        bad("config", "JSON parse error at byte " + std::to_string(e.byte) + " in " + path);
    }
    if (!doc.is_object())
        bad("config", "top level must be an object");

    const fs::path base_dir = fs::path(path).parent_path();
    AgentConfig cfg;

    if (!doc.contains("name") || !valid_lower_name(doc.value("name", "")))
        bad("name", "agent name must match constant-symbol syntax");
    cfg.name = doc.at("name").get<std::string>();

    const std::string role = doc.value("role", "");
    if (role == "organizational")
        cfg.role = AgentRole::organizational;
    else if (role == "source")
        cfg.role = AgentRole::source;
    else
        bad("role", "must be organizational or source, got '" + role + "'");

    if (!doc.contains("rulebase") || !doc.at("rulebase").is_string())
        bad("rulebase_path", "missing rulebase file");
    cfg.rulebase_path = resolve(base_dir, doc.at("rulebase").get<std::string>());

    if (!doc.contains("public_interface") || !doc.at("public_interface").is_array())
        bad("public_interface", "must be an array of predicate/arity strings");
    for (const json& p : doc.at("public_interface"))
        cfg.public_interface.push_back(
            parse_pred_indicator("public_interface", p.get<std::string>()));

    const bool has_inline = doc.contains("responsibility");
    const bool has_file = doc.contains("responsibility_file");
    if (has_inline && has_file)
        bad("responsibility", "give either responsibility or responsibility_file, not both");
    if (has_inline) {
        cfg.responsibility = parse_responsibility("responsibility", doc.at("responsibility"));
    } else if (has_file) {
        const std::string rpath = resolve(base_dir, doc.at("responsibility_file").get<std::string>());
        std::ifstream rin(rpath, std::ios::binary);
        if (!rin.is_open())
            bad("responsibility_file", "cannot open " + rpath);
        json rdoc;
        try {
            rdoc = json::parse(rin);
        } catch (const json::parse_error& e) {
            bad("responsibility_file",
                "JSON parse error at byte " + std::to_string(e.byte) + " in " + rpath);
        }
        cfg.responsibility = parse_responsibility("responsibility_file", rdoc);
    }

    for (const json& a : doc.value("adapters", json::array()))
        cfg.adapters.push_back(parse_adapter(base_dir, a));

    cfg.broker_address = doc.value("broker", "");

    const std::int64_t timeout = doc.value("query_timeout_ms", std::int64_t{5000});
    if (timeout < 1)
        bad("query_timeout_ms", "must be at least 1");
    cfg.query_timeout = std::chrono::milliseconds(timeout);

    if (cfg.role == AgentRole::source && !cfg.responsibility.empty())
        bad("responsibility", "only organizational agents delegate");
    if (cfg.role == AgentRole::organizational && !cfg.adapters.empty())
        bad("adapters", "only source agents take data adapters");

    return cfg;
}

} // namespace

AgentConfig load_agent_config(const std::string& path) {
    try {
        return load_agent_config_impl(path);
    } catch (const json::exception& e) {
        // Wrong JSON types surface here (e.g. a string where a number goes).
        throw ConfigError("config", std::string(e.what()) + " in " + path);
    }
}

} // namespace rr::agent
