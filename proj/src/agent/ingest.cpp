// SPDX-License-Identifier: Apache-2.0
#include "rr/agent/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rr::agent {

using nlohmann::json;

IngestError::IngestError(std::size_t row, std::string reason)
    : std::runtime_error("ingest error at row " + std::to_string(row) + ": " + reason),
      row_(row), reason_(std::move(reason)) {}

namespace {

[[noreturn]] void mapping_error(const std::string& detail) {
    throw ConfigError("adapters", "bad_adapter_mapping: " + detail);
}

bool is_integer_column(const DataAdapterSpec& spec, const std::string& column) {
    return std::find(spec.integer_columns.begin(), spec.integer_columns.end(), column) !=
           spec.integer_columns.end();
}

Term int_term(const std::string& text, std::size_t row, const std::string& column) {
    if (text.empty())
        throw IngestError(row, "empty integer in column " + column);
    std::size_t i = text[0] == '-' ? 1 : 0;
    if (i == text.size())
        throw IngestError(row, "bad integer '" + text + "' in column " + column);
    std::int64_t value = 0;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9')
            throw IngestError(row, "bad integer '" + text + "' in column " + column);
        if (__builtin_mul_overflow(value, std::int64_t{10}, &value) ||
            __builtin_add_overflow(value, std::int64_t{c - '0'}, &value))
            throw IngestError(row, "integer out of range in column " + column);
    }
    return Term::integer(text[0] == '-' ? -value : value);
}

std::vector<Term> ingest_csv(const DataAdapterSpec& spec) {
    std::ifstream in(spec.path, std::ios::binary);
    if (!in.is_open())
        mapping_error("cannot open " + spec.path);
    std::string line;
    if (!std::getline(in, line))
        mapping_error("missing header row in " + spec.path);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    std::vector<std::size_t> indices;
    for (const std::string& col : spec.columns) {
        auto it = std::find(header.begin(), header.end(), col);
        if (it == header.end())
            mapping_error("column '" + col + "' not in header of " + spec.path);
        indices.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    std::vector<Term> facts;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> fields = split_csv_line(line);
        std::vector<Term> args;
        args.reserve(spec.columns.size());
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            if (indices[c] >= fields.size())
                throw IngestError(row, "missing_field: column " + spec.columns[c]);
            const std::string& value = fields[indices[c]];
            if (is_integer_column(spec, spec.columns[c]))
                args.push_back(int_term(value, row, spec.columns[c]));
            else
                args.push_back(Term::str(value));
        }
        facts.push_back(Term::compound(spec.predicate, std::move(args)));
    }
    return facts;
}

std::vector<Term> ingest_json(const DataAdapterSpec& spec) {
    std::ifstream in(spec.path, std::ios::binary);
    if (!in.is_open())
        mapping_error("cannot open " + spec.path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        mapping_error("JSON parse error at byte " + std::to_string(e.byte) + " in " + spec.path);
    }
    if (!doc.is_array())
        mapping_error("top level of " + spec.path + " must be an array of objects");

    std::vector<Term> facts;
    std::size_t row = 0;
    for (const json& obj : doc) {
        ++row;
        if (!obj.is_object())
            throw IngestError(row, "entry is not an object");
        std::vector<Term> args;
        for (const std::string& col : spec.columns) {
            if (!obj.contains(col))
                throw IngestError(row, "missing_field: key " + col);
            const json& v = obj.at(col);
            if (is_integer_column(spec, col)) {
                if (v.is_number_integer())
                    args.push_back(Term::integer(v.get<std::int64_t>()));
                else if (v.is_string())
                    args.push_back(int_term(v.get<std::string>(), row, col));
                else
                    throw IngestError(row, "key " + col + " is not an integer");
            } else if (v.is_string()) {
                args.push_back(Term::str(v.get<std::string>()));
            } else if (v.is_number_integer()) {
                args.push_back(Term::str(v.dump()));
            } else {
                throw IngestError(row, "key " + col + " has unsupported type");
            }
        }
        facts.push_back(Term::compound(spec.predicate, std::move(args)));
    }
    return facts;
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::vector<Term> ingest(const DataAdapterSpec& spec) {
    return spec.kind == DataAdapterSpec::Kind::csv ? ingest_csv(spec) : ingest_json(spec);
}

} // namespace rr::agent
