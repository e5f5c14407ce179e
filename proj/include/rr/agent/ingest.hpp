// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/agent/config.hpp"
#include "rr/term.hpp"

#include <stdexcept>
#include <vector>

namespace rr::agent {

/// A data row could not be turned into a fact; ingestion stops at the
/// first bad row. `row` is 1-based and counts data rows (the csv header
/// is row 0).
class IngestError : public std::runtime_error {
public:
    IngestError(std::size_t row, std::string reason);

    std::size_t row() const { return row_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t row_;
    std::string reason_;
};

/// Loads one adapter's file into facts, in row order. Header/mapping
/// problems throw ConfigError("adapters", "bad_adapter_mapping: ...");
/// per-row data problems throw IngestError.
std::vector<Term> ingest(const DataAdapterSpec& spec);

/// Splits one csv record honoring double-quote quoting ("" escapes a
/// quote). Exposed for tests.
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace rr::agent
