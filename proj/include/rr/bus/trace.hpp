// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/msg/message.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rr::bus {

/// One line of a broker trace file: `<timestamp-us>\t<in|out>\t<raw line>`.
struct TraceRecord {
    std::uint64_t timestamp_us = 0;
    bool inbound = false;
    std::string raw; // full message line including '\n'

    msg::Message decode() const { return msg::decode(raw); }
};

class TraceError : public std::runtime_error {
public:
    TraceError(std::size_t byte_offset, const std::string& reason);

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// Parses a broker trace file; throws TraceError naming the byte offset of
/// the first corrupted record. An empty file yields no records.
std::vector<TraceRecord> read_trace_file(const std::string& path);

} // namespace rr::bus
