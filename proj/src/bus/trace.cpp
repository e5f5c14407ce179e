// SPDX-License-Identifier: Apache-2.0
#include "rr/bus/trace.hpp"

#include <fstream>
#include <sstream>

namespace rr::bus {

TraceError::TraceError(std::size_t byte_offset, const std::string& reason)
    : std::runtime_error("corrupted trace record at byte " + std::to_string(byte_offset) + ": " +
                         reason),
      byte_offset_(byte_offset) {}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        throw TraceError(0, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string data = buffer.str();

    std::vector<TraceRecord> records;
    std::size_t pos = 0;
    while (pos < data.size()) {
        const std::size_t record_start = pos;
        const std::size_t nl = data.find('\n', pos);
        if (nl == std::string::npos)
            throw TraceError(record_start, "record without trailing newline");
        const std::size_t tab1 = data.find('\t', pos);
        if (tab1 == std::string::npos || tab1 > nl)
            throw TraceError(record_start, "missing timestamp field");
        const std::size_t tab2 = data.find('\t', tab1 + 1);
        if (tab2 == std::string::npos || tab2 > nl)
            throw TraceError(record_start, "missing direction field");

        TraceRecord rec;
        const std::string ts = data.substr(pos, tab1 - pos);
        if (ts.empty())
            throw TraceError(record_start, "empty timestamp");
        for (char c : ts) {
            if (c < '0' || c > '9')
                throw TraceError(record_start, "non-decimal timestamp");
            rec.timestamp_us = rec.timestamp_us * 10 + static_cast<std::uint64_t>(c - '0');
        }
        const std::string dir = data.substr(tab1 + 1, tab2 - tab1 - 1);
        if (dir == "in")
            rec.inbound = true;
        else if (dir == "out")
            rec.inbound = false;
        else
            throw TraceError(record_start, "direction must be in or out");
        rec.raw = data.substr(tab2 + 1, nl - tab2); // keeps the '\n'
        try {
            (void)msg::decode(rec.raw);
        } catch (const msg::CodecError& e) {
            throw TraceError(record_start, "undecodable message: " + e.reason());
        }
        records.push_back(std::move(rec));
        pos = nl + 1;
    }
    return records;
}

} // namespace rr::bus
