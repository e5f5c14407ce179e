// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/term.hpp"

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rr::msg {

inline constexpr std::string_view kProtocol = "ruleresponder-1";
inline constexpr std::size_t kMaxEncodedBytes = 1 << 20; // 1 MiB per message

enum class Performative {
    register_agent, // wire name "register"
    ack,
    query,
    answer,
    end_of_answers,
    error,
};

std::string_view to_wire(Performative p);
std::optional<Performative> performative_from_wire(std::string_view name);

/// Agent message envelope. On the wire this is the canonical term
/// `msg(CID,SENDER,RECEIVER,PERF,CONTENT)` followed by one `\n` byte.
///
/// Content shape per performative:
///   query          goal atom or conjunction `and(g1,g2,...)`
///   answer         `bindings([bind("Var",Term),...])`, terms ground
///   error          `err(code, "detail")`
///   register       `agent(name)`
///   ack            constant `none`
///   end_of_answers constant `none`
struct Message {
    std::string cid;
    std::string sender;
    std::string receiver;
    Performative performative;
    Term content;

    friend bool operator==(const Message& a, const Message& b) {
        return a.cid == b.cid && a.sender == b.sender && a.receiver == b.receiver &&
               a.performative == b.performative && a.content == b.content;
    }
};

enum class CodecErrc {
    message_too_large,
    invalid_content_shape,
    unknown_performative,
    parse, // malformed input bytes
};

class CodecError : public std::runtime_error {
public:
    CodecError(CodecErrc code, std::size_t position, std::string reason);

    CodecErrc code() const { return code_; }
    std::size_t position() const { return position_; }
    const std::string& reason() const { return reason_; }

private:
    CodecErrc code_;
    std::size_t position_;
    std::string reason_;
};

/// Canonical bytes for a message, newline terminated. Throws CodecError on
/// invariant violations (oversized, bad content shape, bad envelope field).
std::string encode(const Message& m);

/// Inverse of encode for one complete newline-terminated line. Variables in
/// the content are scoped to this message.
Message decode(std::string_view line);

/// Fresh 128-bit random conversation id, 32 hex characters.
std::string new_cid();

/// Builders for the common shapes.
Message make_query(std::string cid, std::string sender, std::string receiver, Term goal);
Message make_answer(std::string cid, std::string sender, std::string receiver,
                    const std::vector<std::pair<std::string, Term>>& bindings);
Message make_end_of_answers(std::string cid, std::string sender, std::string receiver);
Message make_error(std::string cid, std::string sender, std::string receiver, std::string code,
                   std::string detail);
Message make_register(std::string cid, std::string agent_name);
Message make_ack(std::string cid, std::string receiver);

/// Extracts `bindings([...])` content into name/term pairs in list order.
/// Throws CodecError(invalid_content_shape) when the shape is wrong.
std::vector<std::pair<std::string, Term>> answer_bindings(const Message& m);

/// Extracts `err(code,"detail")` content.
std::pair<std::string, std::string> error_payload(const Message& m);

/// One query/answer exchange tracked by the broker.
struct Conversation {
    std::string cid;
    std::string initiator;
    std::string target;
    std::chrono::steady_clock::time_point deadline;
    bool open = true;
};

} // namespace rr::msg
