// SPDX-License-Identifier: Apache-2.0
#include "rr/msg/message.hpp"

#include "rr/parser.hpp"

#include <mutex>
#include <random>

namespace rr::msg {

namespace {

bool valid_agent_name(const std::string& s) {
    if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z'))
        return false;
    for (char c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_'))
            return false;
    return true;
}

bool valid_cid(const std::string& cid) {
    if (cid.empty() || cid.size() > 128)
        return false;
    return cid.find('\n') == std::string::npos;
}

[[noreturn]] void shape_error(const std::string& reason) {
    throw CodecError(CodecErrc::invalid_content_shape, 0, reason);
}

bool goal_shaped(const Term& t) {
    if (!t.is_atom())
        return false;
    if (t.is_compound() && t.functor() == "and") {
        for (const Term& g : t.args())
            if (!goal_shaped(g))
                return false;
    }
    return true;
}

void check_content_shape(Performative p, const Term& content) {
    switch (p) {
    case Performative::query:
        if (!goal_shaped(content))
            shape_error("query content must be a goal atom or and(...) conjunction");
        return;
    case Performative::answer: {
        if (!content.is_compound() || content.functor() != "bindings" || content.arity() != 1 ||
            !content.args()[0].is_list() || content.args()[0].list_tail())
            shape_error("answer content must be bindings([...])");
        for (const Term& b : content.args()[0].items()) {
            if (!b.is_compound() || b.functor() != "bind" || b.arity() != 2)
                shape_error("answer binding must be bind(Name,Term)");
            if (!b.args()[0].is_str() || b.args()[0].str_value().empty())
                shape_error("binding name must be a non-empty string");
            if (!b.args()[1].is_ground())
                shape_error("binding term must be ground");
        }
        return;
    }
    case Performative::error:
        if (!content.is_compound() || content.functor() != "err" || content.arity() != 2 ||
            !content.args()[0].is_constant() || !content.args()[1].is_str())
            shape_error("error content must be err(code,\"detail\")");
        return;
    case Performative::register_agent:
        if (!content.is_compound() || content.functor() != "agent" || content.arity() != 1 ||
            !content.args()[0].is_constant())
            shape_error("register content must be agent(name)");
        return;
    case Performative::ack:
    case Performative::end_of_answers:
        if (!content.is_constant() || content.symbol() != "none")
            shape_error("content must be the constant none");
        return;
    }
}

} // namespace

std::string_view to_wire(Performative p) {
    switch (p) {
    case Performative::register_agent: return "register";
    case Performative::ack: return "ack";
    case Performative::query: return "query";
    case Performative::answer: return "answer";
    case Performative::end_of_answers: return "end_of_answers";
    case Performative::error: return "error";
    }
    return "?";
}

std::optional<Performative> performative_from_wire(std::string_view name) {
    if (name == "register") return Performative::register_agent;
    if (name == "ack") return Performative::ack;
    if (name == "query") return Performative::query;
    if (name == "answer") return Performative::answer;
    if (name == "end_of_answers") return Performative::end_of_answers;
    if (name == "error") return Performative::error;
    return std::nullopt;
}

CodecError::CodecError(CodecErrc code, std::size_t position, std::string reason)
    : std::runtime_error("codec error at byte " + std::to_string(position) + ": " + reason),
      code_(code), position_(position), reason_(std::move(reason)) {}

std::string encode(const Message& m) {
    if (!valid_cid(m.cid))
        shape_error("cid must be non-empty, at most 128 bytes, without newlines");
    if (!valid_agent_name(m.sender))
        shape_error("sender is not a valid agent name: " + m.sender);
    if (!valid_agent_name(m.receiver))
        shape_error("receiver is not a valid agent name: " + m.receiver);
    check_content_shape(m.performative, m.content);

    const Term envelope =
        Term::compound("msg", {Term::str(m.cid), Term::constant(m.sender),
                               Term::constant(m.receiver),
                               Term::constant(std::string(to_wire(m.performative))), m.content});
    std::string out;
    envelope.serialize(out);
    out.push_back('\n');
    if (out.size() > kMaxEncodedBytes)
        throw CodecError(CodecErrc::message_too_large, 0,
                         "encoded message is " + std::to_string(out.size()) + " bytes");
    return out;
}

Message decode(std::string_view line) {
    if (line.empty() || line.back() != '\n')
        throw CodecError(CodecErrc::parse, line.size(), "missing trailing newline");
    std::string_view body = line.substr(0, line.size() - 1);
    if (body.find('\n') != std::string_view::npos)
        throw CodecError(CodecErrc::parse, body.find('\n'), "embedded newline");
    if (line.size() > kMaxEncodedBytes)
        throw CodecError(CodecErrc::message_too_large, 0, "line exceeds 1 MiB");

    Term envelope = [&] {
        try {
            return parse_term(body);
        } catch (const SyntaxError& e) {
            throw CodecError(CodecErrc::parse, static_cast<std::size_t>(e.column()),
                             "expected " + e.expected());
        }
    }();

    if (!envelope.is_compound() || envelope.functor() != "msg" || envelope.arity() != 5)
        shape_error("envelope must be msg/5");
    const Term& cid = envelope.args()[0];
    const Term& sender = envelope.args()[1];
    const Term& receiver = envelope.args()[2];
    const Term& perf = envelope.args()[3];
    if (!cid.is_str() || !valid_cid(cid.str_value()))
        shape_error("envelope cid must be a short quoted string");
    if (!sender.is_constant() || !receiver.is_constant())
        shape_error("envelope sender/receiver must be agent names");
    if (!perf.is_constant())
        shape_error("envelope performative must be a constant");
    std::optional<Performative> p = performative_from_wire(perf.symbol());
    if (!p)
        throw CodecError(CodecErrc::unknown_performative, 0,
                         "unknown performative " + perf.symbol());
    check_content_shape(*p, envelope.args()[4]);
    return Message{cid.str_value(), sender.symbol(), receiver.symbol(), *p, envelope.args()[4]};
}

std::string new_cid() {
    static std::mutex mu;
    static std::mt19937_64 rng = [] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(),
                          static_cast<unsigned>(
                              std::chrono::steady_clock::now().time_since_epoch().count())};
        return std::mt19937_64(seq);
    }();
    std::uint64_t hi, lo;
    {
        std::lock_guard<std::mutex> lock(mu);
        hi = rng();
        lo = rng();
    }
    static const char* hex = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 0; i < 16; ++i)
        out[15 - i] = hex[(hi >> (i * 4)) & 0xf];
    for (int i = 0; i < 16; ++i)
        out[31 - i] = hex[(lo >> (i * 4)) & 0xf];
    return out;
}

Message make_query(std::string cid, std::string sender, std::string receiver, Term goal) {
    return {std::move(cid), std::move(sender), std::move(receiver), Performative::query,
            std::move(goal)};
}

Message make_answer(std::string cid, std::string sender, std::string receiver,
                    const std::vector<std::pair<std::string, Term>>& bindings) {
    std::vector<Term> binds;
    binds.reserve(bindings.size());
    for (const auto& [name, term] : bindings)
        binds.push_back(Term::compound("bind", {Term::str(name), term}));
    return {std::move(cid), std::move(sender), std::move(receiver), Performative::answer,
            Term::compound("bindings", {Term::list(std::move(binds))})};
}

Message make_end_of_answers(std::string cid, std::string sender, std::string receiver) {
    return {std::move(cid), std::move(sender), std::move(receiver),
            Performative::end_of_answers, Term::constant("none")};
}

Message make_error(std::string cid, std::string sender, std::string receiver, std::string code,
                   std::string detail) {
    return {std::move(cid), std::move(sender), std::move(receiver), Performative::error,
            Term::compound("err", {Term::constant(std::move(code)),
                                   Term::str(std::move(detail))})};
}

Message make_register(std::string cid, std::string agent_name) {
    Term content = Term::compound("agent", {Term::constant(agent_name)});
    return {std::move(cid), agent_name, "broker", Performative::register_agent,
            std::move(content)};
}

Message make_ack(std::string cid, std::string receiver) {
    return {std::move(cid), "broker", std::move(receiver), Performative::ack,
            Term::constant("none")};
}

std::vector<std::pair<std::string, Term>> answer_bindings(const Message& m) {
    if (m.performative != Performative::answer)
        shape_error("not an answer message");
    check_content_shape(Performative::answer, m.content);
    std::vector<std::pair<std::string, Term>> out;
    for (const Term& b : m.content.args()[0].items())
        out.emplace_back(b.args()[0].str_value(), b.args()[1]);
    return out;
}

std::pair<std::string, std::string> error_payload(const Message& m) {
    if (m.performative != Performative::error)
        shape_error("not an error message");
    check_content_shape(Performative::error, m.content);
    return {m.content.args()[0].symbol(), m.content.args()[1].str_value()};
}

} // namespace rr::msg
