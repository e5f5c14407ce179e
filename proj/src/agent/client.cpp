// SPDX-License-Identifier: Apache-2.0
#include "rr/agent/client.hpp"

#include "rr/agent/agent.hpp"

namespace rr::agent {

using bus::Clock;
using bus::RecvStatus;

QueryClient::QueryClient(std::unique_ptr<bus::LineConn> conn, std::string name)
    : conn_(std::move(conn)), name_(std::move(name)) {
    const std::string cid = msg::new_cid();
    if (!conn_->send_line(msg::encode(msg::make_register(cid, name_))))
        throw AgentError("broker connection closed during registration");
    const auto deadline = Clock::now() + std::chrono::seconds(5);
    while (true) {
        bus::RecvResult r = conn_->recv_line(deadline);
        if (r.status == RecvStatus::timed_out)
            throw AgentError("broker did not acknowledge registration in time");
        if (r.status == RecvStatus::closed)
            throw AgentError("broker closed the connection during registration");
        msg::Message m = msg::decode(r.line);
        if (m.performative == msg::Performative::ack && m.cid == cid)
            return;
        if (m.performative == msg::Performative::error) {
            auto [code, detail] = msg::error_payload(m);
            throw AgentError("registration rejected: " + code + " (" + detail + ")");
        }
    }
}

QueryClient::~QueryClient() {
    if (conn_)
        conn_->close();
}

QueryResult QueryClient::ask(const std::string& target, const Term& goal,
                             std::chrono::milliseconds timeout,
                             std::optional<std::size_t> max_answers) {
    QueryResult result;
    const std::string cid = msg::new_cid();
    if (!conn_->send_line(msg::encode(msg::make_query(cid, name_, target, goal)))) {
        result.status = QueryResult::Status::error;
        result.error_code = "connection_closed";
        return result;
    }
    if (max_answers && *max_answers == 0)
        return result;

    const auto deadline = Clock::now() + timeout;
    while (true) {
        bus::RecvResult r = conn_->recv_line(deadline);
        if (r.status == RecvStatus::timed_out) {
            result.status = QueryResult::Status::timed_out;
            return result;
        }
        if (r.status == RecvStatus::closed) {
            result.status = QueryResult::Status::error;
            result.error_code = "connection_closed";
            return result;
        }
        msg::Message m = [&]() -> msg::Message {
            try {
                return msg::decode(r.line);
            } catch (const msg::CodecError&) {
                return msg::Message{"", "", "", msg::Performative::ack, Term::constant("none")};
            }
        }();
        if (m.cid != cid)
            continue; // stale message from an earlier conversation
        switch (m.performative) {
        case msg::Performative::answer:
            result.answers.push_back(msg::answer_bindings(m));
            if (max_answers && result.answers.size() >= *max_answers)
                return result; // leave the rest of the stream to the broker's sweeper
            break;
        case msg::Performative::end_of_answers:
            return result;
        case msg::Performative::error: {
            auto [code, detail] = msg::error_payload(m);
            result.status = QueryResult::Status::error;
            result.error_code = code;
            result.error_detail = detail;
            return result;
        }
        default:
            break;
        }
    }
}

} // namespace rr::agent
