// SPDX-License-Identifier: Apache-2.0
#include "rr/bus/broker.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

namespace rr::bus {

namespace {
constexpr auto kSweepPeriod = std::chrono::milliseconds(20);
constexpr auto kHandshakeTimeout = std::chrono::seconds(5);
constexpr const char* kBrokerName = "broker";
} // namespace

struct Broker::Impl {
    BrokerConfig cfg;
    std::unique_ptr<TcpListener> listener;

    std::mutex mu; // guards endpoints, conversations
    struct Endpoint {
        std::shared_ptr<LineConn> conn;
        std::uint64_t epoch = 0;
    };
    std::map<std::string, Endpoint> endpoints;
    std::map<std::string, msg::Conversation> conversations;
    std::uint64_t next_epoch = 1;

    std::mutex threads_mu;
    std::vector<std::thread> threads;
    std::atomic<bool> stopping{false};

    std::mutex trace_mu;
    std::ofstream trace;

    // ------------------------------------------------------------ tracing

    void trace_line(const char* direction, std::string_view raw) {
        if (!trace.is_open())
            return;
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                      Clock::now().time_since_epoch())
                      .count();
        std::lock_guard<std::mutex> lock(trace_mu);
        trace << us << '\t' << direction << '\t' << raw; // raw ends with '\n'
        trace.flush();
    }

    // --------------------------------------------------------- plumbing

    bool send_to_conn(const std::shared_ptr<LineConn>& conn, const msg::Message& m) {
        const std::string line = msg::encode(m);
        const bool ok = conn->send_line(line);
        if (ok)
            trace_line("out", line);
        return ok;
    }

    bool forward_raw(const std::shared_ptr<LineConn>& conn, const std::string& raw) {
        const bool ok = conn->send_line(raw);
        if (ok)
            trace_line("out", raw);
        return ok;
    }

    std::shared_ptr<LineConn> lookup(const std::string& name) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = endpoints.find(name);
        return it == endpoints.end() ? nullptr : it->second.conn;
    }

    void reply_error(const std::shared_ptr<LineConn>& origin, const std::string& to,
                     const std::string& cid, const std::string& code, const std::string& detail) {
        send_to_conn(origin, msg::make_error(cid, kBrokerName, to, code, detail));
    }

    // Removes the endpoint (when the epoch still matches) and fails every
    // conversation it participates in, notifying the other party.
    void drop_endpoint(const std::string& name, std::uint64_t epoch, bool close_conn) {
        std::shared_ptr<LineConn> victim;
        std::vector<std::pair<std::string, msg::Conversation>> failed;
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = endpoints.find(name);
            if (it == endpoints.end() || (epoch != 0 && it->second.epoch != epoch))
                return;
            victim = it->second.conn;
            endpoints.erase(it);
            for (auto conv = conversations.begin(); conv != conversations.end();) {
                if (conv->second.initiator == name || conv->second.target == name) {
                    failed.emplace_back(conv->first, conv->second);
                    conv = conversations.erase(conv);
                } else {
                    ++conv;
                }
            }
        }
        for (const auto& [cid, conv] : failed) {
            const std::string& other = conv.initiator == name ? conv.target : conv.initiator;
            if (auto conn = lookup(other))
                send_to_conn(conn, msg::make_error(cid, kBrokerName, other, "delivery_failed",
                                                   name));
        }
        if (close_conn && victim)
            victim->close();
    }

    // ------------------------------------------------------ conversations

    enum class Admit { forward, drop, reject };

    Admit admit(const msg::Message& m, std::string& reject_code, std::string& reject_detail) {
        std::lock_guard<std::mutex> lock(mu);
        switch (m.performative) {
        case msg::Performative::query: {
            auto it = conversations.find(m.cid);
            if (it != conversations.end()) {
                if (it->second.initiator == m.sender && it->second.target == m.receiver)
                    return Admit::forward; // follow-up on an open conversation
                reject_code = "duplicate_cid";
                reject_detail = m.cid;
                return Admit::reject;
            }
            if (conversations.size() >= cfg.max_conversations) {
                reject_code = "too_many_conversations";
                reject_detail = std::to_string(cfg.max_conversations);
                return Admit::reject;
            }
            conversations.emplace(m.cid, msg::Conversation{m.cid, m.sender, m.receiver,
                                                           Clock::now() + cfg.conversation_timeout,
                                                           true});
            return Admit::forward;
        }
        case msg::Performative::answer: {
            auto it = conversations.find(m.cid);
            if (it == conversations.end())
                return Admit::drop; // closed or never opened: no ghost deliveries
            const msg::Conversation& conv = it->second;
            if (m.sender != conv.target || m.receiver != conv.initiator)
                return Admit::drop;
            return Admit::forward;
        }
        case msg::Performative::end_of_answers:
        case msg::Performative::error: {
            auto it = conversations.find(m.cid);
            if (it == conversations.end())
                return Admit::drop; // closed conversations accept nothing
            // Only the participants may close a conversation.
            const msg::Conversation& conv = it->second;
            const bool from_target = m.sender == conv.target && m.receiver == conv.initiator;
            const bool from_initiator =
                m.sender == conv.initiator && m.receiver == conv.target;
            if (!from_target && !from_initiator)
                return Admit::drop;
            conversations.erase(it);
            return Admit::forward;
        }
        default:
            return Admit::drop;
        }
    }

    void unwind_conversation(const std::string& cid) {
        std::lock_guard<std::mutex> lock(mu);
        conversations.erase(cid);
    }

    // ------------------------------------------------------------ routing

    void route(const std::shared_ptr<LineConn>& origin, const std::string& origin_name,
               const std::string& raw, const msg::Message& m) {
        if (m.performative == msg::Performative::register_agent) {
            reply_error(origin, origin_name, m.cid, "bad_message", "already registered");
            return;
        }
        if (m.performative == msg::Performative::ack)
            return;
        if (m.sender != origin_name) {
            reply_error(origin, origin_name, m.cid, "bad_message",
                        "sender field does not match the registered name");
            return;
        }

        std::string code, detail;
        switch (admit(m, code, detail)) {
        case Admit::drop:
            return;
        case Admit::reject:
            reply_error(origin, origin_name, m.cid, code, detail);
            return;
        case Admit::forward:
            break;
        }

        auto target = lookup(m.receiver);
        if (!target) {
            if (m.performative == msg::Performative::query)
                unwind_conversation(m.cid);
            reply_error(origin, origin_name, m.cid, "unknown_receiver", m.receiver);
            return;
        }
        if (!forward_raw(target, raw)) {
            // Receiver connection is dead: deregister it and tell the sender.
            drop_endpoint(m.receiver, 0, true);
            if (m.performative == msg::Performative::query)
                unwind_conversation(m.cid);
            reply_error(origin, origin_name, m.cid, "delivery_failed", m.receiver);
        }
    }

    // -------------------------------------------------------- connection

    void serve(std::shared_ptr<LineConn> conn) {
        // Handshake: the first line must be a register message.
        RecvResult first = conn->recv_line(Clock::now() + kHandshakeTimeout);
        if (first.status != RecvStatus::got_line) {
            conn->close();
            return;
        }
        std::string name;
        try {
            msg::Message m = msg::decode(first.line);
            trace_line("in", first.line);
            if (m.performative != msg::Performative::register_agent)
                throw BrokerError("first message must be register");
            name = m.content.args()[0].symbol();
            if (name == kBrokerName)
                throw BrokerError("reserved name");
            if (m.sender != name)
                throw BrokerError("register sender must match the agent name");
            std::uint64_t epoch;
            std::shared_ptr<LineConn> replaced;
            {
                std::lock_guard<std::mutex> lock(mu);
                epoch = next_epoch++;
                auto it = endpoints.find(name);
                if (it != endpoints.end())
                    replaced = it->second.conn;
            }
            if (replaced)
                drop_endpoint(name, 0, true); // re-registration replaces the old address
            {
                std::lock_guard<std::mutex> lock(mu);
                endpoints[name] = Endpoint{conn, epoch};
            }
            if (cfg.log_registrations)
                std::cerr << "broker: " << (replaced ? "re-registered " : "registered ") << name
                          << " (" << conn->peer() << ")\n";
            send_to_conn(conn, msg::make_ack(m.cid, name));
            read_loop(conn, name, epoch);
        } catch (const std::exception& e) {
            send_to_conn(conn, msg::make_error("handshake", kBrokerName, "unknown",
                                               "bad_handshake", e.what()));
            conn->close();
        }
    }

    void read_loop(const std::shared_ptr<LineConn>& conn, const std::string& name,
                   std::uint64_t epoch) {
        while (!stopping.load()) {
            RecvResult r = conn->recv_line();
            if (r.status != RecvStatus::got_line)
                break;
            try {
                msg::Message m = msg::decode(r.line);
                trace_line("in", r.line); // only decodable lines enter the trace
                route(conn, name, r.line, m);
            } catch (const msg::CodecError& e) {
                reply_error(conn, name, "invalid", "bad_message", e.reason());
            }
        }
        drop_endpoint(name, epoch, true);
    }

    void spawn(std::function<void()> fn) {
        std::lock_guard<std::mutex> lock(threads_mu);
        if (stopping.load())
            return; // the connection is abandoned; its owner times out
        threads.emplace_back(std::move(fn));
    }

    void accept_loop() {
        while (!stopping.load()) {
            std::unique_ptr<LineConn> conn = listener->accept();
            if (!conn)
                break;
            std::shared_ptr<LineConn> shared = std::move(conn);
            spawn([this, shared] { serve(shared); });
        }
    }

    void sweep_loop() {
        while (!stopping.load()) {
            std::this_thread::sleep_for(kSweepPeriod);
            expire(Clock::now());
        }
    }

    std::vector<std::string> expire(Clock::time_point now) {
        std::vector<std::pair<std::string, std::string>> expired; // cid, initiator
        {
            std::lock_guard<std::mutex> lock(mu);
            for (auto it = conversations.begin(); it != conversations.end();) {
                if (it->second.deadline < now) {
                    expired.emplace_back(it->first, it->second.initiator);
                    it = conversations.erase(it);
                } else {
                    ++it;
                }
            }
        }
        std::vector<std::string> cids;
        for (const auto& [cid, initiator] : expired) {
            cids.push_back(cid);
            if (auto conn = lookup(initiator))
                send_to_conn(conn, msg::make_error(cid, kBrokerName, initiator, "timeout", cid));
        }
        return cids;
    }

    void shutdown() {
        bool expected = false;
        if (!stopping.compare_exchange_strong(expected, true))
            return;
        if (listener)
            listener->close();
        {
            std::lock_guard<std::mutex> lock(mu);
            for (auto& [name, ep] : endpoints)
                ep.conn->close();
        }
        std::vector<std::thread> to_join;
        {
            std::lock_guard<std::mutex> lock(threads_mu);
            to_join.swap(threads);
        }
        for (std::thread& t : to_join)
            if (t.joinable())
                t.join();
        std::lock_guard<std::mutex> lock(mu);
        endpoints.clear();
        conversations.clear();
    }
};

std::unique_ptr<Broker> Broker::start(const BrokerConfig& cfg) {
    if (cfg.conversation_timeout < std::chrono::milliseconds(1))
        throw BrokerError("conversation timeout must be at least 1 ms");
    auto broker = std::unique_ptr<Broker>(new Broker());
    broker->impl_ = std::make_unique<Impl>();
    Impl& impl = *broker->impl_;
    impl.cfg = cfg;
    if (cfg.trace_path) {
        impl.trace.open(*cfg.trace_path, std::ios::out | std::ios::trunc);
        if (!impl.trace.is_open())
            throw BrokerError("cannot open trace file " + *cfg.trace_path);
    }
    if (cfg.listen_address) {
        auto [host, port] = parse_hostport(*cfg.listen_address);
        try {
            impl.listener = TcpListener::bind(host, port);
        } catch (const TransportError& e) {
            throw BrokerError(e.what());
        }
        impl.spawn([&impl] { impl.accept_loop(); });
    }
    impl.spawn([&impl] { impl.sweep_loop(); });
    return broker;
}

Broker::~Broker() {
    if (impl_)
        impl_->shutdown();
}

void Broker::stop() { impl_->shutdown(); }

std::uint16_t Broker::tcp_port() const {
    return impl_->listener ? impl_->listener->port() : 0;
}

std::unique_ptr<LineConn> Broker::connect_inproc() {
    auto [client, server] = make_inproc_pair();
    std::shared_ptr<LineConn> shared = std::move(server);
    impl_->spawn([impl = impl_.get(), shared] { impl->serve(shared); });
    return std::move(client);
}

std::vector<std::string> Broker::expire_conversations(Clock::time_point now) {
    return impl_->expire(now);
}

bool Broker::is_registered(const std::string& name) const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->endpoints.count(name) > 0;
}

std::size_t Broker::open_conversations() const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    return impl_->conversations.size();
}

} // namespace rr::bus
