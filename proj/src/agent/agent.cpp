// SPDX-License-Identifier: Apache-2.0
#include "rr/agent/agent.hpp"

#include "rr/agent/ingest.hpp"
#include "rr/engine/stratify.hpp"
#include "rr/parser.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace rr::agent {

using bus::Clock;
using bus::RecvStatus;

RuleBase build_rulebase(const AgentConfig& cfg) {
    std::ifstream in(cfg.rulebase_path, std::ios::binary);
    if (!in.is_open())
        throw ConfigError("rulebase_path", "cannot open " + cfg.rulebase_path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    RuleBase rb;
    try {
        rb = parse_program(buffer.str());
    } catch (const SyntaxError& e) {
        throw ConfigError("rulebase_path", cfg.rulebase_path + ":" + std::to_string(e.line()) +
                                               ":" + std::to_string(e.column()) + ": expected " +
                                               e.expected());
    }

    for (const DataAdapterSpec& adapter : cfg.adapters) {
        try {
            for (Term& fact : ingest(adapter))
                rb.add_fact(std::move(fact));
        } catch (const IngestError& e) {
            throw ConfigError("adapters", adapter.path + ": " + e.what());
        }
    }

    const engine::StratifyResult strat = engine::check_stratified(rb);
    if (!strat.ok)
        throw ConfigError("rulebase_path", strat.describe());

    std::set<PredId> heads;
    for (const PredId& p : rb.predicates())
        heads.insert(p);
    for (const ResponsibilityAssignment& r : cfg.responsibility)
        if (heads.count(r.pred()))
            throw ConfigError("responsibility",
                              "conflicting_responsibility: " + r.pred().to_string() +
                                  " is defined locally");
    for (const PredId& p : cfg.public_interface)
        if (!heads.count(p))
            throw ConfigError("public_interface",
                              p.to_string() + " is not derivable from the rulebase");
    return rb;
}

// ---------------------------------------------------------------- runtime

namespace {

struct PendingAsk {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<msg::Message> queue;
    bool closed = false;

    void push(msg::Message m) {
        {
            std::lock_guard<std::mutex> lock(mu);
            queue.push_back(std::move(m));
        }
        cv.notify_one();
    }

    void close() {
        {
            std::lock_guard<std::mutex> lock(mu);
            closed = true;
        }
        cv.notify_all();
    }

    enum class Status { got, timed_out, closed_out };
    std::pair<Status, std::optional<msg::Message>> pop(Clock::time_point deadline) {
        std::unique_lock<std::mutex> lock(mu);
        if (!cv.wait_until(lock, deadline, [&] { return !queue.empty() || closed; }))
            return {Status::timed_out, std::nullopt};
        if (queue.empty())
            return {Status::closed_out, std::nullopt};
        msg::Message m = std::move(queue.front());
        queue.pop_front();
        return {Status::got, std::move(m)};
    }
};

} // namespace

struct Agent::Impl {
    Agent* self = nullptr;
    std::shared_ptr<bus::LineConn> conn;
    std::thread reader;
    std::mutex threads_mu;
    std::vector<std::thread> workers;
    std::mutex pending_mu;
    std::map<std::string, std::shared_ptr<PendingAsk>> pending;
    std::atomic<bool> stopping{false};

    bool send(const msg::Message& m) {
        try {
            return conn->send_line(msg::encode(m));
        } catch (const msg::CodecError&) {
            return false;
        }
    }

    void reader_loop() {
        while (true) {
            bus::RecvResult r = conn->recv_line();
            if (r.status != RecvStatus::got_line)
                break;
            msg::Message m = [&]() -> msg::Message {
                try {
                    return msg::decode(r.line);
                } catch (const msg::CodecError&) {
                    return msg::Message{"", "", "", msg::Performative::ack,
                                        Term::constant("none")};
                }
            }();
            if (m.cid.empty())
                continue; // undecodable line; nothing sensible to reply to
            switch (m.performative) {
            case msg::Performative::query: {
                if (stopping.load())
                    break;
                std::lock_guard<std::mutex> lock(threads_mu);
                workers.emplace_back([this, m] { self->handle_query(m); });
                break;
            }
            case msg::Performative::answer:
            case msg::Performative::end_of_answers:
            case msg::Performative::error: {
                std::shared_ptr<PendingAsk> waiter;
                {
                    std::lock_guard<std::mutex> lock(pending_mu);
                    auto it = pending.find(m.cid);
                    if (it != pending.end())
                        waiter = it->second;
                }
                if (waiter)
                    waiter->push(std::move(m));
                break; // otherwise: stale answer for a finished ask; drop
            }
            case msg::Performative::ack:
            case msg::Performative::register_agent:
                break;
            }
        }
        std::lock_guard<std::mutex> lock(pending_mu);
        for (auto& [cid, waiter] : pending)
            waiter->close();
    }

    void shutdown() {
        bool expected = false;
        if (!stopping.compare_exchange_strong(expected, true))
            return;
        conn->close();
        if (reader.joinable())
            reader.join();
        {
            std::lock_guard<std::mutex> lock(pending_mu);
            for (auto& [cid, waiter] : pending)
                waiter->close();
        }
        std::vector<std::thread> to_join;
        {
            std::lock_guard<std::mutex> lock(threads_mu);
            to_join.swap(workers);
        }
        for (std::thread& t : to_join)
            if (t.joinable())
                t.join();
    }
};

namespace {

/// Engine boundary: delegates ask/delegate to the agent's conversations.
class AgentRemote final : public engine::RemoteAsk {
public:
    AgentRemote(Agent& agent, Clock::time_point deadline) : agent_(agent), deadline_(deadline) {}

    void ask(const std::string& target, const Term& goal,
             const std::function<bool(const std::map<std::string, Term>&)>& on_answer) override {
        agent_.perform_ask(target, goal, deadline_, on_answer);
    }

    std::optional<std::string> responsible_for(const PredId& pred) override {
        return agent_.responsible_agent(pred);
    }

private:
    Agent& agent_;
    Clock::time_point deadline_;
};

} // namespace

Agent::Agent(AgentConfig cfg, RuleBase rb) : cfg_(std::move(cfg)), rb_(std::move(rb)) {}

std::unique_ptr<Agent> Agent::start(AgentConfig cfg, const ConnFactory& connect) {
    RuleBase rb = build_rulebase(cfg);
    auto agent = std::unique_ptr<Agent>(new Agent(std::move(cfg), std::move(rb)));
    agent->impl_ = std::make_unique<Impl>();
    Agent::Impl& impl = *agent->impl_;
    impl.self = agent.get();
    impl.conn = connect();
    if (!impl.conn)
        throw AgentError("no connection to the broker");

    const std::string cid = msg::new_cid();
    if (!impl.conn->send_line(msg::encode(msg::make_register(cid, agent->cfg_.name))))
        throw AgentError("broker connection closed during registration");
    const auto deadline = Clock::now() + agent->cfg_.query_timeout;
    while (true) {
        bus::RecvResult r = impl.conn->recv_line(deadline);
        if (r.status == RecvStatus::timed_out)
            throw AgentError("broker did not acknowledge registration in time");
        if (r.status == RecvStatus::closed)
            throw AgentError("broker closed the connection during registration");
        msg::Message m = msg::decode(r.line);
        if (m.performative == msg::Performative::ack && m.cid == cid)
            break;
        if (m.performative == msg::Performative::error) {
            auto [code, detail] = msg::error_payload(m);
            throw AgentError("registration rejected: " + code + " (" + detail + ")");
        }
    }
    impl.reader = std::thread([&impl] { impl.reader_loop(); });
    return agent;
}

Agent::~Agent() {
    if (impl_)
        impl_->shutdown();
}

void Agent::stop() { impl_->shutdown(); }

bool Agent::exports(const PredId& pred) const {
    for (const PredId& p : cfg_.public_interface)
        if (p == pred)
            return true;
    return false;
}

std::optional<std::string> Agent::responsible_agent(const PredId& pred) const {
    for (const ResponsibilityAssignment& r : cfg_.responsibility)
        if (r.predicate == pred.name && r.arity == pred.arity)
            return r.agent;
    return std::nullopt;
}

void Agent::perform_ask(const std::string& target, const Term& goal,
                        Clock::time_point deadline,
                        const std::function<bool(const std::map<std::string, Term>&)>& on_answer) {
    using engine::RemoteError;
    if (target == cfg_.name)
        throw RemoteError("bad_target", "ask target is the agent itself");

    auto waiter = std::make_shared<PendingAsk>();
    const std::string cid = msg::new_cid();
    {
        std::lock_guard<std::mutex> lock(impl_->pending_mu);
        impl_->pending.emplace(cid, waiter);
    }
    struct Unregister {
        Agent::Impl* impl;
        const std::string& cid;
        ~Unregister() {
            std::lock_guard<std::mutex> lock(impl->pending_mu);
            impl->pending.erase(cid);
        }
    } unregister{impl_.get(), cid};

    // Sub-conversations never outlive the parent conversation's budget.
    const auto capped = std::min(deadline, Clock::now() + cfg_.query_timeout);
    if (!impl_->send(msg::make_query(cid, cfg_.name, target, goal)))
        throw RemoteError("connection_closed", "broker link is down");

    while (true) {
        auto [status, m] = waiter->pop(capped);
        if (status == PendingAsk::Status::timed_out)
            throw RemoteError("timeout", "no reply from " + target + " for " + goal.to_string());
        if (status == PendingAsk::Status::closed_out)
            throw RemoteError("connection_closed", "broker link is down");
        switch (m->performative) {
        case msg::Performative::answer: {
            std::map<std::string, Term> bindings;
            for (auto& [name, term] : msg::answer_bindings(*m))
                bindings.emplace(name, term);
            if (!on_answer(bindings))
                return;
            break;
        }
        case msg::Performative::end_of_answers:
            return;
        case msg::Performative::error: {
            auto [code, detail] = msg::error_payload(*m);
            throw RemoteError(code, detail);
        }
        default:
            break; // queries cannot arrive on a sub-conversation cid
        }
    }
}

// One conversation: runs on its own worker thread.
void Agent::handle_query(const msg::Message& m) {
    Agent::Impl& impl = *impl_;
    const auto deadline = Clock::now() + cfg_.query_timeout;
    auto send_error = [&](const std::string& code, const std::string& detail) {
        impl.send(msg::make_error(m.cid, cfg_.name, m.sender, code, detail));
    };

    std::vector<Literal> goals;
    try {
        goals = engine::goal_to_literals(m.content);
    } catch (const engine::EngineError& e) {
        send_error("engine_error", e.detail());
        return;
    }
    for (const Literal& lit : goals) {
        const PredId pred = PredId::of(lit.atom);
        if (engine::is_builtin_goal(lit.atom) || !exports(pred)) {
            send_error("not_exported", pred.to_string());
            return;
        }
    }

    AgentRemote remote(*this, deadline);
    bool failed = false;
    try {
        engine::solve(rb_, goals, engine::SolveLimits::defaults(), &remote,
                      [&](const engine::Answer& a) {
                          std::vector<std::pair<std::string, Term>> binds;
                          for (const auto& [name, term] : a.bindings) {
                              if (!term.is_ground()) {
                                  send_error("non_ground_answer",
                                             name + "=" + term.to_string());
                                  failed = true;
                                  return false;
                              }
                              binds.emplace_back(name, term);
                          }
                          if (!impl.send(msg::make_answer(m.cid, cfg_.name, m.sender, binds))) {
                              failed = true;
                              return false;
                          }
                          return true;
                      });
    } catch (const engine::EngineError& e) {
        if (e.code() == engine::EngineErrc::no_responsible_agent)
            send_error("no_responsible_agent", e.detail());
        else
            send_error("engine_error", e.detail());
        return;
    } catch (const engine::RemoteError& e) {
        send_error(e.code(), e.detail());
        return;
    } catch (const std::exception& e) {
        // A query must never take the agent down.
        send_error("engine_error", e.what());
        return;
    }
    if (!failed)
        impl.send(msg::make_end_of_answers(m.cid, cfg_.name, m.sender));
}

} // namespace rr::agent
