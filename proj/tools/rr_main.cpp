// SPDX-License-Identifier: Apache-2.0
//
// Operator entry points: run the broker, run an agent, issue queries and
// inspect trace files.
#include "rr/agent/agent.hpp"
#include "rr/agent/client.hpp"
#include "rr/bus/broker.hpp"
#include "rr/bus/trace.hpp"
#include "rr/parser.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace {

std::atomic<bool> g_stop_requested{false};

void handle_stop_signal(int) { g_stop_requested.store(true); }

void install_signal_handlers() {
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
}

void wait_for_stop() {
    while (!g_stop_requested.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

std::string env_broker_fallback() {
    const char* env = std::getenv("RR_BROKER");
    return env ? env : "";
}

int run_broker(const std::string& listen, std::int64_t timeout_ms, std::size_t max_conversations,
               const std::string& trace_file) {
    rr::bus::BrokerConfig cfg;
    cfg.listen_address = listen;
    cfg.conversation_timeout = std::chrono::milliseconds(timeout_ms);
    cfg.max_conversations = max_conversations;
    cfg.log_registrations = true;
    if (!trace_file.empty())
        cfg.trace_path = trace_file;
    try {
        auto broker = rr::bus::Broker::start(cfg);
        std::cerr << "broker listening on " << listen << " (port " << broker->tcp_port() << ")\n";
        wait_for_stop();
        broker->stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "broker startup failed: " << e.what() << "\n";
        return 2;
    }
}

int run_agent(const std::string& config_path, const std::string& broker_flag) {
    try {
        rr::agent::AgentConfig cfg = rr::agent::load_agent_config(config_path);
        std::string address = !broker_flag.empty() ? broker_flag : cfg.broker_address;
        if (address.empty())
            address = env_broker_fallback();
        if (address.empty()) {
            std::cerr << "no broker address (config `broker`, --broker or RR_BROKER)\n";
            return 2;
        }
        auto [host, port] = rr::bus::parse_hostport(address);
        auto agent = rr::agent::Agent::start(
            cfg, [&host, port] { return rr::bus::tcp_connect(host, port); });
        std::cerr << "agent " << cfg.name << " registered via " << address << "\n";
        wait_for_stop();
        agent->stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "agent startup failed: " << e.what() << "\n";
        return 2;
    }
}

int run_query(const std::string& broker_flag, const std::string& target,
              const std::string& query_text, std::int64_t timeout_ms,
              std::int64_t max_answers, const std::string& client_name) {
    std::string address = !broker_flag.empty() ? broker_flag : env_broker_fallback();
    if (address.empty()) {
        std::cerr << "no broker address (--broker or RR_BROKER)\n";
        return 2;
    }

    rr::Term goal = [&]() -> rr::Term {
        std::vector<rr::Literal> literals = rr::parse_query(query_text);
        std::vector<rr::Term> goals;
        for (const rr::Literal& lit : literals)
            goals.push_back(lit.negated ? rr::Term::compound("not", {lit.atom}) : lit.atom);
        if (goals.size() == 1)
            return goals[0];
        return rr::Term::compound("and", std::move(goals));
    }();

    auto [host, port] = rr::bus::parse_hostport(address);
    rr::agent::QueryClient client(rr::bus::tcp_connect(host, port), client_name);
    std::optional<std::size_t> max;
    if (max_answers >= 0)
        max = static_cast<std::size_t>(max_answers);
    rr::agent::QueryResult result =
        client.ask(target, goal, std::chrono::milliseconds(timeout_ms), max);

    for (const auto& answer : result.answers) {
        std::string line;
        for (const auto& [name, term] : answer) {
            if (!line.empty())
                line += ", ";
            line += name + "=" + term.to_string();
        }
        std::cout << line << "\n";
    }
    switch (result.status) {
    case rr::agent::QueryResult::Status::completed:
        std::cout << "-- " << result.answers.size() << " answers\n";
        return 0;
    case rr::agent::QueryResult::Status::error:
        std::cout << "-- " << result.answers.size() << " answers\n";
        std::cerr << "error(" << result.error_code << ",\"" << result.error_detail << "\")\n";
        return 3;
    case rr::agent::QueryResult::Status::timed_out:
        std::cerr << "timed out after " << timeout_ms << " ms\n";
        return 4;
    }
    return 0;
}

int run_trace(const std::string& file) {
    try {
        for (const rr::bus::TraceRecord& rec : rr::bus::read_trace_file(file)) {
            rr::msg::Message m = rec.decode();
            std::cout << rec.timestamp_us << "us\t" << (rec.inbound ? "in" : "out") << "\t"
                      << m.sender << "->" << m.receiver << "\t" << rr::msg::to_wire(m.performative)
                      << "\t" << m.content.to_string() << "\n";
        }
        return 0;
    } catch (const rr::bus::TraceError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    install_signal_handlers();

    CLI::App app{"rule-responder middleware: broker, agents and query tools"};
    app.require_subcommand(1);

    auto* broker_cmd = app.add_subcommand("broker", "run the message broker");
    std::string listen = "127.0.0.1:7700";
    std::int64_t broker_timeout_ms = 5000;
    std::size_t max_conversations = 1024;
    std::string trace_file;
    broker_cmd->add_option("--listen", listen, "listen address host:port");
    broker_cmd->add_option("--timeout-ms", broker_timeout_ms, "conversation timeout");
    broker_cmd->add_option("--max-conversations", max_conversations, "open conversation cap");
    broker_cmd->add_option("--trace-file", trace_file, "append message trace to this file");

    auto* agent_cmd = app.add_subcommand("agent", "run one agent from a config file");
    std::string config_path;
    std::string agent_broker;
    agent_cmd->add_option("--config", config_path, "agent JSON config")->required();
    agent_cmd->add_option("--broker", agent_broker, "broker address override");

    auto* query_cmd = app.add_subcommand("query", "send a query and print the answers");
    std::string query_broker;
    std::string target;
    std::string query_text;
    std::int64_t query_timeout_ms = 5000;
    std::int64_t max_answers = -1;
    std::string client_name = "client";
    query_cmd->add_option("--broker", query_broker, "broker address (or RR_BROKER)");
    query_cmd->add_option("--target", target, "agent to ask")->required();
    query_cmd->add_option("--timeout-ms", query_timeout_ms, "client-side deadline");
    query_cmd->add_option("--max-answers", max_answers, "stop after N answers");
    query_cmd->add_option("--as", client_name, "client name to register");
    query_cmd->add_option("query", query_text, "query text, e.g. 'expert(P,\"ADDLs\").'")
        ->required();

    auto* trace_cmd = app.add_subcommand("trace", "pretty-print a broker trace file");
    std::string trace_path;
    trace_cmd->add_option("--file", trace_path, "trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (broker_cmd->parsed())
            return run_broker(listen, broker_timeout_ms, max_conversations, trace_file);
        if (agent_cmd->parsed())
            return run_agent(config_path, agent_broker);
        if (query_cmd->parsed())
            return run_query(query_broker, target, query_text, query_timeout_ms, max_answers,
                             client_name);
        if (trace_cmd->parsed())
            return run_trace(trace_path);
    } catch (const rr::SyntaxError& e) {
        std::cerr << "query parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
