// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any fails.
#include "rr/agent/agent.hpp"
#include "rr/bus/broker.hpp"
#include "rr/engine/stratify.hpp"
#include "rr/msg/message.hpp"
#include "rr/parser.hpp"

#include "support/bundle.hpp"
#include "support/merge.hpp"
#include "support/oracle.hpp"
#include "support/term_gen.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace rr;
using namespace rr::testing;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int number, const std::string& title, const std::function<void()>& body) {
    const auto start = Clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() /
        1000.0;
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.1fs", seconds);
    if (error.empty()) {
        std::cout << "[PASS] criterion " << number << ": " << title << " (" << timing << ")\n";
    } else {
        ++failures;
        std::cout << "[FAIL] criterion " << number << ": " << title << " (" << timing
                  << ")\n       " << error << "\n";
    }
    std::cout.flush();
}

void expect(bool cond, const std::string& what) {
    if (!cond)
        throw std::runtime_error(what);
}

template <typename T>
void expect_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
        std::ostringstream os;
        os << what << ": got {";
        bool first = true;
        for (const auto& k : got) {
            os << (first ? "" : ", ") << k;
            first = false;
        }
        os << "}, want {";
        first = true;
        for (const auto& k : want) {
            os << (first ? "" : ", ") << k;
            first = false;
        }
        os << "}";
        throw std::runtime_error(os.str());
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    expect(in.is_open(), "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------ criterion 1

void usecase_reproduction() {
    const auto deadline_budget = 10s;
    const auto start = Clock::now();
    Topology topo = start_usecase_topology(true); // four agents over TCP

    const auto expert = topo.ask("hcls_org", parse_term("expert(P,\"ADDLs\")"));
    expect(expert.status == agent::QueryResult::Status::completed, "expert query errored");
    expect(expert.answers.size() == 1, "expert must have exactly one answer");
    expect_eq(answer_keys(expert), std::set<std::string>{"P=\"william_klein\";"},
              "expert answer");

    expect_eq(answer_keys(topo.ask("hcls_org", parse_term("top_location(\"ADDLs\",L)"))),
              std::set<std::string>{"L=\"evanston\";"}, "top_location answer");

    expect_eq(
        answer_keys(topo.ask("hcls_org", parse_term("patent_count(\"william_klein\",\"ADDLs\",N)"))),
        std::set<std::string>{"N=2;"}, "patent count");

    expect(Clock::now() - start < deadline_budget, "use-case run exceeded 10 s");
}

// ------------------------------------------------------------ criterion 2

void delegation_transparency() {
    std::mt19937 rng(20260808);

    const auto check_bundle = [&](const std::vector<agent::AgentConfig>& configs,
                                  const std::vector<std::string>& authors,
                                  const std::vector<std::string>& fields,
                                  const std::vector<std::string>& locations, int n_queries,
                                  const char* label) {
        Topology topo = start_topology(configs, false);
        const RuleBase merged = merged_of_configs(configs);
        for (int i = 0; i < n_queries; ++i) {
            const RandomQuery q = random_usecase_query(rng, authors, fields, locations);
            const auto distributed = answer_keys(topo.ask(q.target, q.goal, 20s));
            const auto central = merged_answer_keys(merged, q.goal);
            expect_eq(distributed, central,
                      std::string(label) + " query " + std::to_string(i) + " to " + q.target +
                          ": " + q.goal.to_string());
        }
    };

    const std::vector<std::string> authors = {"william_klein", "mary_jones", "raj_patel",
                                              "jane_doe", "susan_wright", "nobody_here"};
    const std::vector<std::string> fields = {"ADDLs", "tau_tangles", "amyloid_imaging",
                                             "bace_inhibitors", "drug_delivery", "empty_field"};
    const std::vector<std::string> locations = {"evanston", "boston", "chicago", "seattle",
                                                "mumbai", "nowhere"};
    check_bundle(usecase_configs(), authors, fields, locations, 50, "shipped");

    const std::string dir =
        (std::filesystem::temp_directory_path() / "rr_acceptance_bundle").string();
    const auto configs = generate_bundle(rng, dir, 100, 1000);
    std::vector<std::string> gen_authors, gen_fields, gen_locations;
    for (int i = 0; i < 6; ++i)
        gen_authors.push_back("author_0" + std::to_string(10 + i * 7).substr(0, 2));
    gen_authors.push_back("author_000");
    for (int i = 0; i < 10; ++i)
        gen_fields.push_back("field_0" + std::to_string(i));
    for (int i = 0; i < 6; ++i)
        gen_locations.push_back("loc_0" + std::to_string(i));
    check_bundle(configs, gen_authors, gen_fields, gen_locations, 50, "generated");
    std::filesystem::remove_all(dir);
}

// ------------------------------------------------------------ criterion 3

void engine_oracle_equivalence() {
    std::mt19937 rng(97);
    for (int i = 0; i < 200; ++i) {
        const RuleBase rb = random_program(rng);
        const std::set<std::string> model = stratified_model(rb);
        for (const PredId& pred : rb.predicates()) {
            std::vector<Term> args;
            for (std::size_t a = 0; a < pred.arity; ++a)
                args.push_back(Term::var("Q" + std::to_string(a)));
            const Term goal =
                pred.arity == 0 ? Term::constant(pred.name) : Term::compound(pred.name, args);

            std::set<std::string> engine_set;
            engine::solve(rb, {Literal::pos(goal)}, {}, nullptr, [&](const engine::Answer& ans) {
                engine::Substitution s;
                for (const auto& [name, term] : ans.bindings)
                    s.bind(name, term);
                engine_set.insert(s.apply(goal).to_string());
                return true;
            });
            std::set<std::string> oracle_set;
            const std::string prefix = pred.name + "(";
            for (const std::string& atom : model)
                if ((pred.arity == 0 && atom == pred.name) ||
                    (atom.rfind(prefix, 0) == 0 && PredId::of(parse_term(atom)) == pred))
                    oracle_set.insert(atom);
            expect_eq(engine_set, oracle_set,
                      "program " + std::to_string(i) + " predicate " + pred.to_string());
        }
    }
}

// ------------------------------------------------------------ criterion 4

void codec_roundtrip_and_goldens() {
    std::mt19937 rng(5);
    rr::testing::TermGenOptions ground;
    ground.no_vars = true;
    ground.max_depth = 3;

    for (int i = 0; i < 1000; ++i) {
        msg::Message m = [&]() -> msg::Message {
            const std::string cid = msg::new_cid();
            switch (rng() % 4) {
            case 0:
                return msg::make_query(cid, "client", "hcls_org",
                                       Term::compound("probe", {random_term(rng)}));
            case 1:
                return msg::make_answer(cid, "hcls_org", "client",
                                        {{"X", random_term(rng, ground)},
                                         {"Y", random_term(rng, ground)}});
            case 2: return msg::make_error(cid, "broker", "client", "code_x", "detail\n\"q\"");
            default: return msg::make_end_of_answers(cid, "hcls_org", "client");
            }
        }();
        const std::string bytes = msg::encode(m);
        expect(msg::decode(bytes) == m, "round trip failed for " + bytes);
    }

    const std::string dir = RR_GOLDEN_DIR;
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".golden")
            continue;
        ++count;
        const std::string bytes = slurp(entry.path().string());
        const msg::Message m = msg::decode(bytes);
        expect(msg::encode(m) == bytes, "golden mismatch: " + entry.path().string());
    }
    expect(count >= 10, "need at least 10 golden files, found " + std::to_string(count));
}

// ------------------------------------------------------------ criterion 5

void broker_properties() {
    // Transport equivalence: one scenario, two transports, equal transcripts.
    const auto scenario = [](bool tcp) {
        bus::BrokerConfig cfg;
        if (tcp)
            cfg.listen_address = "127.0.0.1:0";
        auto broker = bus::Broker::start(cfg);
        auto connect = [&]() -> std::unique_ptr<bus::LineConn> {
            if (tcp)
                return bus::tcp_connect("127.0.0.1", broker->tcp_port());
            return broker->connect_inproc();
        };
        auto reg = [&](const std::string& name) {
            auto conn = connect();
            conn->send_line(msg::encode(msg::make_register("r_" + name, name)));
            conn->recv_line(bus::Clock::now() + 2s);
            return conn;
        };
        auto a = reg("a");
        auto b = reg("b");
        std::vector<std::string> transcript;
        auto pull = [&](bus::LineConn& c) {
            auto r = c.recv_line(bus::Clock::now() + 2s);
            expect(r.status == bus::RecvStatus::got_line, "transcript pull timed out");
            transcript.push_back(r.line);
        };
        a->send_line(msg::encode(msg::make_query("s1", "a", "b",
                                                 Term::compound("p", {Term::var("X")}))));
        pull(*b);
        b->send_line(msg::encode(msg::make_answer("s1", "b", "a", {{"X", Term::constant("v")}})));
        b->send_line(msg::encode(msg::make_end_of_answers("s1", "b", "a")));
        pull(*a);
        pull(*a);
        a->send_line(msg::encode(msg::make_query("s2", "a", "ghost", Term::constant("q"))));
        pull(*a);
        return transcript;
    };
    expect(scenario(false) == scenario(true), "transport transcripts differ");

    // Timeout window [T, T+400] for T = 100ms.
    {
        bus::BrokerConfig cfg;
        cfg.conversation_timeout = 100ms;
        auto broker = bus::Broker::start(cfg);
        auto a = broker->connect_inproc();
        a->send_line(msg::encode(msg::make_register("ra", "a")));
        (void)a->recv_line(bus::Clock::now() + 2s);
        auto b = broker->connect_inproc();
        b->send_line(msg::encode(msg::make_register("rb", "b")));
        (void)b->recv_line(bus::Clock::now() + 2s);

        const auto sent = bus::Clock::now();
        a->send_line(msg::encode(msg::make_query("t1", "a", "b", Term::constant("p"))));
        auto r = a->recv_line(bus::Clock::now() + 2s);
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(bus::Clock::now() - sent)
                .count();
        expect(r.status == bus::RecvStatus::got_line, "no timeout error arrived");
        const msg::Message m = msg::decode(r.line);
        expect(m.performative == msg::Performative::error &&
                   msg::error_payload(m).first == "timeout",
               "expected error(timeout), got " + r.line);
        expect(ms >= 100 && ms <= 500,
               "timeout after " + std::to_string(ms) + " ms, outside [100,500]");
    }

    // Dead endpoint mid-conversation.
    {
        auto broker = bus::Broker::start({});
        auto a = broker->connect_inproc();
        a->send_line(msg::encode(msg::make_register("ra", "a")));
        (void)a->recv_line(bus::Clock::now() + 2s);
        auto b = broker->connect_inproc();
        b->send_line(msg::encode(msg::make_register("rb", "b")));
        (void)b->recv_line(bus::Clock::now() + 2s);

        a->send_line(msg::encode(msg::make_query("d1", "a", "b", Term::constant("p"))));
        (void)b->recv_line(bus::Clock::now() + 2s); // delivered
        b->close();                                  // dies without answering
        auto r = a->recv_line(bus::Clock::now() + 2s);
        expect(r.status == bus::RecvStatus::got_line, "no delivery_failed arrived");
        const msg::Message m = msg::decode(r.line);
        expect(m.performative == msg::Performative::error &&
                   msg::error_payload(m).first == "delivery_failed",
               "expected error(delivery_failed), got " + r.line);
    }
}

// ------------------------------------------------------------ criterion 6

void parser_roundtrip_and_rulebases() {
    std::mt19937 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const Term t = random_term(rng);
        const Term back = parse_term(t.to_string());
        expect(back == t, "round trip failed for " + t.to_string());
    }
    for (const char* file : {"org.rr", "pubmed.rr", "patent.rr", "kb.rr"}) {
        const RuleBase rb = parse_program(slurp(usecase_dir() + "/" + file));
        expect(engine::check_stratified(rb).ok, std::string(file) + " is not stratified");
    }
}

} // namespace

int main() {
    const auto start = Clock::now();
    criterion(1, "use-case reproduction over TCP (expert, location, patents)",
              usecase_reproduction);
    criterion(2, "delegation transparency, 50+50 randomized queries", delegation_transparency);
    criterion(3, "engine vs bottom-up oracle, 200 randomized programs",
              engine_oracle_equivalence);
    criterion(4, "codec round trip x1000 and golden files", codec_roundtrip_and_goldens);
    criterion(5, "broker transport equivalence, timeout window, dead endpoint",
              broker_properties);
    criterion(6, "parser round trip x1000 and shipped rulebases", parser_roundtrip_and_rulebases);

    const double total =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() /
        1000.0;
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.1fs", total);
    if (total < 60.0) {
        std::cout << "[PASS] criterion 7: acceptance suite wall time " << timing << " < 60s\n";
    } else {
        ++failures;
        std::cout << "[FAIL] criterion 7: acceptance suite wall time " << timing << " >= 60s\n";
    }

    if (failures > 0) {
        std::cout << failures << " criteria failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
