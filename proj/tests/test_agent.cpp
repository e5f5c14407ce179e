// SPDX-License-Identifier: Apache-2.0
#include "rr/agent/agent.hpp"

#include "rr/agent/client.hpp"
#include "rr/agent/ingest.hpp"
#include "rr/bus/broker.hpp"
#include "rr/parser.hpp"
#include "support/bundle.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

using namespace rr;
using namespace rr::agent;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

/// Scratch directory with helper to drop files into it.
struct Scratch {
    fs::path dir;

    Scratch() {
        dir = fs::temp_directory_path() /
              ("rr_agent_test_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    static int& counter() {
        static int c = 0;
        return c;
    }

    std::string write(const std::string& name, const std::string& content) {
        const std::string path = (dir / name).string();
        std::ofstream out(path, std::ios::trunc | std::ios::binary);
        out << content;
        return path;
    }
};

AgentConfig source_config(const std::string& name, const std::string& rulebase_path,
                          std::vector<PredId> exports) {
    AgentConfig cfg;
    cfg.name = name;
    cfg.role = AgentRole::source;
    cfg.rulebase_path = rulebase_path;
    cfg.public_interface = std::move(exports);
    cfg.query_timeout = 2000ms;
    return cfg;
}

} // namespace

TEST_CASE("csv ingest maps columns to arguments in template order") {
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::csv;
    spec.path = rr::testing::usecase_dir() + "/publications.csv";
    spec.predicate = "publication";
    spec.columns = {"author", "title", "field", "location"};

    const std::vector<Term> facts = ingest(spec);
    REQUIRE(facts.size() == 21);
    CHECK(facts[0].to_string() ==
          "publication(\"william_klein\",\"addl_paper_1\",\"ADDLs\",\"evanston\")");
}

TEST_CASE("csv ingest: header-only file yields no facts") {
    Scratch tmp;
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::csv;
    spec.path = tmp.write("empty.csv", "author,title\n");
    spec.predicate = "p";
    spec.columns = {"author"};
    CHECK(ingest(spec).empty());
}

TEST_CASE("csv ingest fails fast on the first bad row") {
    Scratch tmp;
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::csv;
    spec.path = tmp.write("bad.csv", "a,b\nx,y\nonly_one\n");
    spec.predicate = "p";
    spec.columns = {"a", "b"};
    try {
        ingest(spec);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.row() == 2);
        CHECK(e.reason().find("missing_field") != std::string::npos);
    }
}

TEST_CASE("csv ingest: integer columns and quoted fields") {
    Scratch tmp;
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::csv;
    spec.path = tmp.write("typed.csv", "name,year\n\"doe, jane\",2004\n");
    spec.predicate = "person";
    spec.columns = {"name", "year"};
    spec.integer_columns = {"year"};
    const auto facts = ingest(spec);
    REQUIRE(facts.size() == 1);
    CHECK(facts[0].to_string() == "person(\"doe, jane\",2004)");

    spec.path = tmp.write("typed_bad.csv", "name,year\njane,two_thousand\n");
    CHECK_THROWS_AS(ingest(spec), IngestError);
}

TEST_CASE("csv ingest rejects unmapped columns as a config problem") {
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::csv;
    spec.path = rr::testing::usecase_dir() + "/publications.csv";
    spec.predicate = "publication";
    spec.columns = {"author", "missing_column"};
    try {
        ingest(spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.detail().find("bad_adapter_mapping") != std::string::npos);
    }
}

TEST_CASE("json-facts ingest") {
    Scratch tmp;
    DataAdapterSpec spec;
    spec.kind = DataAdapterSpec::Kind::json_facts;
    spec.path = tmp.write("kb.json", R"([
        {"target": "ADDLs", "disease": "alzheimer", "score": 9},
        {"target": "bace1", "disease": "alzheimer", "score": 7}
    ])");
    spec.predicate = "target_score";
    spec.columns = {"target", "score"};
    spec.integer_columns = {"score"};
    const auto facts = ingest(spec);
    REQUIRE(facts.size() == 2);
    CHECK(facts[0].to_string() == "target_score(\"ADDLs\",9)");
    CHECK(facts[1].to_string() == "target_score(\"bace1\",7)");

    spec.columns = {"target", "missing"};
    spec.integer_columns = {};
    CHECK_THROWS_AS(ingest(spec), IngestError);
}

TEST_CASE("config loading: shipped bundle round trip") {
    const auto configs = rr::testing::usecase_configs();
    REQUIRE(configs.size() == 4);
    CHECK(configs[0].name == "hcls_org");
    CHECK(configs[0].role == AgentRole::organizational);
    CHECK(configs[0].responsibility.size() == 2);
    CHECK(configs[1].adapters.size() == 1);
    CHECK(configs[1].adapters[0].columns.size() == 4);
    CHECK(configs[3].adapters[0].kind == DataAdapterSpec::Kind::json_facts);
}

TEST_CASE("config loading: JSON errors carry the byte position") {
    Scratch tmp;
    const std::string path = tmp.write("broken.json", "{\"name\": \"x\",,}\n");
    try {
        load_agent_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.detail().find("byte") != std::string::npos);
    }
}

TEST_CASE("config invariants at load time") {
    Scratch tmp;
    const std::string rules = tmp.write("local.rr", "top_author(F,A) :- local(F,A). local(a,b).");

    SUBCASE("responsibility must not overlap local heads") {
        AgentConfig cfg;
        cfg.name = "org";
        cfg.role = AgentRole::organizational;
        cfg.rulebase_path = rules;
        cfg.public_interface = {{"top_author", 2}};
        cfg.responsibility = {{"top_author", 2, "pubmed_agent"}};
        try {
            build_rulebase(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "responsibility");
            CHECK(e.detail().find("conflicting_responsibility") != std::string::npos);
        }
    }

    SUBCASE("public_interface must be derivable") {
        AgentConfig cfg = source_config("src", rules, {{"nonexistent", 3}});
        try {
            build_rulebase(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "public_interface");
            CHECK(e.detail().find("nonexistent/3") != std::string::npos);
        }
    }

    SUBCASE("missing rulebase file names the field") {
        AgentConfig cfg = source_config("src", tmp.dir / "absent.rr", {});
        try {
            build_rulebase(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "rulebase_path");
        }
    }

    SUBCASE("unstratified rulebases are rejected") {
        AgentConfig cfg =
            source_config("src", tmp.write("bad.rr", "p(X) :- q(X), not p(X). q(a)."), {});
        CHECK_THROWS_AS(build_rulebase(cfg), ConfigError);
    }

    SUBCASE("syntax errors carry file and position") {
        AgentConfig cfg = source_config("src", tmp.write("syn.rr", "p(a"), {});
        try {
            build_rulebase(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.detail().find(":1:") != std::string::npos);
        }
    }
}

TEST_CASE("source configs reject responsibility tables") {
    Scratch tmp;
    tmp.write("s.rr", "s(a).");
    const std::string path = tmp.write("bad_source.json", R"({
        "name": "src", "role": "source", "rulebase": "s.rr",
        "public_interface": ["s/1"],
        "responsibility": [{"predicate": "t", "arity": 1, "agent": "x"}]
    })");
    CHECK_THROWS_AS(load_agent_config(path), ConfigError);
}

namespace {

/// Broker plus a source agent (facts s(a), s(b); t/1 private) and an
/// organizational agent with both delegate- and ask-based rules.
struct MiniTopology {
    Scratch tmp;
    std::unique_ptr<bus::Broker> broker;
    std::unique_ptr<Agent> src;
    std::unique_ptr<Agent> org;
    std::unique_ptr<QueryClient> client;

    MiniTopology() {
        broker = bus::Broker::start({});
        auto connect = [this] { return broker->connect_inproc(); };

        AgentConfig src_cfg = source_config(
            "src_agent", tmp.write("src.rr", "s(a). s(b). t(hidden). leak(X,Y) :- base(X). base(a)."),
            {{"s", 1}, {"leak", 2}});
        src = Agent::start(src_cfg, connect);

        AgentConfig org_cfg;
        org_cfg.name = "org";
        org_cfg.role = AgentRole::organizational;
        org_cfg.rulebase_path = tmp.write(
            "org.rr", "via_delegate(X) :- delegate(s(X)). via_ask(X) :- ask(src_agent, s(X)).");
        org_cfg.public_interface = {{"via_delegate", 1}, {"via_ask", 1}};
        org_cfg.responsibility = {{"s", 1, "src_agent"}};
        org_cfg.query_timeout = 2000ms;
        org = Agent::start(org_cfg, connect);

        client = std::make_unique<QueryClient>(connect(), "client");
    }
};

} // namespace

TEST_CASE("queries against a loaded agent's exported predicates") {
    MiniTopology topo;
    const QueryResult r =
        topo.client->ask("src_agent", parse_term("s(X)"), 2000ms);
    CHECK(r.status == QueryResult::Status::completed);
    REQUIRE(r.answers.size() == 2);
    CHECK(r.answers[0][0].second == Term::constant("a"));
    CHECK(r.answers[1][0].second == Term::constant("b"));
}

TEST_CASE("delegate and ask produce identical answer sets end to end") {
    MiniTopology topo;
    const auto d = rr::testing::answer_keys(
        topo.client->ask("org", parse_term("via_delegate(X)"), 2000ms));
    const auto a = rr::testing::answer_keys(
        topo.client->ask("org", parse_term("via_ask(X)"), 2000ms));
    CHECK(d == a);
    CHECK(d.size() == 2);
}

TEST_CASE("non-exported predicates are hidden") {
    MiniTopology topo;
    const QueryResult r = topo.client->ask("src_agent", parse_term("t(X)"), 2000ms);
    CHECK(r.status == QueryResult::Status::error);
    CHECK(r.error_code == "not_exported");
    CHECK(r.error_detail == "t/1");

    // builtins are not part of any public interface
    const QueryResult b =
        topo.client->ask("src_agent", parse_term("count(X, s(X), N)"), 2000ms);
    CHECK(b.status == QueryResult::Status::error);
    CHECK(b.error_code == "not_exported");
}

TEST_CASE("zero-solution queries finish with no answer messages") {
    MiniTopology topo;
    const QueryResult r = topo.client->ask("src_agent", parse_term("s(zzz)"), 2000ms);
    CHECK(r.status == QueryResult::Status::completed);
    CHECK(r.answers.empty());
}

TEST_CASE("ground queries answer once with empty bindings") {
    MiniTopology topo;
    const QueryResult r = topo.client->ask("src_agent", parse_term("s(a)"), 2000ms);
    CHECK(r.status == QueryResult::Status::completed);
    REQUIRE(r.answers.size() == 1);
    CHECK(r.answers[0].empty());
}

TEST_CASE("non-ground answers are refused at the wire") {
    MiniTopology topo;
    const QueryResult r = topo.client->ask("src_agent", parse_term("leak(A,B)"), 2000ms);
    CHECK(r.status == QueryResult::Status::error);
    CHECK(r.error_code == "non_ground_answer");
}

TEST_CASE("perform_ask streams remote answers and errors") {
    MiniTopology topo;
    const auto deadline = bus::Clock::now() + 2000ms;

    std::vector<std::string> got;
    topo.org->perform_ask("src_agent", parse_term("s(X)"), deadline,
                          [&](const std::map<std::string, Term>& bindings) {
                              got.push_back(bindings.at("X").to_string());
                              return true;
                          });
    CHECK(got == std::vector<std::string>{"a", "b"});

    // ground goal: one empty-binding answer
    int empty_answers = 0;
    topo.org->perform_ask("src_agent", parse_term("s(a)"), deadline,
                          [&](const std::map<std::string, Term>& bindings) {
                              CHECK(bindings.empty());
                              ++empty_answers;
                              return true;
                          });
    CHECK(empty_answers == 1);

    try {
        topo.org->perform_ask("nowhere", parse_term("s(X)"), deadline,
                              [](const auto&) { return true; });
        FAIL("expected RemoteError");
    } catch (const engine::RemoteError& e) {
        CHECK(e.code() == "unknown_receiver");
    }
}

TEST_CASE("delegation without a responsible agent surfaces as an error answer") {
    MiniTopology topo;
    Scratch tmp;
    AgentConfig org2;
    org2.name = "org2";
    org2.role = AgentRole::organizational;
    org2.rulebase_path = tmp.write("org2.rr", "orphan(X) :- delegate(unrouted(X)).");
    org2.public_interface = {{"orphan", 1}};
    org2.query_timeout = 2000ms;
    auto agent2 = Agent::start(org2, [&] { return topo.broker->connect_inproc(); });

    const QueryResult r = topo.client->ask("org2", parse_term("orphan(X)"), 2000ms);
    CHECK(r.status == QueryResult::Status::error);
    CHECK(r.error_code == "no_responsible_agent");
    CHECK(r.error_detail == "unrouted/1");
}

TEST_CASE("ask timeout propagates as an error answer") {
    MiniTopology topo;
    Scratch tmp;
    // mute registers but never answers; org3 asks it.
    auto mute_conn = topo.broker->connect_inproc();
    REQUIRE(mute_conn->send_line(msg::encode(msg::make_register("m1", "mute"))));
    (void)mute_conn->recv_line(bus::Clock::now() + 2000ms);

    AgentConfig org3;
    org3.name = "org3";
    org3.role = AgentRole::organizational;
    org3.rulebase_path = tmp.write("org3.rr", "stuck(X) :- ask(mute, s(X)).");
    org3.public_interface = {{"stuck", 1}};
    org3.query_timeout = 300ms;
    auto agent3 = Agent::start(org3, [&] { return topo.broker->connect_inproc(); });

    const QueryResult r = topo.client->ask("org3", parse_term("stuck(X)"), 5000ms);
    CHECK(r.status == QueryResult::Status::error);
    CHECK(r.error_code == "timeout");
}

TEST_CASE("crash isolation: a rejected query leaves the agent intact") {
    MiniTopology topo;
    const auto before = rr::testing::answer_keys(
        topo.client->ask("src_agent", parse_term("s(X)"), 2000ms));

    CHECK(topo.client->ask("src_agent", parse_term("t(X)"), 2000ms).status ==
          QueryResult::Status::error);
    CHECK(topo.client->ask("src_agent", parse_term("leak(A,B)"), 2000ms).status ==
          QueryResult::Status::error);

    const auto after = rr::testing::answer_keys(
        topo.client->ask("src_agent", parse_term("s(X)"), 2000ms));
    CHECK(before == after);
}

TEST_CASE("conjunction queries join across exported predicates") {
    MiniTopology topo;
    const QueryResult r = topo.client->ask(
        "src_agent", Term::compound("and", {parse_term("s(X)"), parse_term("leak(X,_Y)")}),
        2000ms);
    // leak/2's second argument never grounds, but _Y is hidden, so the only
    // reported variable is X and the answer stays ground.
    CHECK(r.status == QueryResult::Status::completed);
    REQUIRE(r.answers.size() == 1);
    CHECK(r.answers[0][0].second == Term::constant("a"));
}
