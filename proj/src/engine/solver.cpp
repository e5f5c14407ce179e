// SPDX-License-Identifier: Apache-2.0
#include "rr/engine/solver.hpp"

#include <limits>
#include <memory>
#include <set>

namespace rr::engine {

const char* to_string(EngineErrc code) {
    switch (code) {
    case EngineErrc::non_ground_negation: return "non_ground_negation";
    case EngineErrc::builtin_type: return "builtin_type";
    case EngineErrc::no_responsible_agent: return "no_responsible_agent";
    }
    return "unknown";
}

EngineError::EngineError(EngineErrc code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code), detail_(std::move(detail)) {}

RemoteError::RemoteError(std::string code, std::string detail)
    : std::runtime_error("remote error " + code + ": " + detail),
      code_(std::move(code)), detail_(std::move(detail)) {}

std::string Answer::key() const {
    std::string out;
    for (const auto& [name, term] : bindings) {
        out += name;
        out.push_back('=');
        term.serialize(out);
        out.push_back(';');
    }
    return out;
}

namespace {

bool hidden_var_name(const std::string& name) { return !name.empty() && name[0] == '_'; }

bool builtin_name(const std::string& n) {
    return n == "=" || n == "==" || n == "<" || n == "<=" || n == ">" || n == ">=" ||
           n == "is" || n == "findall" || n == "count" || n == "not" || n == "ask" ||
           n == "delegate";
}

struct GoalNode {
    Literal lit;
    std::shared_ptr<const GoalNode> next;
};
using Goals = std::shared_ptr<const GoalNode>;

Goals push_goals(const std::vector<Literal>& lits, Goals rest) {
    for (auto it = lits.rbegin(); it != lits.rend(); ++it)
        rest = std::make_shared<const GoalNode>(GoalNode{*it, rest});
    return rest;
}

[[noreturn]] void type_error(const std::string& detail) {
    throw EngineError(EngineErrc::builtin_type, detail);
}

class Prover {
public:
    Prover(const RuleBase& rb, const SolveLimits& limits, RemoteAsk* remote)
        : rb_(rb), limits_(limits), remote_(remote) {}

    using Cont = std::function<bool()>;

    // Proves the goal list under the current substitution; calls k once per
    // derivation. Returns false only when enumeration was aborted.
    bool prove(const Goals& goals, std::size_t depth, const Cont& k) {
        if (!goals)
            return k();
        const Literal& lit = goals->lit;
        const Goals& rest = goals->next;
        if (lit.negated)
            return solve_naf(lit.atom, rest, depth, k);
        const Term atom = subst_.walk(lit.atom);
        if (!atom.is_atom())
            type_error("goal is not an atom: " + subst_.apply(atom).to_string());
        if (atom.is_compound() && atom.functor() == "and")
            return prove(push_goals(goal_to_literals(atom), rest), depth, k);
        if (builtin_name(atom.pred_name()))
            return eval_builtin(atom, rest, depth, k);
        return resolve_user(atom, rest, depth, k);
    }

    Substitution subst_;
    std::uint64_t steps_ = 0;
    bool depth_limited_ = false;

private:
    bool resolve_user(const Term& atom, const Goals& rest, std::size_t depth, const Cont& k) {
        if (depth >= limits_.max_depth) {
            depth_limited_ = true;
            return true;
        }
        const std::vector<Rule>& clauses = rb_.clauses(PredId::of(atom));
        for (const Rule& clause : clauses) {
            ++steps_;
            Rule renamed = rename_clause(clause);
            const std::size_t mark = trail_.size();
            if (unify_in_place(atom, renamed.head, subst_, trail_)) {
                if (!prove(push_goals(renamed.body, rest), depth + 1, k))
                    return false;
            }
            undo_to(subst_, trail_, mark);
        }
        return true;
    }

    Rule rename_clause(const Rule& clause) {
        std::vector<Term> vars;
        clause.head.collect_vars(vars);
        for (const Literal& l : clause.body)
            l.atom.collect_vars(vars);
        if (vars.empty())
            return clause;
        Substitution renaming;
        const std::uint64_t serial = rename_serial_++;
        for (const Term& v : vars)
            renaming.bind(v.var_name(),
                          Term::var(v.var_name() + "_r" + std::to_string(serial),
                                    v.var_anonymous()));
        Rule out{renaming.apply(clause.head), {}};
        out.body.reserve(clause.body.size());
        for (const Literal& l : clause.body)
            out.body.push_back({l.negated, renaming.apply(l.atom)});
        return out;
    }

    // Negation as failure. The goal must be ground; succeeds exactly when
    // the sub-proof yields nothing. A depth-pruned sub-proof cannot assert
    // absence, so the whole branch fails instead (flag stays set).
    bool solve_naf(const Term& goalTerm, const Goals& rest, std::size_t depth, const Cont& k) {
        ++steps_;
        const Term goal = subst_.apply(goalTerm);
        if (!goal.is_ground())
            throw EngineError(EngineErrc::non_ground_negation, goal.to_string());
        bool found = false;
        const bool saved_limit = depth_limited_;
        depth_limited_ = false;
        const std::size_t mark = trail_.size();
        prove(push_goals(goal_to_literals(goal), nullptr), depth + 1, [&] {
            found = true;
            return false; // one witness is enough
        });
        undo_to(subst_, trail_, mark);
        const bool pruned = depth_limited_;
        depth_limited_ = saved_limit || pruned;
        if (found)
            return true;
        if (pruned)
            return true; // cannot trust the failure; skip this branch
        return prove(rest, depth, k);
    }

    bool eval_builtin(const Term& atom, const Goals& rest, std::size_t depth, const Cont& k) {
        ++steps_;
        const std::string& name = atom.pred_name();
        const std::size_t arity = atom.pred_arity();
        auto need = [&](std::size_t n) {
            if (arity != n)
                type_error(name + "/" + std::to_string(arity) + " is not a builtin");
        };
        if (name == "=") {
            need(2);
            const std::size_t mark = trail_.size();
            bool cont = true;
            if (unify_in_place(atom.args()[0], atom.args()[1], subst_, trail_))
                cont = prove(rest, depth, k);
            if (!cont)
                return false;
            undo_to(subst_, trail_, mark);
            return true;
        }
        if (name == "==") {
            need(2);
            Term a = subst_.apply(atom.args()[0]);
            Term b = subst_.apply(atom.args()[1]);
            if (!a.is_ground() || !b.is_ground())
                type_error("== needs ground operands, got " + a.to_string() + " == " +
                           b.to_string());
            return a.equals(b) ? prove(rest, depth, k) : true;
        }
        if (name == "<" || name == "<=" || name == ">" || name == ">=") {
            need(2);
            Term a = subst_.apply(atom.args()[0]);
            Term b = subst_.apply(atom.args()[1]);
            if (!a.is_integer() || !b.is_integer())
                type_error("comparison needs ground integers, got " + a.to_string() + " " +
                           name + " " + b.to_string());
            const std::int64_t x = a.int_value();
            const std::int64_t y = b.int_value();
            const bool ok = name == "<" ? x < y : name == "<=" ? x <= y : name == ">" ? x > y
                                                                                      : x >= y;
            return ok ? prove(rest, depth, k) : true;
        }
        if (name == "is") {
            need(2);
            const Term value = Term::integer(eval_arith(atom.args()[1]));
            const std::size_t mark = trail_.size();
            bool cont = true;
            if (unify_in_place(atom.args()[0], value, subst_, trail_))
                cont = prove(rest, depth, k);
            if (!cont)
                return false;
            undo_to(subst_, trail_, mark);
            return true;
        }
        if (name == "not") {
            need(1);
            return solve_naf(atom.args()[0], rest, depth, k);
        }
        if (name == "findall" || name == "count") {
            need(3);
            return eval_aggregate(name == "count", atom, rest, depth, k);
        }
        if (name == "ask") {
            need(2);
            Term agent = subst_.apply(atom.args()[0]);
            if (!agent.is_constant())
                type_error("ask target must be an agent name, got " + agent.to_string());
            return remote_call(agent.symbol(), atom.args()[1], rest, depth, k);
        }
        if (name == "delegate") {
            need(1);
            if (!remote_)
                type_error("delegate is unavailable without a remote handle");
            const Term goal = subst_.apply(atom.args()[0]);
            if (!goal.is_atom())
                type_error("delegate goal must be an atom, got " + goal.to_string());
            const PredId pred = PredId::of(goal);
            std::optional<std::string> target = remote_->responsible_for(pred);
            if (!target)
                throw EngineError(EngineErrc::no_responsible_agent, pred.to_string());
            return remote_call(*target, atom.args()[0], rest, depth, k);
        }
        type_error("unhandled builtin " + name);
    }

    // Aggregation with grouping: free, named variables of the goal that do
    // not occur in the template act as group witnesses; one solution is
    // produced per witness tuple, in first-derivation order. Without
    // witnesses this is plain findall (succeeding with an empty collection).
    bool eval_aggregate(bool count_only, const Term& atom, const Goals& rest, std::size_t depth,
                        const Cont& k) {
        const Term& tmpl = atom.args()[0];
        const Term goal = subst_.apply(atom.args()[1]);
        const Term& out = atom.args()[2];
        const std::vector<Literal> inner = goal_to_literals(goal);

        std::vector<Term> goal_vars;
        goal.collect_vars(goal_vars);
        std::vector<Term> tmpl_vars;
        subst_.apply(tmpl).collect_vars(tmpl_vars);
        std::vector<Term> witnesses;
        for (const Term& v : goal_vars) {
            if (v.var_anonymous() || hidden_var_name(v.var_name()))
                continue;
            bool in_tmpl = false;
            for (const Term& t : tmpl_vars)
                if (t.var_name() == v.var_name())
                    in_tmpl = true;
            if (!in_tmpl)
                witnesses.push_back(v);
        }

        struct Group {
            std::vector<Term> witness_values;
            std::vector<Term> instances;
        };
        std::vector<Group> groups;
        std::map<std::string, std::size_t> group_index;

        const bool saved_limit = depth_limited_;
        depth_limited_ = false;
        const std::size_t mark = trail_.size();
        prove(push_goals(inner, nullptr), depth + 1, [&] {
            std::string key;
            std::vector<Term> values;
            values.reserve(witnesses.size());
            for (const Term& w : witnesses) {
                Term v = subst_.apply(w);
                if (!v.is_ground())
                    type_error("aggregation witness " + w.var_name() + " is not ground");
                values.push_back(v);
                v.serialize(key);
                key.push_back(';');
            }
            auto [it, inserted] = group_index.try_emplace(key, groups.size());
            if (inserted)
                groups.push_back(Group{std::move(values), {}});
            groups[it->second].instances.push_back(freshen(subst_.apply(tmpl)));
            return true;
        });
        undo_to(subst_, trail_, mark);
        const bool pruned = depth_limited_;
        depth_limited_ = saved_limit || pruned;
        if (pruned)
            return true; // incomplete collection would be wrong; fail the branch

        auto emit = [&](const Group& g) -> int {
            const std::size_t m = trail_.size();
            bool matched = true;
            for (std::size_t i = 0; i < witnesses.size() && matched; ++i)
                matched = unify_in_place(witnesses[i], g.witness_values[i], subst_, trail_);
            if (matched) {
                Term result = count_only
                                  ? Term::integer(static_cast<std::int64_t>(g.instances.size()))
                                  : Term::list(g.instances);
                matched = unify_in_place(out, result, subst_, trail_);
            }
            if (matched && !prove(rest, depth, k))
                return -1; // aborted
            undo_to(subst_, trail_, m);
            return 0;
        };

        if (witnesses.empty()) {
            Group all;
            if (!groups.empty())
                all = groups.front();
            return emit(all) != -1;
        }
        for (const Group& g : groups)
            if (emit(g) == -1)
                return false;
        return true;
    }

    bool remote_call(const std::string& target, const Term& goalArg, const Goals& rest,
                     std::size_t depth, const Cont& k) {
        if (!remote_)
            type_error("ask is unavailable without a remote handle");
        const Term goal = subst_.apply(goalArg);
        if (!goal.is_atom())
            type_error("ask goal must be an atom, got " + goal.to_string());
        std::vector<Term> vars;
        goal.collect_vars(vars);
        std::vector<std::string> visible;
        for (const Term& v : vars)
            if (!v.var_anonymous() && !hidden_var_name(v.var_name()))
                visible.push_back(v.var_name());

        bool aborted = false;
        remote_->ask(target, goal, [&](const std::map<std::string, Term>& bindings) {
            const std::size_t mark = trail_.size();
            bool matched = true;
            for (const std::string& name : visible) {
                auto it = bindings.find(name);
                if (it == bindings.end() || !it->second.is_ground())
                    throw RemoteError("non_ground_answer",
                                      "remote answer leaves " + name + " unbound");
                if (!unify_in_place(Term::var(name), it->second, subst_, trail_)) {
                    matched = false;
                    break;
                }
            }
            if (matched && !prove(rest, depth, k)) {
                aborted = true;
                return false;
            }
            undo_to(subst_, trail_, mark);
            return true;
        });
        return !aborted;
    }

    std::int64_t eval_arith(const Term& t) {
        const Term w = subst_.walk(t);
        if (w.is_integer())
            return w.int_value();
        if (w.is_compound() && w.arity() == 2) {
            const std::string& op = w.functor();
            if (op == "+" || op == "-" || op == "*" || op == "div" || op == "mod") {
                const std::int64_t a = eval_arith(w.args()[0]);
                const std::int64_t b = eval_arith(w.args()[1]);
                std::int64_t r = 0;
                if (op == "+") {
                    if (__builtin_add_overflow(a, b, &r))
                        type_error("integer overflow in +");
                    return r;
                }
                if (op == "-") {
                    if (__builtin_sub_overflow(a, b, &r))
                        type_error("integer overflow in -");
                    return r;
                }
                if (op == "*") {
                    if (__builtin_mul_overflow(a, b, &r))
                        type_error("integer overflow in *");
                    return r;
                }
                if (b == 0)
                    type_error("division by zero");
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1)
                    type_error("integer overflow in " + op);
                return op == "div" ? a / b : a % b;
            }
        }
        type_error("arithmetic over non-numeric term " + subst_.apply(w).to_string());
    }

    Term freshen(const Term& t) {
        std::vector<Term> vars;
        t.collect_vars(vars);
        if (vars.empty())
            return t;
        Substitution renaming;
        const std::uint64_t serial = rename_serial_++;
        for (const Term& v : vars)
            renaming.bind(v.var_name(),
                          Term::var(v.var_name() + "_f" + std::to_string(serial),
                                    v.var_anonymous()));
        return renaming.apply(t);
    }

    const RuleBase& rb_;
    SolveLimits limits_;
    RemoteAsk* remote_;
    Trail trail_;
    std::uint64_t rename_serial_ = 0;
};

} // namespace

bool is_builtin_goal(const Term& atom) { return builtin_name(atom.pred_name()); }

std::vector<Literal> goal_to_literals(const Term& goal) {
    std::vector<Literal> out;
    const std::function<void(const Term&)> flatten = [&](const Term& t) {
        if (t.is_compound() && t.functor() == "and") {
            for (const Term& arg : t.args())
                flatten(arg);
            return;
        }
        if (t.is_compound() && t.functor() == "not" && t.arity() == 1) {
            const Term& inner = t.args()[0];
            if (!inner.is_atom())
                throw EngineError(EngineErrc::builtin_type,
                                  "negated goal must be an atom: " + inner.to_string());
            out.push_back(Literal::neg(inner));
            return;
        }
        if (!t.is_atom())
            throw EngineError(EngineErrc::builtin_type, "goal must be an atom: " + t.to_string());
        out.push_back(Literal::pos(t));
    };
    flatten(goal);
    return out;
}

SolveResult solve(const RuleBase& rb, const std::vector<Literal>& goals,
                  const SolveLimits& limits, RemoteAsk* remote, const AnswerSink& sink) {
    Prover prover(rb, limits, remote);

    std::vector<std::string> all_names;
    for (const Literal& lit : goals)
        lit.atom.collect_var_names(all_names);
    std::vector<std::string> query_vars;
    for (const std::string& n : all_names)
        if (!n.empty() && n[0] != '_')
            query_vars.push_back(n);

    SolveResult result;
    std::set<std::string> seen;
    Goals goal_list;
    for (auto it = goals.rbegin(); it != goals.rend(); ++it)
        goal_list = std::make_shared<const GoalNode>(GoalNode{*it, goal_list});

    try {
        prover.prove(goal_list, 0, [&] {
            Answer a;
            for (const std::string& name : query_vars) {
                Term value = prover.subst_.apply(Term::var(name));
                // A variable still bound to itself carries no information
                // (e.g. the template variable of an aggregation call).
                if (value.is_var() && value.var_name() == name)
                    continue;
                a.bindings.emplace(name, std::move(value));
            }
            if (!seen.insert(a.key()).second)
                return true;
            ++result.answers;
            if (!sink(a))
                return false;
            if (limits.max_answers && result.answers >= *limits.max_answers)
                return false;
            return true;
        });
    } catch (const ImproperListError& e) {
        throw EngineError(EngineErrc::builtin_type, e.what());
    }
    result.depth_limited = prover.depth_limited_;
    result.steps = prover.steps_;
    return result;
}

std::vector<Answer> solve_all(const RuleBase& rb, const std::vector<Literal>& goals,
                              const SolveLimits& limits, RemoteAsk* remote) {
    std::vector<Answer> out;
    solve(rb, goals, limits, remote, [&](const Answer& a) {
        out.push_back(a);
        return true;
    });
    return out;
}

} // namespace rr::engine
