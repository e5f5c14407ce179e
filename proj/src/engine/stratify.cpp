// SPDX-License-Identifier: Apache-2.0
#include "rr/engine/stratify.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace rr::engine {

namespace {

struct Edge {
    PredId from;
    PredId to;
    bool negative;
};

void collect_deps(const PredId& head, const Term& goal, bool negative, std::vector<Edge>& edges) {
    if (!goal.is_atom())
        return;
    const std::string& name = goal.pred_name();
    if (name == "and") {
        for (const Term& arg : goal.args())
            collect_deps(head, arg, negative, edges);
        return;
    }
    if (name == "not" && goal.pred_arity() == 1) {
        collect_deps(head, goal.args()[0], true, edges);
        return;
    }
    if ((name == "findall" || name == "count") && goal.pred_arity() == 3) {
        collect_deps(head, goal.args()[1], true, edges);
        return;
    }
    if (name == "ask" || name == "delegate")
        return; // remote goals are stratification-opaque
    if (name == "=" || name == "==" || name == "<" || name == "<=" || name == ">" ||
        name == ">=" || name == "is")
        return;
    edges.push_back({head, PredId::of(goal), negative});
}

struct Tarjan {
    const std::map<PredId, std::vector<std::pair<PredId, bool>>>& adj;
    std::map<PredId, int> index, low, comp;
    std::vector<PredId> stack;
    std::set<PredId> on_stack;
    int next_index = 0;
    int next_comp = 0;

    void run(const PredId& v) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack.insert(v);
        auto it = adj.find(v);
        if (it != adj.end()) {
            for (const auto& [w, neg] : it->second) {
                if (!index.count(w)) {
                    run(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on_stack.count(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
            }
        }
        if (low[v] == index[v]) {
            while (true) {
                PredId w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp[w] = next_comp;
                if (w == v)
                    break;
            }
            ++next_comp;
        }
    }
};

} // namespace

std::string StratifyResult::describe() const {
    if (ok)
        return "stratified";
    std::string out = "negative cycle: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i)
            out += " -> ";
        out += cycle[i].to_string();
    }
    out += " -> " + cycle.front().to_string();
    return out;
}

StratifyResult check_stratified(const RuleBase& rb) {
    std::vector<Edge> edges;
    std::set<PredId> nodes;
    for (const auto& [pred, rules] : rb.grouped()) {
        nodes.insert(pred);
        for (const Rule& r : rules)
            for (const Literal& lit : r.body)
                collect_deps(pred, lit.atom, lit.negated, edges);
    }

    std::map<PredId, std::vector<std::pair<PredId, bool>>> adj;
    for (const Edge& e : edges) {
        adj[e.from].emplace_back(e.to, e.negative);
        nodes.insert(e.from);
        nodes.insert(e.to);
    }

    Tarjan tarjan{adj, {}, {}, {}, {}, {}, 0, 0};
    for (const PredId& n : nodes)
        if (!tarjan.index.count(n))
            tarjan.run(n);

    for (const Edge& e : edges) {
        if (!e.negative || tarjan.comp[e.from] != tarjan.comp[e.to])
            continue;
        // Cycle: from -(neg)-> to -> ... -> from, found by BFS inside the SCC.
        StratifyResult bad;
        bad.ok = false;
        bad.cycle.push_back(e.from);
        if (e.to != e.from) {
            std::map<PredId, PredId> parent; // BFS tree rooted at e.to
            std::deque<PredId> queue{e.to};
            parent.emplace(e.to, e.to);
            while (!queue.empty() && !parent.count(e.from)) {
                PredId v = queue.front();
                queue.pop_front();
                auto it = adj.find(v);
                if (it == adj.end())
                    continue;
                for (const auto& [w, neg] : it->second) {
                    (void)neg;
                    if (tarjan.comp[w] != tarjan.comp[e.from] || parent.count(w))
                        continue;
                    parent.emplace(w, v);
                    queue.push_back(w);
                }
            }
            std::vector<PredId> to_from_path; // e.to ... e.from
            for (PredId cur = e.from;; cur = parent.at(cur)) {
                to_from_path.push_back(cur);
                if (cur == e.to)
                    break;
            }
            std::reverse(to_from_path.begin(), to_from_path.end());
            to_from_path.pop_back(); // drop the trailing e.from; the cycle wraps around
            for (const PredId& p : to_from_path)
                bad.cycle.push_back(p);
        }
        return bad;
    }
    return {};
}

} // namespace rr::engine
