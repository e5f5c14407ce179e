// SPDX-License-Identifier: Apache-2.0
#include "rr/rulebase.hpp"

namespace rr {

std::string Rule::to_string() const {
    std::string out = head.to_string();
    if (!body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (i)
                out += ", ";
            out += body[i].to_string();
        }
    }
    out += ".";
    return out;
}

void RuleBase::add(Rule rule) {
    by_pred_[PredId::of(rule.head)].push_back(std::move(rule));
    ++total_;
}

const std::vector<Rule>& RuleBase::clauses(const PredId& pred) const {
    static const std::vector<Rule> empty;
    auto it = by_pred_.find(pred);
    return it == by_pred_.end() ? empty : it->second;
}

std::vector<PredId> RuleBase::predicates() const {
    std::vector<PredId> out;
    out.reserve(by_pred_.size());
    for (const auto& [pred, _] : by_pred_)
        out.push_back(pred);
    return out;
}

void RuleBase::absorb(const RuleBase& other) {
    for (const auto& [pred, rules] : other.by_pred_)
        for (const Rule& r : rules)
            add(r);
}

} // namespace rr
