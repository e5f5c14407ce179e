// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/term.hpp"

#include <map>
#include <vector>

namespace rr {

/// A body element: an atom with a polarity. Negated literals are resolved
/// by negation as failure.
struct Literal {
    bool negated = false;
    Term atom;

    static Literal pos(Term atom) { return {false, std::move(atom)}; }
    static Literal neg(Term atom) { return {true, std::move(atom)}; }

    std::string to_string() const {
        return negated ? "not " + atom.to_string() : atom.to_string();
    }

    friend bool operator==(const Literal& a, const Literal& b) {
        return a.negated == b.negated && a.atom == b.atom;
    }
};

/// `head :- body.`; an empty body makes it a fact.
struct Rule {
    Term head;
    std::vector<Literal> body;

    bool is_fact() const { return body.empty(); }

    std::string to_string() const;
};

/// Clause store indexed by (predicate name, arity). Lookup preserves the
/// textual definition order. Different arities of the same name are
/// distinct predicates.
class RuleBase {
public:
    void add(Rule rule);
    void add_fact(Term atom) { add(Rule{std::move(atom), {}}); }

    /// Clauses for one predicate, in source order; empty when unknown.
    const std::vector<Rule>& clauses(const PredId& pred) const;

    /// All predicates with at least one clause, ordered by (name, arity).
    std::vector<PredId> predicates() const;

    bool defines(const PredId& pred) const { return by_pred_.count(pred) > 0; }

    std::size_t size() const { return total_; }

    /// Appends every clause of `other`, as if its source followed ours.
    void absorb(const RuleBase& other);

    /// Iteration over all clauses grouped by predicate.
    const std::map<PredId, std::vector<Rule>>& grouped() const { return by_pred_; }

private:
    std::map<PredId, std::vector<Rule>> by_pred_;
    std::size_t total_ = 0;
};

} // namespace rr
