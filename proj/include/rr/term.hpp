// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rr {

enum class TermKind { Variable, Constant, Integer, Str, List, Compound };

/// Immutable first-order term. Cheap to copy (shared structure).
///
/// Lists are kept in flattened form: an item vector plus an optional
/// variable tail, so `[a,b|T]` is one node. Zero-arity compounds do not
/// exist; they are constants.
class Term {
public:
    Term() = delete;

    static Term var(std::string name, bool anonymous = false);
    static Term constant(std::string symbol);
    static Term integer(std::int64_t value);
    static Term str(std::string value);
    static Term list(std::vector<Term> items);
    static Term list(std::vector<Term> items, Term tail_var);
    static Term compound(std::string functor, std::vector<Term> args);

    TermKind kind() const { return node_->kind; }
    bool is_var() const { return kind() == TermKind::Variable; }
    bool is_constant() const { return kind() == TermKind::Constant; }
    bool is_integer() const { return kind() == TermKind::Integer; }
    bool is_str() const { return kind() == TermKind::Str; }
    bool is_list() const { return kind() == TermKind::List; }
    bool is_compound() const { return kind() == TermKind::Compound; }
    /// Constants and compounds are the only terms allowed as goals/heads.
    bool is_atom() const { return is_constant() || is_compound(); }

    const std::string& var_name() const { return node_->text; }
    bool var_anonymous() const { return node_->anonymous; }
    const std::string& symbol() const { return node_->text; }
    std::int64_t int_value() const { return node_->number; }
    const std::string& str_value() const { return node_->text; }
    const std::vector<Term>& items() const { return node_->args; }
    /// Tail variable of an open list, nullptr for proper lists.
    const Term* list_tail() const { return node_->tail.empty() ? nullptr : node_->tail.data(); }
    const std::string& functor() const { return node_->text; }
    const std::vector<Term>& args() const { return node_->args; }
    std::size_t arity() const { return node_->args.size(); }

    /// Predicate name of an atom: symbol for constants, functor for compounds.
    const std::string& pred_name() const { return node_->text; }
    std::size_t pred_arity() const { return is_compound() ? arity() : 0; }

    /// Structural equality; variable anonymity flags are not part of the
    /// structure and are ignored.
    bool equals(const Term& other) const;

    bool is_ground() const;

    /// Collects variable names in first-occurrence order (depth first,
    /// left to right). Duplicates are skipped.
    void collect_var_names(std::vector<std::string>& out) const;
    std::vector<std::string> var_names() const;

    /// Same order, but yields the variable terms themselves (name plus
    /// anonymity flag), deduplicated by name.
    void collect_vars(std::vector<Term>& out) const;

    /// Canonical text form: no whitespace, `f(a,b)`, `[a,b|T]`, quoted
    /// strings with `\"`, `\\` and `\n` escapes, base-10 integers.
    void serialize(std::string& out) const;
    std::string to_string() const;

private:
    struct Node {
        TermKind kind;
        std::string text;        // variable name, symbol, functor or string value
        std::int64_t number = 0;
        bool anonymous = false;  // variable came from a `_` token
        std::vector<Term> args;  // compound args or list items
        std::vector<Term> tail;  // empty, or exactly the list tail variable
    };

    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

inline bool operator==(const Term& a, const Term& b) { return a.equals(b); }
inline bool operator!=(const Term& a, const Term& b) { return !a.equals(b); }

/// (name, arity) key identifying a predicate. Constants have arity 0.
struct PredId {
    std::string name;
    std::size_t arity = 0;

    static PredId of(const Term& atom) { return {atom.pred_name(), atom.pred_arity()}; }

    std::string to_string() const { return name + "/" + std::to_string(arity); }

    friend bool operator==(const PredId&, const PredId&) = default;
    friend auto operator<=>(const PredId&, const PredId&) = default;
};

} // namespace rr
