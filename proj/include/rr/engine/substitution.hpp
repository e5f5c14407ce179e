// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/term.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rr::engine {

/// A list whose tail variable is bound to a non-list; cannot be represented
/// as a term.
class ImproperListError : public std::runtime_error {
public:
    explicit ImproperListError(const std::string& what) : std::runtime_error(what) {}
};

/// Variable-name → term binding map. Bindings may chain through other
/// variables; `apply` resolves chains fully, so applying its output again
/// changes nothing.
class Substitution {
public:
    bool contains(const std::string& name) const { return map_.count(name) > 0; }

    const Term* lookup(const std::string& name) const {
        auto it = map_.find(name);
        return it == map_.end() ? nullptr : &it->second;
    }

    void bind(std::string name, Term value) { map_.insert_or_assign(std::move(name), std::move(value)); }

    void erase(const std::string& name) { map_.erase(name); }

    std::size_t size() const { return map_.size(); }

    /// Resolves top-level variable chains; does not descend into arguments.
    Term walk(Term t) const;

    /// Full application: every bound variable is replaced, recursively;
    /// bound list tails are spliced in. Throws ImproperListError if a tail
    /// resolves to a non-list.
    Term apply(const Term& t) const;

    bool is_ground(const Term& t) const { return apply(t).is_ground(); }

private:
    std::unordered_map<std::string, Term> map_;
};

/// Bindings recorded during unification so they can be undone on backtrack.
using Trail = std::vector<std::string>;

void undo_to(Substitution& s, Trail& trail, std::size_t mark);

/// Extends `s` in place with the most general unifier of a and b; records
/// new bindings on the trail. Occurs check enabled. On failure, bindings
/// made so far remain on the trail for the caller to undo.
bool unify_in_place(const Term& a, const Term& b, Substitution& s, Trail& trail);

/// Most general unifier extending `within`, or nullopt. Applying the result
/// to both terms yields structurally identical terms.
std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& within);

} // namespace rr::engine
