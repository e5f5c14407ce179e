// SPDX-License-Identifier: Apache-2.0
#include "rr/engine/substitution.hpp"

namespace rr::engine {

Term Substitution::walk(Term t) const {
    while (t.is_var()) {
        const Term* bound = lookup(t.var_name());
        if (!bound)
            return t;
        t = *bound;
    }
    return t;
}

Term Substitution::apply(const Term& t) const {
    Term w = walk(t);
    switch (w.kind()) {
    case TermKind::Variable:
    case TermKind::Constant:
    case TermKind::Integer:
    case TermKind::Str:
        return w;
    case TermKind::Compound: {
        std::vector<Term> args;
        args.reserve(w.arity());
        for (const Term& a : w.args())
            args.push_back(apply(a));
        return Term::compound(w.functor(), std::move(args));
    }
    case TermKind::List: {
        std::vector<Term> items;
        items.reserve(w.items().size());
        for (const Term& it : w.items())
            items.push_back(apply(it));
        if (!w.list_tail())
            return Term::list(std::move(items));
        Term tail = walk(*w.list_tail());
        if (tail.is_var())
            return Term::list(std::move(items), std::move(tail));
        if (!tail.is_list())
            throw ImproperListError("list tail bound to " + tail.to_string());
        Term rest = apply(tail);
        for (const Term& it : rest.items())
            items.push_back(it);
        if (rest.list_tail())
            return Term::list(std::move(items), *rest.list_tail());
        return Term::list(std::move(items));
    }
    }
    return w;
}

void undo_to(Substitution& s, Trail& trail, std::size_t mark) {
    while (trail.size() > mark) {
        s.erase(trail.back());
        trail.pop_back();
    }
}

namespace {

struct ListView {
    std::vector<Term> items;       // walked item terms (not deep-applied)
    std::optional<Term> tail;      // unbound tail variable, if any
    bool ok = true;                // false when a tail resolved to a non-list
};

ListView flatten_list(const Term& list, const Substitution& s) {
    ListView view;
    Term cur = list;
    while (true) {
        for (const Term& it : cur.items())
            view.items.push_back(it);
        if (!cur.list_tail())
            return view;
        Term tail = s.walk(*cur.list_tail());
        if (tail.is_var()) {
            view.tail = tail;
            return view;
        }
        if (!tail.is_list()) {
            view.ok = false;
            return view;
        }
        cur = tail;
    }
}

bool occurs(const std::string& name, const Term& t, const Substitution& s) {
    Term w = s.walk(t);
    switch (w.kind()) {
    case TermKind::Variable:
        return w.var_name() == name;
    case TermKind::Constant:
    case TermKind::Integer:
    case TermKind::Str:
        return false;
    case TermKind::Compound:
        for (const Term& a : w.args())
            if (occurs(name, a, s))
                return true;
        return false;
    case TermKind::List:
        for (const Term& it : w.items())
            if (occurs(name, it, s))
                return true;
        return w.list_tail() && occurs(name, *w.list_tail(), s);
    }
    return false;
}

bool bind_var(const Term& var, const Term& value, Substitution& s, Trail& trail) {
    if (value.is_var() && value.var_name() == var.var_name())
        return true;
    if (occurs(var.var_name(), value, s))
        return false;
    s.bind(var.var_name(), value);
    trail.push_back(var.var_name());
    return true;
}

bool unify_lists(const Term& a, const Term& b, Substitution& s, Trail& trail) {
    ListView va = flatten_list(a, s);
    ListView vb = flatten_list(b, s);
    if (!va.ok || !vb.ok)
        return false;
    const std::size_t common = std::min(va.items.size(), vb.items.size());
    for (std::size_t i = 0; i < common; ++i)
        if (!unify_in_place(va.items[i], vb.items[i], s, trail))
            return false;
    if (va.items.size() == vb.items.size()) {
        if (va.tail && vb.tail)
            return unify_in_place(*va.tail, *vb.tail, s, trail);
        if (va.tail)
            return bind_var(*va.tail, Term::list({}), s, trail);
        if (vb.tail)
            return bind_var(*vb.tail, Term::list({}), s, trail);
        return true;
    }
    const ListView& longer = va.items.size() > vb.items.size() ? va : vb;
    const ListView& shorter = va.items.size() > vb.items.size() ? vb : va;
    if (!shorter.tail)
        return false;
    std::vector<Term> rest(longer.items.begin() + static_cast<std::ptrdiff_t>(common),
                           longer.items.end());
    Term remainder = longer.tail ? Term::list(std::move(rest), *longer.tail)
                                 : Term::list(std::move(rest));
    return bind_var(*shorter.tail, remainder, s, trail);
}

} // namespace

bool unify_in_place(const Term& a, const Term& b, Substitution& s, Trail& trail) {
    Term x = s.walk(a);
    Term y = s.walk(b);
    if (x.is_var() && y.is_var()) {
        if (x.var_name() == y.var_name())
            return true;
        // Prefer keeping the named variable as the representative; an
        // anonymous variable aliased to a named one must not hide it.
        if (x.var_anonymous() && !y.var_anonymous())
            return bind_var(x, y, s, trail);
        if (y.var_anonymous() && !x.var_anonymous())
            return bind_var(y, x, s, trail);
        return bind_var(x, y, s, trail);
    }
    if (x.is_var())
        return bind_var(x, y, s, trail);
    if (y.is_var())
        return bind_var(y, x, s, trail);
    if (x.kind() != y.kind())
        return false;
    switch (x.kind()) {
    case TermKind::Constant:
        return x.symbol() == y.symbol();
    case TermKind::Integer:
        return x.int_value() == y.int_value();
    case TermKind::Str:
        return x.str_value() == y.str_value();
    case TermKind::Compound: {
        if (x.functor() != y.functor() || x.arity() != y.arity())
            return false;
        for (std::size_t i = 0; i < x.arity(); ++i)
            if (!unify_in_place(x.args()[i], y.args()[i], s, trail))
                return false;
        return true;
    }
    case TermKind::List:
        return unify_lists(x, y, s, trail);
    case TermKind::Variable:
        break;
    }
    return false;
}

std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& within) {
    Substitution s = within;
    Trail trail;
    if (unify_in_place(a, b, s, trail))
        return s;
    return std::nullopt;
}

} // namespace rr::engine
