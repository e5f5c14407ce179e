// SPDX-License-Identifier: Apache-2.0
#include "rr/term.hpp"

#include <algorithm>
#include <stdexcept>

namespace rr {

namespace {

void escape_str_into(const std::string& s, std::string& out) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out.push_back(c);
        }
    }
    out.push_back('"');
}

} // namespace

Term Term::var(std::string name, bool anonymous) {
    auto node = std::make_shared<Node>();
    node->kind = TermKind::Variable;
    node->text = std::move(name);
    node->anonymous = anonymous;
    return Term{std::move(node)};
}

Term Term::constant(std::string symbol) {
    auto node = std::make_shared<Node>();
    node->kind = TermKind::Constant;
    node->text = std::move(symbol);
    return Term{std::move(node)};
}

Term Term::integer(std::int64_t value) {
    auto node = std::make_shared<Node>();
    node->kind = TermKind::Integer;
    node->number = value;
    return Term{std::move(node)};
}

Term Term::str(std::string value) {
    auto node = std::make_shared<Node>();
    node->kind = TermKind::Str;
    node->text = std::move(value);
    return Term{std::move(node)};
}

Term Term::list(std::vector<Term> items) {
    auto node = std::make_shared<Node>();
    node->kind = TermKind::List;
    node->args = std::move(items);
    return Term{std::move(node)};
}

Term Term::list(std::vector<Term> items, Term tail_var) {
    if (!tail_var.is_var())
        throw std::invalid_argument("list tail must be a variable");
    auto node = std::make_shared<Node>();
    node->kind = TermKind::List;
    node->args = std::move(items);
    node->tail.push_back(std::move(tail_var));
    return Term{std::move(node)};
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty())
        throw std::invalid_argument("compound needs at least one argument");
    auto node = std::make_shared<Node>();
    node->kind = TermKind::Compound;
    node->text = std::move(functor);
    node->args = std::move(args);
    return Term{std::move(node)};
}

bool Term::equals(const Term& other) const {
    if (node_ == other.node_)
        return true;
    if (kind() != other.kind())
        return false;
    switch (kind()) {
    case TermKind::Variable:
        return var_name() == other.var_name();
    case TermKind::Constant:
        return symbol() == other.symbol();
    case TermKind::Integer:
        return int_value() == other.int_value();
    case TermKind::Str:
        return str_value() == other.str_value();
    case TermKind::List: {
        if (items().size() != other.items().size())
            return false;
        if ((list_tail() != nullptr) != (other.list_tail() != nullptr))
            return false;
        if (list_tail() && !list_tail()->equals(*other.list_tail()))
            return false;
        for (std::size_t i = 0; i < items().size(); ++i)
            if (!items()[i].equals(other.items()[i]))
                return false;
        return true;
    }
    case TermKind::Compound: {
        if (functor() != other.functor() || args().size() != other.args().size())
            return false;
        for (std::size_t i = 0; i < args().size(); ++i)
            if (!args()[i].equals(other.args()[i]))
                return false;
        return true;
    }
    }
    return false;
}

bool Term::is_ground() const {
    switch (kind()) {
    case TermKind::Variable:
        return false;
    case TermKind::Constant:
    case TermKind::Integer:
    case TermKind::Str:
        return true;
    case TermKind::List:
        if (list_tail())
            return false;
        return std::all_of(items().begin(), items().end(),
                           [](const Term& t) { return t.is_ground(); });
    case TermKind::Compound:
        return std::all_of(args().begin(), args().end(),
                           [](const Term& t) { return t.is_ground(); });
    }
    return false;
}

void Term::collect_var_names(std::vector<std::string>& out) const {
    switch (kind()) {
    case TermKind::Variable:
        if (std::find(out.begin(), out.end(), var_name()) == out.end())
            out.push_back(var_name());
        return;
    case TermKind::Constant:
    case TermKind::Integer:
    case TermKind::Str:
        return;
    case TermKind::List:
        for (const Term& t : items())
            t.collect_var_names(out);
        if (list_tail())
            list_tail()->collect_var_names(out);
        return;
    case TermKind::Compound:
        for (const Term& t : args())
            t.collect_var_names(out);
        return;
    }
}

std::vector<std::string> Term::var_names() const {
    std::vector<std::string> out;
    collect_var_names(out);
    return out;
}

void Term::collect_vars(std::vector<Term>& out) const {
    switch (kind()) {
    case TermKind::Variable: {
        for (const Term& seen : out)
            if (seen.var_name() == var_name())
                return;
        out.push_back(*this);
        return;
    }
    case TermKind::Constant:
    case TermKind::Integer:
    case TermKind::Str:
        return;
    case TermKind::List:
        for (const Term& t : items())
            t.collect_vars(out);
        if (list_tail())
            list_tail()->collect_vars(out);
        return;
    case TermKind::Compound:
        for (const Term& t : args())
            t.collect_vars(out);
        return;
    }
}

void Term::serialize(std::string& out) const {
    switch (kind()) {
    case TermKind::Variable:
        out += var_name();
        return;
    case TermKind::Constant:
        out += symbol();
        return;
    case TermKind::Integer:
        out += std::to_string(int_value());
        return;
    case TermKind::Str:
        escape_str_into(str_value(), out);
        return;
    case TermKind::List: {
        out.push_back('[');
        for (std::size_t i = 0; i < items().size(); ++i) {
            if (i)
                out.push_back(',');
            items()[i].serialize(out);
        }
        if (list_tail()) {
            out.push_back('|');
            list_tail()->serialize(out);
        }
        out.push_back(']');
        return;
    }
    case TermKind::Compound: {
        out += functor();
        out.push_back('(');
        for (std::size_t i = 0; i < args().size(); ++i) {
            if (i)
                out.push_back(',');
            args()[i].serialize(out);
        }
        out.push_back(')');
        return;
    }
    }
}

std::string Term::to_string() const {
    std::string out;
    serialize(out);
    return out;
}

} // namespace rr
