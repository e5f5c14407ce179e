// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/term.hpp"

#include <random>
#include <string>
#include <vector>

namespace rr::testing {

struct TermGenOptions {
    int max_depth = 4;
    std::size_t max_width = 4;   // compound args / list items
    bool operator_functors = true;
    bool no_vars = false;        // ground terms only
};

/// Random well-formed term covering every constructor: variables (named,
/// underscore-prefixed), constants, signed integers, strings with all
/// escape-relevant characters, proper and open lists, compounds including
/// operator functors like `+` and `=`.
inline Term random_term(std::mt19937& rng, const TermGenOptions& opt = {}, int depth = 0) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };

    static const std::vector<std::string> var_names = {"X",    "Y",  "Z",   "Var1",
                                                       "_Tail", "A_b", "LongName"};
    static const std::vector<std::string> const_names = {"a", "b", "foo", "bar_9", "x"};
    static const std::vector<std::string> functors = {"f", "g", "pair", "wrap_1"};
    static const std::vector<std::string> op_functors = {"+", "-", "*", "=", "==",
                                                         "<", "<=", ">", ">=", "is"};
    static const std::vector<std::string> strings = {
        "",
        "plain",
        "with space",
        "quote\"inside",
        "back\\slash",
        "new\nline",
        "tab\tand unicode \xc3\xa9",
    };

    const bool leaf = depth >= opt.max_depth || pick(3) == 0;
    if (leaf) {
        switch (opt.no_vars ? 1 + pick(3) : pick(4)) {
        case 0: return Term::var(var_names[static_cast<std::size_t>(pick(
                    static_cast<int>(var_names.size())))]);
        case 1: return Term::constant(const_names[static_cast<std::size_t>(pick(
                    static_cast<int>(const_names.size())))]);
        case 2: {
            static const std::int64_t ints[] = {0, 1, -1, 42, -9000,
                                                9223372036854775807LL,
                                                -9223372036854775807LL - 1};
            return Term::integer(ints[pick(7)]);
        }
        default: return Term::str(strings[static_cast<std::size_t>(pick(
                     static_cast<int>(strings.size())))]);
        }
    }

    if (pick(3) == 0) { // list
        std::vector<Term> items;
        const int n = pick(static_cast<int>(opt.max_width) + 1);
        for (int i = 0; i < n; ++i)
            items.push_back(random_term(rng, opt, depth + 1));
        if (n > 0 && !opt.no_vars && pick(3) == 0)
            return Term::list(std::move(items),
                              Term::var(var_names[static_cast<std::size_t>(pick(
                                  static_cast<int>(var_names.size())))]));
        return Term::list(std::move(items));
    }

    std::string functor;
    if (opt.operator_functors && pick(5) == 0)
        functor = op_functors[static_cast<std::size_t>(pick(static_cast<int>(op_functors.size())))];
    else
        functor = functors[static_cast<std::size_t>(pick(static_cast<int>(functors.size())))];
    std::vector<Term> args;
    const int n = 1 + pick(static_cast<int>(opt.max_width));
    for (int i = 0; i < n; ++i)
        args.push_back(random_term(rng, opt, depth + 1));
    return Term::compound(std::move(functor), std::move(args));
}

} // namespace rr::testing
