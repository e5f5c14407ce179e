// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/rulebase.hpp"
#include "rr/term.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rr {

/// Parse failure with a 1-based source position pointing inside the
/// offending token.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, int column, std::string expected);

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& expected() const { return expected_; }

private:
    int line_;
    int column_;
    std::string expected_;
};

/// Parses rule text: `head :- lit1, lit2.` for rules, `fact.` for facts,
/// `not goal` for negated body literals, `%` line comments. Comparison and
/// arithmetic operators (`=`, `==`, `<`, `<=`, `>`, `>=`, `is`, `+`, `-`,
/// `*`, `div`, `mod`) are accepted infix and become plain compounds.
RuleBase parse_program(std::string_view text);

/// Parses a query conjunction `g1, g2, ... .` into ordered literals.
std::vector<Literal> parse_query(std::string_view text);

/// Parses exactly one term covering the whole input.
Term parse_term(std::string_view text);

/// True for the reserved goal predicates evaluated by the engine; these
/// never appear as rule heads.
bool is_builtin_pred_name(std::string_view name);

} // namespace rr
