// SPDX-License-Identifier: Apache-2.0
//
// Builds the single-engine equivalent of a distributed topology: the union
// of all agents' rulebases with remote calls unwrapped to local goals.
// Used to check that distribution does not change the answer set.
#pragma once

#include "rr/rulebase.hpp"

#include <vector>

namespace rr::testing {

/// `ask(Agent, G)` becomes `G`, `delegate(G)` becomes `G`; goals nested
/// under not/and/findall/count are rewritten too. Data arguments of other
/// predicates are left alone.
Term unwrap_remote(const Term& atom);

/// Union of the given rulebases with remote calls unwrapped. Pass-through
/// clauses that collapse to `h :- h.` are dropped (the callee's definition
/// is already part of the union).
RuleBase merged_rulebase(const std::vector<const RuleBase*>& bases);

} // namespace rr::testing
