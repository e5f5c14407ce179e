// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rr/rulebase.hpp"

#include <string>
#include <vector>

namespace rr::engine {

/// Outcome of the stratification check: ok, or the offending cycle as a
/// predicate sequence `cycle[0] -> cycle[1] -> ... -> cycle[0]` in which at
/// least one step is negative.
struct StratifyResult {
    bool ok = true;
    std::vector<PredId> cycle;

    std::string describe() const;
};

/// Builds the predicate dependency graph and reports any cycle through a
/// negative edge. Negated literals and goals under `not` contribute
/// negative edges; `findall`/`count` goals also count as negative since the
/// aggregate needs the complete extension. `ask`/`delegate` goals are
/// opaque and contribute no edges.
StratifyResult check_stratified(const RuleBase& rb);

} // namespace rr::engine
