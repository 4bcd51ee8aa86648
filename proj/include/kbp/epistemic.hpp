#pragma once

// Knowledge over time slices.  A slice is the set of states reachable at
// one time; agent i cannot distinguish two slice states with equal values
// of its observable variables.

#include <optional>
#include <string>
#include <vector>

#include "kbp/explicit.hpp"
#include "kbp/symbolic.hpp"

namespace kbp {

enum class View { Obs, Clk, Spr };

View parse_view(const std::string& text);  // throws UsageError
std::string to_string(View v);

/// States of `slice` satisfying an atemporal formula.
bdd::Bdd sat_set(SymbolicSystem& sys, const bdd::Bdd& slice, const RExpr& phi);

/// Observations realized in `slice`, as a function over observable bits.
bdd::Bdd realized_observations(SymbolicSystem& sys, const bdd::Bdd& slice, int agent);

/// Observations o of realized states where psi holds.  psi may read only
/// the agent's observables outside knowledge operators; throws
/// ValidationError otherwise.
bdd::Bdd obs_sat(SymbolicSystem& sys, const bdd::Bdd& slice, int agent, const RExpr& psi);

/// Local state of an agent at time t of a trace under a view.
struct LocalState {
    std::optional<int> time;                // clk only
    std::vector<Observation> observations;  // one entry, or the history under spr

    friend bool operator==(const LocalState&, const LocalState&) = default;
};

LocalState local_state(const CompiledModel& m, View view, const Trace& trace, int agent, int t);

}  // namespace kbp
