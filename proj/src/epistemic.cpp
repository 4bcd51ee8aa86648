#include "kbp/epistemic.hpp"

#include <algorithm>

#include "kbp/errors.hpp"

namespace kbp {

View parse_view(const std::string& text) {
    if (text == "obs") return View::Obs;
    if (text == "clk") return View::Clk;
    if (text == "spr") return View::Spr;
    throw UsageError("unknown view '" + text + "'; expected clk or spr (obs is accepted for simulation and knowledge-free checks)");
}

std::string to_string(View v) {
    switch (v) {
        case View::Obs: return "obs";
        case View::Clk: return "clk";
        case View::Spr: return "spr";
    }
    return "?";
}

bdd::Bdd sat_set(SymbolicSystem& sys, const bdd::Bdd& slice, const RExpr& phi) {
    if (contains(phi, RExpr::Kind::Next)) throw UsageError("temporal operator X inside an atemporal formula");
    return slice & sys.eval(phi, &slice);
}

bdd::Bdd realized_observations(SymbolicSystem& sys, const bdd::Bdd& slice, int agent) {
    return sys.project(agent, slice);
}

bdd::Bdd obs_sat(SymbolicSystem& sys, const bdd::Bdd& slice, int agent, const RExpr& psi) {
    std::vector<int> fv;
    free_vars(psi, fv);
    const auto& obs = sys.model().agents.at(agent).observables;
    for (int v : fv) {
        if (!std::binary_search(obs.begin(), obs.end(), v)) {
            throw ValidationError({{{}, "observability",
                                    "formula reads '" + sys.model().vars[v].name + "' outside a knowledge operator, which agent " +
                                        sys.model().agents[agent].name + " cannot observe"}});
        }
    }
    return sys.project(agent, sat_set(sys, slice, psi));
}

LocalState local_state(const CompiledModel& m, View view, const Trace& trace, int agent, int t) {
    if (t < 0 || t >= static_cast<int>(trace.states.size())) {
        throw UsageError("time " + std::to_string(t) + " is outside the trace");
    }
    LocalState out;
    switch (view) {
        case View::Obs: out.observations.push_back(observe(m, agent, trace.states[t])); break;
        case View::Clk:
            out.time = t;
            out.observations.push_back(observe(m, agent, trace.states[t]));
            break;
        case View::Spr:
            for (int k = 0; k <= t; ++k) out.observations.push_back(observe(m, agent, trace.states[k]));
            break;
    }
    return out;
}

}  // namespace kbp
