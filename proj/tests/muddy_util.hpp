#pragma once

// Behaviour of synthesized muddy-children programs, read off simulated runs.

#include <vector>

#include "kbp/explicit.hpp"
#include "kbp/model.hpp"

namespace kbp::testing {

struct MuddyRun {
    std::vector<bool> muddy;             // per child
    std::vector<std::vector<bool>> yes;  // [round][child], rounds counted from 0
};

/// One deterministic run per initial state of a synthesized program.
inline std::vector<MuddyRun> muddy_runs(const ast::Model& standard) {
    CompiledModel cm = compile(standard);
    const int yes = *cm.find_action("SayYes");
    const int n = static_cast<int>(cm.agents.size());
    std::vector<MuddyRun> out;
    for (const auto& s0 : initial_states(cm)) {
        Trace t = simulate(cm, s0, cm.length);
        MuddyRun r;
        for (int i = 0; i < n; ++i) r.muddy.push_back(s0[*cm.find_var("muddy[" + cm.agents[i].name + "]")] == 1);
        for (const auto& step : t.steps) {
            std::vector<bool> row;
            for (int i = 0; i < n; ++i) row.push_back(step.actions[i] == yes);
            r.yes.push_back(std::move(row));
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Expected answer: with k muddy children, the muddy ones say yes first in
/// round k (one-based), nobody says yes earlier, everyone says yes later.
inline bool expected_yes(const MuddyRun& r, int round, int child) {
    int k = 0;
    for (bool b : r.muddy) k += b ? 1 : 0;
    const int one_based = round + 1;
    if (one_based < k) return false;
    if (one_based == k) return r.muddy[static_cast<std::size_t>(child)];
    return true;
}

/// Rounds where some child deviates from the expected answer.
inline int deviations(const std::vector<MuddyRun>& runs) {
    int bad = 0;
    for (const auto& r : runs)
        for (std::size_t t = 0; t < r.yes.size(); ++t)
            for (std::size_t i = 0; i < r.muddy.size(); ++i)
                if (r.yes[t][i] != expected_yes(r, static_cast<int>(t), static_cast<int>(i))) ++bad;
    return bad;
}

}  // namespace kbp::testing
