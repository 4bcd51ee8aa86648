#pragma once

// Explicit-state operational semantics: guard evaluation on concrete
// states, the agent-step relation, sequential execution of the environment
// program, the composed global step, and a simulator producing traces.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kbp/model.hpp"
#include "kbp/symbolic.hpp"

namespace kbp {

using JointAction = std::vector<int>;  // action index per agent, -1 for none

/// Choice index of the implicit skip taken when no guard of a branch holds.
inline constexpr int kFallthrough = -1;

Observation observe(const CompiledModel& m, int agent, const GlobalState& s);

/// A set of states of one time, indexed by each agent's observation.
class ExplicitSlice {
public:
    ExplicitSlice(const CompiledModel& m, std::vector<GlobalState> states);

    const std::vector<GlobalState>& states() const { return states_; }
    /// Indices of the slice states `agent` cannot distinguish from s.
    const std::vector<std::size_t>& indistinguishable(int agent, const GlobalState& s) const;
    bool contains(const GlobalState& s) const;

private:
    const CompiledModel* model_;
    std::vector<GlobalState> states_;  // sorted, unique
    std::vector<std::map<Observation, std::vector<std::size_t>>> classes_;
};

struct EvalContext {
    const ExplicitSlice* slice = nullptr;  // required by knowledge operators
    const JointAction* actions = nullptr;  // required by action variables
    /// Value of a skeleton variable (by index) at a state; required by skeleton guards.
    std::function<bool(int, const GlobalState&)> skeleton;
};

/// Value code of an expression (0/1 for Boolean ones).  Throws UsageError
/// when the context lacks what the expression needs.
int evaluate(const CompiledModel& m, const RExpr& e, const GlobalState& s, const EvalContext& ctx = {});
bool holds(const CompiledModel& m, const RExpr& e, const GlobalState& s, const EvalContext& ctx = {});

/// Enabled choices of a statement: arm indices whose guard holds, or
/// {kFallthrough} when none does; {0} for an atomic statement.
std::vector<int> agent_step(const CompiledModel& m, const GlobalState& s, const CStatement& st,
                            const EvalContext& ctx = {});
/// The atomic statement of a choice; null for the fallthrough skip.
const CAtomic* chosen(const CStatement& st, int choice);

/// One way the environment program can run: the final state and the
/// choice made at each of its statements.
struct EnvRun {
    GlobalState state;
    std::vector<int> choices;
};

/// Every run of the environment program from s with joint action `act`.
std::vector<EnvRun> environment_runs(const CompiledModel& m, const GlobalState& s, const JointAction& act);
/// One run; `choices` gives the choice per statement (missing entries take
/// the lowest enabled one).  Throws UsageError on a disabled choice.
GlobalState run_environment(const CompiledModel& m, const GlobalState& s, const JointAction& act,
                            std::span<const int> choices = {});

struct StepChoice {
    std::vector<int> agents;  // choice per agent
    std::vector<int> env;     // choice per environment statement
};

/// The composed transition: agents' atomic statements, then the environment
/// program on the joint action, then all local assignments with right-hand
/// sides evaluated in the original state.
GlobalState global_step(const CompiledModel& m, const GlobalState& s, int time, const StepChoice& choice,
                        const EvalContext& ctx = {});

struct Transition {
    StepChoice choice;
    JointAction actions;
    GlobalState target;
};

/// All transitions from s at `time` over every enabled combination.
std::vector<Transition> transitions(const CompiledModel& m, const GlobalState& s, int time, const EvalContext& ctx = {});
/// Sorted, duplicate-free successor states.
std::vector<GlobalState> successors(const CompiledModel& m, const GlobalState& s, int time, const EvalContext& ctx = {});

struct TraceStep {
    StepChoice choice;
    JointAction actions;
};

struct Trace {
    std::vector<GlobalState> states;
    std::vector<TraceStep> steps;  // steps[t] leads from states[t] to states[t+1]
};

/// Decision point of the simulator: agent >= 0 picks an arm of that agent's
/// statement; agent == -1 picks an arm of environment statement `statement`.
struct ChoicePoint {
    int time = 0;
    int agent = -1;
    int statement = 0;
    std::span<const int> enabled;
};
using ChoiceResolver = std::function<int(const ChoicePoint&)>;

ChoiceResolver lowest_enabled();
ChoiceResolver seeded_resolver(std::uint64_t seed);

/// Runs a standard model for `steps` steps.  Throws UsageError when steps
/// exceeds the program length or a guard is not standard.
Trace simulate(const CompiledModel& m, const GlobalState& s0, int steps, const ChoiceResolver& resolve = lowest_enabled(),
               const EvalContext& ctx = {});

/// One line per state: `t=<k> v=value ...`, then the actions taken.
std::string export_trace(const CompiledModel& m, const Trace& t);
std::string format_state(const CompiledModel& m, const GlobalState& s);
/// Parses `name=value` pairs separated by commas or spaces; unnamed
/// variables take code 0.  Throws UsageError.
GlobalState parse_state(const CompiledModel& m, const std::string& text);

/// States satisfying the initial condition, enumerated by backtracking over
/// variables with three-valued pruning.  Throws UsageError beyond `bound`.
std::vector<GlobalState> initial_states(const CompiledModel& m, std::size_t bound = std::size_t{1} << 16);

/// Replays a sequence of states through global_step, recovering the
/// choices.  Throws InternalError if some consecutive pair is not a step.
Trace replay(const CompiledModel& m, const std::vector<GlobalState>& states, const EvalContext& ctx = {},
             const std::vector<ExplicitSlice>* slices = nullptr);

}  // namespace kbp
