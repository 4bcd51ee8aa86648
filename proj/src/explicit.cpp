#include "kbp/explicit.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <sstream>

#include "kbp/errors.hpp"

namespace kbp {

Observation observe(const CompiledModel& m, int agent, const GlobalState& s) {
    Observation o;
    for (int v : m.agents[agent].observables) o.push_back(s.at(v));
    return o;
}

ExplicitSlice::ExplicitSlice(const CompiledModel& m, std::vector<GlobalState> states)
    : model_(&m), states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    classes_.resize(m.agents.size());
    for (std::size_t a = 0; a < m.agents.size(); ++a)
        for (std::size_t k = 0; k < states_.size(); ++k)
            classes_[a][observe(m, static_cast<int>(a), states_[k])].push_back(k);
}

const std::vector<std::size_t>& ExplicitSlice::indistinguishable(int agent, const GlobalState& s) const {
    static const std::vector<std::size_t> kNone;
    auto it = classes_.at(agent).find(observe(*model_, agent, s));
    return it == classes_[agent].end() ? kNone : it->second;
}

bool ExplicitSlice::contains(const GlobalState& s) const { return std::binary_search(states_.begin(), states_.end(), s); }

int evaluate(const CompiledModel& m, const RExpr& e, const GlobalState& s, const EvalContext& ctx) {
    switch (e.kind) {
        case RExpr::Kind::Const: return e.a;
        case RExpr::Kind::Var: return s.at(e.a);
        case RExpr::Kind::Act:
            if (!ctx.actions) throw UsageError("action variable read without a joint action");
            return (*ctx.actions)[e.a] == e.b ? 1 : 0;
        case RExpr::Kind::Not: return evaluate(m, e.args[0], s, ctx) ? 0 : 1;
        case RExpr::Kind::And:
            for (const auto& x : e.args)
                if (!evaluate(m, x, s, ctx)) return 0;
            return 1;
        case RExpr::Kind::Or:
            for (const auto& x : e.args)
                if (evaluate(m, x, s, ctx)) return 1;
            return 0;
        case RExpr::Kind::Eq: return evaluate(m, e.args[0], s, ctx) == evaluate(m, e.args[1], s, ctx) ? 1 : 0;
        case RExpr::Kind::Knows: {
            if (!ctx.slice) throw UsageError("knowledge operator evaluated without a time slice");
            for (std::size_t k : ctx.slice->indistinguishable(e.a, s))
                if (!evaluate(m, e.args[0], ctx.slice->states()[k], ctx)) return 0;
            return 1;
        }
        case RExpr::Kind::Next: throw UsageError("temporal operator X inside an atemporal formula");
        case RExpr::Kind::Skel:
            if (!ctx.skeleton) throw UsageError("unbound skeleton variable " + m.skeleton_vars.at(e.a).id);
            return ctx.skeleton(e.a, s) ? 1 : 0;
    }
    throw InternalError("unhandled expression kind");
}

bool holds(const CompiledModel& m, const RExpr& e, const GlobalState& s, const EvalContext& ctx) {
    return evaluate(m, e, s, ctx) != 0;
}

std::vector<int> agent_step(const CompiledModel& m, const GlobalState& s, const CStatement& st, const EvalContext& ctx) {
    if (!st.branch) return {0};
    std::vector<int> enabled;
    for (std::size_t j = 0; j < st.arms.size(); ++j)
        if (holds(m, st.arms[j].guard, s, ctx)) enabled.push_back(static_cast<int>(j));
    if (enabled.empty()) enabled.push_back(kFallthrough);
    return enabled;
}

const CAtomic* chosen(const CStatement& st, int choice) {
    if (!st.branch) return &st.atomic;
    if (choice == kFallthrough) return nullptr;
    return &st.arms.at(static_cast<std::size_t>(choice)).body;
}

namespace {

// Simultaneous assignment: every right-hand side reads `from`.
void apply(const CompiledModel& m, const CAtomic* a, const GlobalState& from, GlobalState& into, const EvalContext& ctx) {
    if (!a) return;
    std::vector<std::pair<int, int>> writes;
    for (const auto& as : a->assigns) writes.emplace_back(as.var, evaluate(m, as.value, from, ctx));
    for (auto [v, code] : writes) into[v] = code;
}

const CStatement& statement_at(const CAgent& a, int time) {
    static const CStatement kSkip{};
    return time >= 0 && time < static_cast<int>(a.program.size()) ? a.program[static_cast<std::size_t>(time)] : kSkip;
}

void env_runs(const CompiledModel& m, std::size_t k, const GlobalState& s, const EvalContext& ctx,
              std::vector<int>& choices, std::vector<EnvRun>& out) {
    if (k == m.tau.size()) {
        out.push_back({s, choices});
        return;
    }
    const CStatement& st = m.tau[k];
    for (int c : agent_step(m, s, st, ctx)) {
        GlobalState next = s;
        apply(m, chosen(st, c), s, next, ctx);
        choices.push_back(c);
        env_runs(m, k + 1, next, ctx, choices, out);
        choices.pop_back();
    }
}

template <class Pick>
GlobalState run_env_with(const CompiledModel& m, const GlobalState& s, const JointAction& act, Pick&& pick,
                         std::vector<int>* taken = nullptr) {
    EvalContext ctx;
    ctx.actions = &act;
    GlobalState cur = s;
    for (std::size_t k = 0; k < m.tau.size(); ++k) {
        const CStatement& st = m.tau[k];
        std::vector<int> enabled = agent_step(m, cur, st, ctx);
        int c = pick(static_cast<int>(k), std::span<const int>(enabled));
        if (std::find(enabled.begin(), enabled.end(), c) == enabled.end()) {
            throw UsageError("environment statement " + std::to_string(k) + ": choice " + std::to_string(c) + " is not enabled");
        }
        GlobalState next = cur;
        apply(m, chosen(st, c), cur, next, ctx);
        cur = std::move(next);
        if (taken) taken->push_back(c);
    }
    return cur;
}

JointAction actions_of(const CompiledModel& m, int time, const std::vector<int>& agent_choices) {
    JointAction act(m.agents.size(), -1);
    for (std::size_t a = 0; a < m.agents.size(); ++a) {
        const CAtomic* at = chosen(statement_at(m.agents[a], time), agent_choices.at(a));
        if (at) act[a] = at->action;
    }
    return act;
}

GlobalState finish_step(const CompiledModel& m, const GlobalState& s, int time, const std::vector<int>& agent_choices,
                        GlobalState after_env, const EvalContext& ctx) {
    for (std::size_t a = 0; a < m.agents.size(); ++a)
        apply(m, chosen(statement_at(m.agents[a], time), agent_choices[a]), s, after_env, ctx);
    return after_env;
}

std::optional<int> partial(const RExpr& e, const std::vector<std::optional<int>>& s) {
    switch (e.kind) {
        case RExpr::Kind::Const: return e.a;
        case RExpr::Kind::Var: return s[e.a];
        case RExpr::Kind::Not: {
            auto x = partial(e.args[0], s);
            if (!x) return std::nullopt;
            return *x ? 0 : 1;
        }
        case RExpr::Kind::And: {
            bool unknown = false;
            for (const auto& a : e.args) {
                auto x = partial(a, s);
                if (!x) unknown = true;
                else if (!*x) return 0;
            }
            if (unknown) return std::nullopt;
            return 1;
        }
        case RExpr::Kind::Or: {
            bool unknown = false;
            for (const auto& a : e.args) {
                auto x = partial(a, s);
                if (!x) unknown = true;
                else if (*x) return 1;
            }
            if (unknown) return std::nullopt;
            return 0;
        }
        case RExpr::Kind::Eq: {
            auto x = partial(e.args[0], s);
            auto y = partial(e.args[1], s);
            if (!x || !y) return std::nullopt;
            return *x == *y ? 1 : 0;
        }
        default: throw UsageError("initial condition is not a state predicate");
    }
}

int parse_code(const Domain& d, const std::string& text) {
    switch (d.kind) {
        case Domain::Kind::Bool:
            if (text == "true" || text == "1") return 1;
            if (text == "false" || text == "0") return 0;
            break;
        case Domain::Kind::Enum: {
            auto it = std::find(d.labels.begin(), d.labels.end(), text);
            if (it != d.labels.end()) return static_cast<int>(it - d.labels.begin());
            break;
        }
        case Domain::Kind::Range:
            try {
                std::size_t used = 0;
                int v = std::stoi(text, &used);
                if (used == text.size() && v >= d.lo && v < d.lo + d.size) return v - d.lo;
            } catch (const std::exception&) {
            }
            break;
    }
    throw UsageError("'" + text + "' is not a value of the variable's type");
}

}  // namespace

std::vector<EnvRun> environment_runs(const CompiledModel& m, const GlobalState& s, const JointAction& act) {
    EvalContext ctx;
    ctx.actions = &act;
    std::vector<EnvRun> out;
    std::vector<int> choices;
    env_runs(m, 0, s, ctx, choices, out);
    return out;
}

GlobalState run_environment(const CompiledModel& m, const GlobalState& s, const JointAction& act,
                            std::span<const int> choices) {
    return run_env_with(m, s, act, [&](int k, std::span<const int> enabled) {
        return static_cast<std::size_t>(k) < choices.size() ? choices[static_cast<std::size_t>(k)] : enabled.front();
    });
}

GlobalState global_step(const CompiledModel& m, const GlobalState& s, int time, const StepChoice& choice,
                        const EvalContext& ctx) {
    if (choice.agents.size() != m.agents.size()) throw UsageError("one choice per agent is required");
    for (std::size_t a = 0; a < m.agents.size(); ++a) {
        auto enabled = agent_step(m, s, statement_at(m.agents[a], time), ctx);
        if (std::find(enabled.begin(), enabled.end(), choice.agents[a]) == enabled.end()) {
            throw UsageError("agent " + m.agents[a].name + ": choice " + std::to_string(choice.agents[a]) + " is not enabled");
        }
    }
    JointAction act = actions_of(m, time, choice.agents);
    GlobalState env = run_environment(m, s, act, choice.env);
    return finish_step(m, s, time, choice.agents, std::move(env), ctx);
}

std::vector<Transition> transitions(const CompiledModel& m, const GlobalState& s, int time, const EvalContext& ctx) {
    std::vector<std::vector<int>> per_agent;
    for (const auto& a : m.agents) per_agent.push_back(agent_step(m, s, statement_at(a, time), ctx));
    std::vector<Transition> out;
    std::vector<int> pick(per_agent.size(), 0);
    while (true) {
        std::vector<int> agent_choices;
        for (std::size_t a = 0; a < per_agent.size(); ++a) agent_choices.push_back(per_agent[a][pick[a]]);
        JointAction act = actions_of(m, time, agent_choices);
        for (auto& run : environment_runs(m, s, act)) {
            Transition t;
            t.target = finish_step(m, s, time, agent_choices, std::move(run.state), ctx);
            t.choice = {agent_choices, std::move(run.choices)};
            t.actions = act;
            out.push_back(std::move(t));
        }
        std::size_t a = 0;
        while (a < pick.size() && ++pick[a] == static_cast<int>(per_agent[a].size())) pick[a++] = 0;
        if (a == pick.size()) break;
    }
    return out;
}

std::vector<GlobalState> successors(const CompiledModel& m, const GlobalState& s, int time, const EvalContext& ctx) {
    std::vector<GlobalState> out;
    for (auto& t : transitions(m, s, time, ctx)) out.push_back(std::move(t.target));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ChoiceResolver lowest_enabled() {
    return [](const ChoicePoint& p) { return p.enabled.front(); };
}

ChoiceResolver seeded_resolver(std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng](const ChoicePoint& p) {
        std::uniform_int_distribution<std::size_t> pick(0, p.enabled.size() - 1);
        return p.enabled[pick(*rng)];
    };
}

Trace simulate(const CompiledModel& m, const GlobalState& s0, int steps, const ChoiceResolver& resolve,
               const EvalContext& ctx) {
    if (steps < 0 || steps > m.length) {
        throw UsageError("cannot simulate " + std::to_string(steps) + " steps of a program of length " +
                         std::to_string(m.length));
    }
    if (s0.size() != m.vars.size()) throw UsageError("initial state has the wrong number of variables");
    if (!holds(m, m.initial_condition(), s0)) throw UsageError("initial state violates the initial condition");
    Trace tr;
    tr.states.push_back(s0);
    for (int t = 0; t < steps; ++t) {
        const GlobalState& s = tr.states.back();
        TraceStep step;
        for (std::size_t a = 0; a < m.agents.size(); ++a) {
            auto enabled = agent_step(m, s, statement_at(m.agents[a], t), ctx);
            step.choice.agents.push_back(resolve({t, static_cast<int>(a), t, enabled}));
        }
        step.actions = actions_of(m, t, step.choice.agents);
        run_env_with(
            m, s, step.actions, [&](int k, std::span<const int> enabled) { return resolve({t, -1, k, enabled}); },
            &step.choice.env);
        GlobalState next = global_step(m, s, t, step.choice, ctx);
        tr.states.push_back(std::move(next));
        tr.steps.push_back(std::move(step));
    }
    return tr;
}

std::string format_state(const CompiledModel& m, const GlobalState& s) {
    std::string out;
    for (std::size_t v = 0; v < m.vars.size(); ++v) {
        if (v) out += ' ';
        out += m.vars[v].name + "=" + m.vars[v].dom.text(s.at(v));
    }
    return out;
}

std::string export_trace(const CompiledModel& m, const Trace& t) {
    std::ostringstream os;
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        os << "t=" << k << ' ' << format_state(m, t.states[k]);
        if (k < t.steps.size()) {
            os << " ;";
            for (std::size_t a = 0; a < m.agents.size(); ++a) {
                int act = t.steps[k].actions[a];
                os << ' ' << m.agents[a].name << '=' << (act < 0 ? "-" : m.actions[static_cast<std::size_t>(act)]);
            }
        }
        os << '\n';
    }
    return os.str();
}

GlobalState parse_state(const CompiledModel& m, const std::string& text) {
    GlobalState s(m.vars.size(), 0);
    std::string norm = text;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream is(norm);
    std::string item;
    while (is >> item) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected name=value, found '" + item + "'");
        auto v = m.find_var(item.substr(0, eq));
        if (!v) throw UsageError("unknown variable '" + item.substr(0, eq) + "'");
        s[*v] = parse_code(m.vars[*v].dom, item.substr(eq + 1));
    }
    return s;
}

std::vector<GlobalState> initial_states(const CompiledModel& m, std::size_t bound) {
    const RExpr init = m.initial_condition();
    std::vector<std::optional<int>> partial_state(m.vars.size());
    std::vector<GlobalState> out;
    std::function<void(std::size_t)> go = [&](std::size_t v) {
        auto verdict = partial(init, partial_state);
        if (verdict && !*verdict) return;
        if (v == m.vars.size()) {
            GlobalState s;
            for (const auto& x : partial_state) s.push_back(*x);
            out.push_back(std::move(s));
            if (out.size() > bound) throw UsageError("more than " + std::to_string(bound) + " initial states");
            return;
        }
        for (int code = 0; code < m.vars[v].dom.size; ++code) {
            partial_state[v] = code;
            go(v + 1);
        }
        partial_state[v].reset();
    };
    go(0);
    std::sort(out.begin(), out.end());
    return out;
}

Trace replay(const CompiledModel& m, const std::vector<GlobalState>& states, const EvalContext& ctx,
             const std::vector<ExplicitSlice>* slices) {
    Trace tr;
    if (states.empty()) return tr;
    tr.states.push_back(states.front());
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        EvalContext c = ctx;
        if (slices) c.slice = &slices->at(t);
        bool found = false;
        for (auto& tx : transitions(m, states[t], static_cast<int>(t), c)) {
            if (tx.target != states[t + 1]) continue;
            tr.steps.push_back({std::move(tx.choice), std::move(tx.actions)});
            tr.states.push_back(states[t + 1]);
            found = true;
            break;
        }
        if (!found) throw InternalError("no transition between consecutive trace states at time " + std::to_string(t));
    }
    return tr;
}

}  // namespace kbp
