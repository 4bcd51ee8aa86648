#include "kbp/oracle.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "kbp/errors.hpp"
#include "kbp/printer.hpp"
#include "kbp/synthesis.hpp"

namespace kbp {

using bdd::Bdd;

namespace {

// States s_0..s_t ending in `last`, each s_j in slices[j] and a predecessor of s_{j+1}.
std::vector<GlobalState> backward_path(SymbolicSystem& sys, const std::vector<Bdd>& slices, const GlobalState& last, int t,
                                       const SymbolicTheta* theta) {
    std::vector<GlobalState> path(static_cast<std::size_t>(t) + 1);
    path[static_cast<std::size_t>(t)] = last;
    for (int j = t - 1; j >= 0; --j) {
        const Bdd& slice = slices[static_cast<std::size_t>(j)];
        Bdd pre = sys.preimage(sys.encode(path[static_cast<std::size_t>(j) + 1]), j, slice, theta) & slice;
        if (pre.is_zero()) throw InternalError("slice state without a predecessor at time " + std::to_string(j));
        path[static_cast<std::size_t>(j)] = sys.pick_state(pre);
    }
    return path;
}

int last_time(const std::vector<SkeletonVar>& vars) {
    int n = 0;
    for (const auto& v : vars) n = std::max(n, v.time);
    return n;
}

}  // namespace

bool CheckReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; });
}

std::string CheckReport::str() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << (e.pass ? "PASS " : "FAIL ") << e.agent << ' ' << e.time << ' ' << e.formula << " :: " << e.expression << '\n';
        if (!e.pass) {
            os << "  witness " << e.witness_text << '\n';
            std::istringstream tr(e.trace_text);
            for (std::string line; std::getline(tr, line);) os << "  " << line << '\n';
        }
    }
    return os.str();
}

CheckReport check_implementation(const ast::Model& kbp, const Substitution& theta, View view) {
    if (view == View::Obs) throw UsageError("implementation checks support the clk and spr views only");
    Skeleton sk = skeleton(prepare_for_view(kbp, view));
    for (const auto& v : sk.vars)
        if (!theta.count(v.id)) {
            throw UsageError("substitution has no image for " + v.id + " (" + canonical_text(v.formula) + ")");
        }
    SymbolicSystem sys(compile(sk.model, sk.vars));
    const CompiledModel& cm = sys.model();

    SymbolicTheta images;
    std::map<int, RExpr> resolved;
    for (const auto& v : sk.vars) {
        int idx = *cm.find_skeleton(v.id);
        resolved[idx] = cm.resolve_observable(*cm.find_agent(v.agent), theta.at(v.id));
        images[idx] = sys.eval(resolved[idx]);
    }
    EvalContext replay_ctx;
    replay_ctx.skeleton = [&](int idx, const GlobalState& s) { return holds(cm, resolved.at(idx), s); };

    CheckReport report;
    std::vector<Bdd> slices;
    Bdd states = sys.initial_set();
    const int last = last_time(sk.vars);
    for (int t = 0; t <= last; ++t) {
        slices.push_back(states);
        for (const auto& v : sk.vars) {
            if (v.time != t) continue;
            int idx = *cm.find_skeleton(v.id);
            int agent = *cm.find_agent(v.agent);
            Bdd formula = sat_set(sys, states, cm.resolve_skeleton(v));
            Bdd image = states & images[idx];
            CheckEntry e;
            e.agent = v.agent;
            e.time = t;
            e.formula = canonical_text(v.formula);
            e.expression = print(theta.at(v.id));
            e.pass = formula == image;
            if (!e.pass) {
                GlobalState w = sys.pick_state(formula ^ image);
                e.witness = w;
                e.observation = observe(cm, agent, w);
                e.trace = replay(cm, backward_path(sys, slices, w, t, &images), replay_ctx);
                e.witness_text = format_state(cm, w);
                e.trace_text = export_trace(cm, *e.trace);
            }
            report.entries.push_back(std::move(e));
        }
        if (t < last) states = sys.image(states, t, &images);
    }
    return report;
}

ModelCheckResult model_check_X(const ast::Model& standard, View view, int depth, const ast::ExprPtr& phi) {
    if (standard.knowledge_based()) throw UsageError("model checking needs a standard program; synthesize it first");
    if (view == View::Obs && ast::contains_knows(*phi)) {
        throw UsageError("knowledge under the obs view is not supported; use clk or spr");
    }
    ast::Model prepared = view == View::Spr ? with_perfect_recall(standard) : standard;
    SymbolicSystem sys(compile(prepared));
    const CompiledModel& cm = sys.model();
    if (depth < 0 || depth > cm.length) {
        throw UsageError("depth " + std::to_string(depth) + " exceeds the program length " + std::to_string(cm.length));
    }
    RExpr f = cm.resolve_global(phi);
    if (contains(f, RExpr::Kind::Next)) throw UsageError("X may only prefix the whole formula");

    ModelCheckResult r;
    std::vector<Bdd> slices{sys.initial_set()};
    for (int k = 0; k < depth; ++k) slices.push_back(sys.image(slices.back(), k));
    for (const auto& s : slices) r.slice_sizes.push_back(sys.count(s));
    const Bdd& last = slices.back();
    Bdd bad = last & ~sat_set(sys, last, f);
    r.holds = bad.is_zero();
    if (!r.holds) {
        GlobalState w = sys.pick_state(bad);
        r.counterexample = w;
        r.trace = replay(cm, backward_path(sys, slices, w, depth, nullptr));
        r.counterexample_text = format_state(cm, w);
        r.trace_text = export_trace(cm, *r.trace);
    }
    return r;
}

ModelCheckResult model_check(const ast::Model& standard, View view, const ast::ExprPtr& formula) {
    int depth = 0;
    ast::ExprPtr body = formula;
    while (body->kind == ast::ExprKind::Next) {
        depth += body->number;
        body = body->args[0];
    }
    return model_check_X(standard, view, depth, body);
}

EvalContext ExplicitSynthesis::context() const {
    std::map<int, const ExplicitCondition*> by_index;
    for (const auto& c : conditions) by_index[*model.find_skeleton(c.var.id)] = &c;
    EvalContext ctx;
    ctx.skeleton = [this, by_index](int idx, const GlobalState& s) {
        const ExplicitCondition* c = by_index.at(idx);
        return c->truth.count(observe(model, c->agent, s)) > 0;
    };
    return ctx;
}

ExplicitSynthesis explicit_synthesize(const ast::Model& m, View view, std::size_t bound) {
    if (view == View::Obs) throw UsageError("synthesis supports the clk and spr views only");
    Skeleton sk = skeleton(prepare_for_view(m, view));
    ExplicitSynthesis out{compile(sk.model, sk.vars), {}, {}};
    const CompiledModel& cm = out.model;
    std::vector<GlobalState> states = initial_states(cm, bound);
    const int last = last_time(sk.vars);
    std::map<int, std::set<Observation>> tables;
    EvalContext step_ctx;
    step_ctx.skeleton = [&](int idx, const GlobalState& s) {
        return tables.at(idx).count(observe(cm, *cm.find_agent(cm.skeleton_vars[idx].agent), s)) > 0;
    };
    for (int k = 0; k <= last; ++k) {
        out.slices.push_back(states);
        ExplicitSlice slice(cm, states);
        EvalContext kctx;
        kctx.slice = &slice;
        for (const auto& v : sk.vars) {
            if (v.time != k) continue;
            ExplicitCondition c;
            c.var = v;
            c.agent = *cm.find_agent(v.agent);
            RExpr f = cm.resolve_skeleton(v);
            for (const auto& s : states) {
                Observation o = observe(cm, c.agent, s);
                c.care.insert(o);
                if (holds(cm, f, s, kctx)) c.truth.insert(o);
            }
            tables[*cm.find_skeleton(v.id)] = c.truth;
            out.conditions.push_back(std::move(c));
        }
        if (k == last) break;
        std::set<GlobalState> next;
        for (const auto& s : states) {
            for (auto& t : successors(cm, s, k, step_ctx)) next.insert(std::move(t));
            if (next.size() > bound) throw UsageError("slice " + std::to_string(k + 1) + " exceeds " + std::to_string(bound) + " states");
        }
        states.assign(next.begin(), next.end());
    }
    return out;
}

double count_runs(const ExplicitSynthesis& s, int length, std::size_t bound) {
    const CompiledModel& cm = s.model;
    EvalContext ctx = s.context();
    std::map<GlobalState, double> layer;
    for (const auto& st : initial_states(cm, bound)) layer[st] = 1;
    for (int t = 0; t < length; ++t) {
        std::map<GlobalState, double> next;
        for (const auto& [st, n] : layer)
            for (auto& succ : successors(cm, st, t, ctx)) next[std::move(succ)] += n;
        if (next.size() > bound) throw UsageError("layer " + std::to_string(t + 1) + " exceeds the state bound");
        layer = std::move(next);
    }
    double total = 0;
    for (const auto& [st, n] : layer) total += n;
    return total;
}

}  // namespace kbp
