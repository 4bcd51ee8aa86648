#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kbp/corpus.hpp"
#include "kbp/epistemic.hpp"
#include "kbp/parser.hpp"
#include "kbp/printer.hpp"
#include "kbp/synthesis.hpp"
#include "test_util.hpp"

#include <set>

using namespace kbp;
using kbp::testing::read_corpus;

namespace {

std::set<GlobalState> as_set(const std::vector<GlobalState>& v) { return {v.begin(), v.end()}; }

// Brute-force truth of an atemporal formula over an explicit slice.
std::set<GlobalState> brute_sat(const CompiledModel& m, const std::vector<GlobalState>& slice_states, const RExpr& phi) {
    ExplicitSlice slice(m, slice_states);
    EvalContext ctx;
    ctx.slice = &slice;
    std::set<GlobalState> out;
    for (const auto& s : slice.states())
        if (holds(m, phi, s, ctx)) out.insert(s);
    return out;
}

// Reachable slices of a model whose guards are evaluated in the slice itself.
std::vector<std::vector<GlobalState>> slices_of(const CompiledModel& m) {
    std::vector<std::vector<GlobalState>> out{initial_states(m)};
    for (int k = 0; k < m.length; ++k) {
        ExplicitSlice slice(m, out.back());
        EvalContext ctx;
        ctx.slice = &slice;
        std::set<GlobalState> next;
        for (const auto& s : out.back())
            for (auto& t : successors(m, s, k, ctx)) next.insert(std::move(t));
        out.emplace_back(next.begin(), next.end());
    }
    return out;
}

// Formulas over every Boolean environment variable: K_i p, K_i neg p,
// K_i K_j p, and a disjunction mixing knowledge with a plain atom.
std::vector<ast::ExprPtr> probe_formulas(const CompiledModel& m) {
    std::vector<ast::ExprPtr> out;
    for (int v : m.env_vars) {
        if (m.vars[v].dom.kind != Domain::Kind::Bool) continue;
        const std::string& p = m.vars[v].name;
        for (const auto& a : m.agents) {
            out.push_back(parse_formula("Knows " + a.name + " " + p));
            out.push_back(parse_formula("Knows " + a.name + " neg " + p));
            out.push_back(parse_formula("neg Knows " + a.name + " " + p + " \\/ " + p));
            for (const auto& b : m.agents) out.push_back(parse_formula("Knows " + a.name + " Knows " + b.name + " " + p));
        }
    }
    return out;
}

// Every state sequence of `length` steps of a standard model.
std::vector<Trace> all_runs(const CompiledModel& m, int length) {
    std::vector<Trace> frontier;
    for (const auto& s : initial_states(m)) frontier.push_back(Trace{{s}, {}});
    for (int t = 0; t < length; ++t) {
        std::vector<Trace> next;
        for (const auto& tr : frontier)
            for (const auto& s : successors(m, tr.states.back(), t)) {
                Trace ext = tr;
                ext.states.push_back(s);
                next.push_back(std::move(ext));
            }
        frontier = std::move(next);
    }
    return frontier;
}

}  // namespace

TEST_CASE("views") {
    CHECK(parse_view("clk") == View::Clk);
    CHECK(parse_view("spr") == View::Spr);
    CHECK(parse_view("obs") == View::Obs);
    CHECK(to_string(View::Spr) == "spr");
    try {
        parse_view("async");
        FAIL("expected a usage error");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("clk or spr") != std::string::npos);
    }
}

TEST_CASE("sat set: two children at time zero") {
    CompiledModel m = compile(parse_model(read_corpus("fig2.kbp")));
    SymbolicSystem sys(m);
    bdd::Bdd s0 = sys.initial_set();
    CHECK(sat_set(sys, s0, RExpr::constant(1)) == s0);
    auto k0 = sys.states(sat_set(sys, s0, m.resolve_global(parse_formula("Knows C0 muddy[C0]"))));
    REQUIRE(k0.size() == 1);
    CHECK(k0[0][*m.find_var("muddy[C0]")] == 1);
    CHECK(k0[0][*m.find_var("muddy[C1]")] == 0);
    CHECK(sat_set(sys, s0, m.resolve_global(parse_formula("Knows C0 neg muddy[C0]"))).is_zero());
    CHECK_THROWS_AS(sat_set(sys, s0, RExpr{RExpr::Kind::Next, 1, 0, {RExpr::constant(1)}}), UsageError);
}

TEST_CASE("sat set agrees with brute force; veridicality and introspection") {
    std::vector<std::string> texts;
    for (const auto& f : kbp::testing::corpus_files()) texts.push_back(read_corpus(f));
    texts.push_back(corpus::muddy(3));
    texts.push_back(corpus::muddy(3, true));
    int checked = 0;
    for (const auto& text : texts) {
        CompiledModel m = compile(parse_model(text));
        if (m.state_bits() > 12) continue;
        INFO(m.source.agents.front().name);
        SymbolicSystem sys(m);
        for (const auto& slice_states : slices_of(m)) {
            bdd::Bdd slice = sys.manager().zero();
            for (const auto& s : slice_states) slice |= sys.encode(s);
            for (const auto& f : probe_formulas(m)) {
                INFO(print(f));
                RExpr phi = m.resolve_global(f);
                bdd::Bdd sat = sat_set(sys, slice, phi);
                CHECK(as_set(sys.states(sat)) == brute_sat(m, slice_states, phi));
                if (phi.kind == RExpr::Kind::Knows) {
                    CHECK((sat & ~sat_set(sys, slice, phi.args[0])).is_zero());
                    RExpr twice{RExpr::Kind::Knows, phi.a, 0, {phi}};
                    CHECK(sat_set(sys, slice, twice) == sat);
                }
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("observation sets and class constancy") {
    CompiledModel m = compile(parse_model(read_corpus("fig2.kbp")));
    Skeleton sk = skeleton(m.source);
    CompiledModel cm = compile(sk.model, sk.vars);
    SymbolicSystem sys(cm);
    bdd::Bdd s0 = sys.initial_set();
    int c0 = *cm.find_agent("C0");
    const SkeletonVar& v = sk.vars.front();
    REQUIRE(v.agent == "C0");
    auto yes = sys.observations(c0, obs_sat(sys, s0, c0, cm.resolve_skeleton(v)));
    CHECK(yes == std::vector<Observation>{{0}});  // the other child is clean
    auto all = sys.observations(c0, obs_sat(sys, s0, c0, RExpr::constant(1)));
    CHECK(all == std::vector<Observation>{{0}, {1}});
    CHECK(realized_observations(sys, s0, c0) == obs_sat(sys, s0, c0, RExpr::constant(1)));
    CHECK_THROWS_AS(obs_sat(sys, s0, c0, RExpr::var(*cm.find_var("muddy[C0]"))), ValidationError);

    // class constancy for every condition of every corpus model, each in its own slice
    for (const auto& f : kbp::testing::corpus_files()) {
        SynthesisResult r = synthesize(parse_model(read_corpus(f)), {View::Clk, {}});
        SymbolicSystem& rs = *r.system;
        for (const auto& c : r.conditions) {
            INFO(f << " " << c.var.id);
            bdd::Bdd slice = r.slices[static_cast<std::size_t>(c.var.time)];
            bdd::Bdd sat = sat_set(rs, slice, r.compiled().resolve_skeleton(c.var));
            // a class is either inside or disjoint from the satisfying set
            bdd::Bdd mixed = rs.project(c.agent, sat) & rs.project(c.agent, slice & ~sat);
            CHECK(mixed.is_zero());
        }
    }
}

TEST_CASE("local states under the three views") {
    CompiledModel m = compile(parse_model(read_corpus("token.kbp")));
    Trace t = simulate(m, initial_states(m).front(), 2);
    for (int a = 0; a < 2; ++a) {
        CHECK(local_state(m, View::Spr, t, a, 0).observations == local_state(m, View::Obs, t, a, 0).observations);
        CHECK(local_state(m, View::Spr, t, a, 0).observations.size() == 1);
        CHECK(local_state(m, View::Spr, t, a, 2).observations.size() == 3);
        CHECK_FALSE(local_state(m, View::Clk, t, a, 0) == local_state(m, View::Clk, t, a, 2));
        CHECK_FALSE(local_state(m, View::Obs, t, a, 0).time.has_value());
    }
    // P0 sees the token at 0 and 2 only: obs agrees, clk and spr do not
    CHECK(local_state(m, View::Obs, t, 0, 0) == local_state(m, View::Obs, t, 0, 2));
    CHECK_THROWS_AS(local_state(m, View::Clk, t, 0, 3), UsageError);

    // equal observations now, different histories
    CompiledModel e = compile(parse_model(corpus::election(3, 2)));
    SynthesisResult r = synthesize(e.source, {View::Clk, {}});
    CompiledModel impl = compile(r.standard_model);
    auto runs = all_runs(impl, 2);
    bool found = false;
    for (const auto& x : runs)
        for (const auto& y : runs) {
            int a = 0;
            if (observe(impl, a, x.states[2]) != observe(impl, a, y.states[2])) continue;
            if (observe(impl, a, x.states[1]) == observe(impl, a, y.states[1])) continue;
            CHECK(local_state(impl, View::Clk, x, a, 2) == local_state(impl, View::Clk, y, a, 2));
            CHECK_FALSE(local_state(impl, View::Spr, x, a, 2) == local_state(impl, View::Spr, y, a, 2));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("history variables turn perfect recall into clock observations") {
    for (const std::string& text : {corpus::election(3, 3), corpus::muddy(3)}) {
        ast::Model m = parse_model(text);
        SynthesisResult r = synthesize(m, {View::Spr, {}});
        CompiledModel impl = compile(r.standard_model);
        const int length = impl.length;
        auto runs = all_runs(impl, length);
        REQUIRE(runs.size() > 1);
        for (int a = 0; a < static_cast<int>(impl.agents.size()); ++a) {
            // observables that are not history records
            std::vector<std::size_t> base;
            for (std::size_t k = 0; k < impl.agents[a].observables.size(); ++k)
                if (impl.vars[impl.agents[a].observables[k]].name.find('@') == std::string::npos) base.push_back(k);
            auto base_obs = [&](const GlobalState& s) {
                Observation o = observe(impl, a, s), out;
                for (auto k : base) out.push_back(o[k]);
                return out;
            };
            for (int t = 0; t <= length; ++t)
                for (const auto& x : runs)
                    for (const auto& y : runs) {
                        bool same_history = true;
                        for (int k = 0; k <= t; ++k) same_history = same_history && base_obs(x.states[k]) == base_obs(y.states[k]);
                        CHECK(same_history == (observe(impl, a, x.states[t]) == observe(impl, a, y.states[t])));
                    }
        }
    }
}
