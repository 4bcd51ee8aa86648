#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kbp/corpus.hpp"
#include "kbp/oracle.hpp"
#include "kbp/parser.hpp"
#include "kbp/synthesis.hpp"
#include "test_util.hpp"

using namespace kbp;
using kbp::testing::read_corpus;

namespace {

const std::string kEveryoneKnows = "Forall x:Agent (Knows x muddy[x] \\/ Knows x neg muddy[x])";

int muddy_count(const CompiledModel& m, const GlobalState& s) {
    int k = 0;
    for (const auto& a : m.agents) k += s[*m.find_var("muddy[" + a.name + "]")];
    return k;
}

}  // namespace

TEST_CASE("synthesized conditions implement their programs") {
    std::vector<std::string> texts;
    for (const auto& f : kbp::testing::corpus_files()) texts.push_back(read_corpus(f));
    texts.push_back(corpus::muddy(3));
    texts.push_back(corpus::muddy(3, true));
    texts.push_back(corpus::election(3, 2));
    for (const auto& text : texts) {
        ast::Model m = parse_model(text);
        for (View v : {View::Clk, View::Spr}) {
            SynthesisResult r = synthesize(m, {v, {}});
            CheckReport rep = check_implementation(m, r.theta, v);
            CHECK(rep.pass());
            CHECK(rep.entries.size() == r.conditions.size());
            // the sidecar alone suffices
            CHECK(check_implementation(m, read_sidecar(skeleton(prepare_for_view(m, v)), emit(r).sidecar), v).pass());
        }
    }
}

TEST_CASE("a wrong condition fails with a replayable witness") {
    ast::Model m = parse_model(read_corpus("fig2.kbp"));
    SynthesisResult r = synthesize(m, {View::Clk, {}});
    Substitution wrong = r.theta;
    const SkeletonVar& c0 = r.skeleton.vars.front();
    REQUIRE(c0.agent == "C0");
    wrong[c0.id] = ast::Expr::boolean(true);
    CheckReport rep = check_implementation(m, wrong, View::Clk);
    CHECK_FALSE(rep.pass());
    const CheckEntry* bad = nullptr;
    for (const auto& e : rep.entries)
        if (!e.pass) bad = &e;
    REQUIRE(bad != nullptr);
    CHECK(bad->agent == "C0");
    REQUIRE(bad->witness.has_value());
    REQUIRE(bad->trace.has_value());
    const CompiledModel& cm = r.compiled();
    // C0 cannot know its state when the other child is muddy
    CHECK((*bad->witness)[*cm.find_var("muddy[C1]")] == 1);
    CHECK(bad->trace->states.back() == *bad->witness);
    CHECK(bad->observation == Observation{1});
    CHECK(rep.str().find("FAIL C0 0 ") != std::string::npos);
    CHECK(rep.str().find("  witness ") != std::string::npos);

    // a later mistake comes with a trace through earlier slices
    ast::Model m3 = parse_model(corpus::muddy(3));
    SynthesisResult r3 = synthesize(m3, {View::Spr, {}});
    Substitution late = r3.theta;
    for (const auto& v : r3.skeleton.vars)
        if (v.time == 2 && v.agent == "Child1") late[v.id] = ast::Expr::boolean(false);
    CheckReport rep3 = check_implementation(m3, late, View::Spr);
    CHECK_FALSE(rep3.pass());
    for (const auto& e : rep3.entries) {
        if (e.pass) continue;
        CHECK(e.time == 2);
        REQUIRE(e.trace.has_value());
        CHECK(e.trace->states.size() == 3);
        CHECK(e.trace->steps.size() == 2);
        CHECK(e.trace_text.find("t=2 ") != std::string::npos);
    }
}

TEST_CASE("implementation check: vacuous pass and malformed substitutions") {
    ast::Model token = parse_model(read_corpus("token.kbp"));
    CheckReport rep = check_implementation(token, {}, View::Clk);
    CHECK(rep.pass());
    CHECK(rep.entries.empty());

    ast::Model fig2 = parse_model(read_corpus("fig2.kbp"));
    SynthesisResult r = synthesize(fig2, {View::Clk, {}});
    Substitution gap = r.theta;
    gap.erase(gap.begin());
    CHECK_THROWS_AS(check_implementation(fig2, gap, View::Clk), UsageError);
    Substitution peeking = r.theta;
    peeking.begin()->second = parse_formula("muddy[C0]");
    CHECK_THROWS_AS(check_implementation(fig2, peeking, View::Clk), ValidationError);
    CHECK_THROWS_AS(check_implementation(fig2, r.theta, View::Obs), UsageError);
}

TEST_CASE("bounded model checking of X^k formulas") {
    ast::Model m3 = parse_model(corpus::muddy(3));
    SynthesisResult r = synthesize(m3, {View::Spr, {}});
    const ast::Model& impl = r.standard_model;
    ast::ExprPtr phi = parse_formula(kEveryoneKnows);

    ModelCheckResult at3 = model_check_X(impl, View::Spr, 3, phi);
    CHECK(at3.holds);
    CHECK(at3.slice_sizes == std::vector<double>{7, 7, 7, 7});
    CHECK(model_check(impl, View::Spr, parse_formula("X^3 " + kEveryoneKnows)).holds);

    ModelCheckResult at1 = model_check_X(impl, View::Spr, 1, phi);
    CHECK_FALSE(at1.holds);
    REQUIRE(at1.counterexample.has_value());
    REQUIRE(at1.trace.has_value());
    CompiledModel cm = compile(with_perfect_recall(impl));
    CHECK(muddy_count(cm, *at1.counterexample) >= 2);
    CHECK(at1.trace->states.back() == *at1.counterexample);
    CHECK(replay(cm, at1.trace->states).states == at1.trace->states);

    // the initial condition holds at depth zero everywhere
    for (const auto& f : kbp::testing::corpus_files()) {
        ast::Model m = parse_model(read_corpus(f));
        ast::Model standard = synthesize(m, {View::Clk, {}}).standard_model;
        ast::ExprPtr init = standard.init ? standard.init : ast::Expr::boolean(true);
        CHECK(model_check_X(standard, View::Clk, 0, init).holds);
    }

    CHECK_THROWS_AS(model_check_X(m3, View::Spr, 1, phi), UsageError);
    CHECK_THROWS_AS(model_check_X(impl, View::Spr, 4, phi), UsageError);
    CHECK_THROWS_AS(model_check_X(impl, View::Obs, 1, phi), UsageError);
    CHECK(model_check_X(impl, View::Obs, 1, parse_formula("muddy[Child0] \\/ neg muddy[Child0]")).holds);
    CHECK_THROWS_AS(model_check_X(impl, View::Spr, 1, parse_formula("X^1 true")), UsageError);
}

TEST_CASE("explicit synthesis: tables and agreement") {
    ExplicitSynthesis ex = explicit_synthesize(parse_model(read_corpus("fig2.kbp")), View::Clk);
    REQUIRE(ex.conditions.size() == 2);
    CHECK(ex.conditions[0].care == std::set<Observation>{{0}, {1}});
    CHECK(ex.conditions[0].truth == std::set<Observation>{{0}});

    std::string text = read_corpus("fig2.kbp");
    text.replace(text.find("muddy[C0] \\/ muddy[C1]"), 22, "false");
    ExplicitSynthesis empty = explicit_synthesize(parse_model(text), View::Clk);
    for (const auto& c : empty.conditions) {
        CHECK(c.care.empty());
        CHECK(c.truth.empty());
    }
    CHECK_THROWS_AS(explicit_synthesize(parse_model(corpus::muddy(6)), View::Clk, 10), UsageError);

    for (const auto& f : kbp::testing::corpus_files()) {
        ast::Model m = parse_model(read_corpus(f));
        SynthesisResult r = synthesize(m, {View::Clk, {}});
        ExplicitSynthesis e = explicit_synthesize(m, View::Clk);
        REQUIRE(e.conditions.size() == r.conditions.size());
        for (std::size_t i = 0; i < r.conditions.size(); ++i) {
            const Condition& c = r.conditions[i];
            INFO(f << " " << c.var.id);
            auto realized = r.system->observations(c.agent, c.care);
            CHECK(std::set<Observation>(realized.begin(), realized.end()) == e.conditions[i].care);
            for (const auto& o : e.conditions[i].care)
                CHECK(r.system->eval_observation(c.function, c.agent, o) == (e.conditions[i].truth.count(o) > 0));
        }
        for (std::size_t k = 0; k < r.slices.size(); ++k) CHECK(r.system->states(r.slices[k]) == e.slices[k]);
    }
}

TEST_CASE("crash schedules of the three-agent ring") {
    for (int k : {1, 2, 3}) {
        ExplicitSynthesis ex = explicit_synthesize(parse_model(corpus::election(3, k)), View::Spr);
        CHECK(count_runs(ex, k) == (k + 1) * (k + 1) * (k + 1));
    }
    ExplicitSynthesis m3 = explicit_synthesize(parse_model(corpus::muddy(3)), View::Spr);
    CHECK(count_runs(m3, 3) == 7);  // deterministic: one run per initial state
}
