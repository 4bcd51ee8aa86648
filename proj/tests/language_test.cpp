#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kbp/corpus.hpp"
#include "kbp/model.hpp"
#include "kbp/parser.hpp"
#include "kbp/printer.hpp"
#include "kbp/transform.hpp"
#include "test_util.hpp"

#include <set>

using namespace kbp;
using ast::ExprKind;
using kbp::testing::read_corpus;

namespace {

bool has_rule(const ValidationReport& r, const std::string& rule) {
    for (const auto& d : r.diagnostics)
        if (d.rule == rule) return true;
    return false;
}

int count_kind(const ast::ExprPtr& e, ExprKind k) {
    if (!e) return 0;
    int n = e->kind == k ? 1 : 0;
    for (const auto& a : e->args) n += count_kind(a, k);
    return n;
}

int count_in_program(const ast::Program& p, ExprKind k) {
    int n = 0;
    ast::for_each_expr(p, [&](const ast::ExprPtr& e) { n += count_kind(e, k); });
    return n;
}

const std::string kTwoChildren = R"(
muddy : Bool[Agent]
flag : Bool
init_cond = muddy[A] \/ muddy[B]
agent A "p" (muddy[B])
agent B "p" (muddy[A])
transitions begin end
)";

}  // namespace

TEST_CASE("parse: the four-children document") {
    ast::Model m = parse_model(read_corpus("muddy4.kbp"));
    REQUIRE(m.agents.size() == 4);
    REQUIRE(m.protocols.size() == 1);
    CHECK(m.protocols[0].body.size() == 4);
    CHECK(m.transitions.size() == 4);
    CHECK(m.agents[2].args[0].name == "info");
    CHECK(m.agents[2].args[0].index == "Child3");
    for (const auto& st : m.protocols[0].body) {
        REQUIRE(st.branch);
        CHECK(st.arms.size() == 2);
        CHECK(st.arms[1].is_otherwise());
        CHECK(*st.arms[0].body.action == "SayYes");
    }
    CHECK(m.knowledge_based());
}

TEST_CASE("parse: empty protocol body has length zero") {
    ast::Model m = parse_model(kTwoChildren + "protocol \"p\" (o : observable Bool) begin end\n");
    CHECK(m.protocols[0].body.empty());
}

TEST_CASE("parse: syntax errors carry positions") {
    const std::string unbalanced = kTwoChildren + "protocol \"p\" (o : observable Bool)\nbegin\n  if o -> skip\nend\n";
    try {
        parse_model(unbalanced);
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.pos().line == 11);
    }
    CHECK_THROWS_AS(parse_model("x : Bool\nx : Bool\n"), SyntaxError);
    CHECK_THROWS_AS(parse_model("type T = {a, a}\n"), SyntaxError);
    CHECK_THROWS_AS(parse_model("protocol \"p\" (a : Bool, a : Bool) begin end\n"), SyntaxError);
    CHECK_THROWS_AS(parse_model("x : Bool\ninit_cond = x ==\n"), SyntaxError);
    CHECK_THROWS_AS(parse_formula("a == b == c"), SyntaxError);
    CHECK_THROWS_AS(parse_model("x : Bool[Other]\n"), SyntaxError);
}

TEST_CASE("parse: operator precedence") {
    auto e = parse_formula("neg leader == 3");
    REQUIRE(e->kind == ExprKind::Not);
    CHECK(e->args[0]->kind == ExprKind::Eq);

    e = parse_formula("Knows Self a \\/ b /\\ c");
    REQUIRE(e->kind == ExprKind::Or);
    CHECK(e->args[0]->kind == ExprKind::Knows);
    CHECK(e->args[1]->kind == ExprKind::And);

    e = parse_formula("X^3 Forall x:Agent (Knows x muddy[x] \\/ Knows x neg muddy[x])");
    REQUIRE(e->kind == ExprKind::Next);
    CHECK(e->number == 3);
    CHECK(e->args[0]->kind == ExprKind::Quant);
    CHECK(e->args[0]->truth);

    e = parse_formula("h@12 == x");
    CHECK(e->args[0]->name == "h@12");
}

TEST_CASE("printer: round trip on formulas") {
    const char* samples[] = {
        "neg (a \\/ b) /\\ c",
        "a \\/ (b \\/ c)",
        "(a /\\ b) /\\ c",
        "a /\\ (b /\\ c)",
        "(neg a) == b",
        "neg neg a",
        "Knows Self (a /\\ b)",
        "Knows Self Knows A neg x[Self]",
        "X X^2 (p \\/ q)",
        "Exists x : Agent (m[x]) /\\ Forall y : Agent () (neg s[y])",
        "(a == b) == c",
        "e == lab",
        "A.Go \\/ v == 3",
    };
    for (const char* s : samples) {
        INFO(s);
        auto e = parse_formula(s);
        auto again = parse_formula(print(e));
        CHECK(ast::equal(e, again));
        CHECK(print(again) == print(e));
    }
}

TEST_CASE("printer: parse . print . parse is stable on every corpus document") {
    std::vector<std::string> docs;
    for (const auto& f : kbp::testing::corpus_files()) docs.push_back(read_corpus(f));
    for (int n = 2; n <= 5; ++n) {
        docs.push_back(corpus::muddy(n, false));
        docs.push_back(corpus::muddy(n, true));
        docs.push_back(corpus::election(n, 3));
    }
    for (const auto& d : docs) {
        ast::Model m = parse_model(d);
        std::string text = print(m);
        ast::Model again = parse_model(text);
        CHECK(ast::equal(m, again));
        CHECK(print(again) == text);
    }
}

TEST_CASE("generated four-children model is the hand-written one") {
    CHECK(ast::equal(parse_model(corpus::muddy(4)), parse_model(read_corpus("muddy4.kbp"))));
}

TEST_CASE("validate: corpus and generated models are accepted") {
    for (const auto& f : kbp::testing::corpus_files()) {
        INFO(f);
        auto r = validate(parse_model(read_corpus(f)));
        for (const auto& d : r.diagnostics) MESSAGE(d.str());
        CHECK(r.ok());
    }
    for (int n = 2; n <= 6; ++n) {
        CHECK(validate(parse_model(corpus::muddy(n, false))).ok());
        CHECK(validate(parse_model(corpus::muddy(n, true))).ok());
    }
    for (int n = 2; n <= 4; ++n) CHECK(validate(parse_model(corpus::election(n, 2))).ok());
}

TEST_CASE("validate: scope, typing and atemporality violations") {
    auto check = [](const std::string& protocol_text, const std::string& rule) {
        auto r = validate(parse_model(kTwoChildren + protocol_text));
        INFO(protocol_text);
        for (const auto& d : r.diagnostics) MESSAGE(d.str());
        CHECK(has_rule(r, rule));
    };
    // another agent's local, written as a dotted name
    check("protocol \"p\" (o : observable Bool) v : Bool begin if B.v -> skip fi end", "scope");
    // environment variable outside a knowledge operator
    check("protocol \"p\" (o : observable Bool) begin if flag -> skip fi end", "scope");
    check("protocol \"p\" (o : observable Bool) begin if X (Knows Self o) -> skip fi end", "atemporal");
    check("protocol \"p\" (o : observable Bool) begin if Knows Self X o -> skip fi end", "atemporal");
    check("protocol \"p\" (o : observable Bool) v : Bool begin << | v := true, v := false >> end",
          "duplicate-assignment");
    check("protocol \"p\" (o : observable Bool) begin o := true end", "target");
    check("protocol \"p\" (o : observable Bool) v : 0..2 begin v := 3 end", "type");
    check("protocol \"p\" (o : observable Bool) v : 0..2 begin v := o end", "type");
    check("protocol \"p\" (o : observable Bool) v : Bool init_cond = o begin end", "init-scope");
    check("protocol \"p\" (o : observable Bool, q : Bool) begin end", "arity");
    check("protocol \"p\" (o : observable 0..3) begin end", "type");
    check("protocol \"p\" (o : observable Bool) begin if nothing -> skip fi end", "unknown-name");

    auto tau = [](const std::string& body, const std::string& rule) {
        auto r = validate(parse_model("x : Bool\nagent A \"p\" ()\ntransitions begin " + body +
                                      " end\nprotocol \"p\" () v : Bool begin << Go >> end\n"));
        INFO(body);
        CHECK(has_rule(r, rule));
    };
    tau("if Knows A x -> skip fi", "tau-knowledge");
    tau("x := A.v", "unknown-name");
    CHECK_THROWS_AS(parse_model("transitions begin A.v := true end\n"), SyntaxError);
    tau("<< Go >>", "tau-action");
    auto ok = validate(parse_model("x : Bool\nagent A \"p\" ()\ntransitions begin x := A.Go; x := neg x end\n"
                                   "protocol \"p\" () v : Bool begin << Go >> end\n"));
    CHECK(ok.ok());
}

TEST_CASE("compile: variables, observables and padding") {
    CompiledModel m = compile(parse_model(read_corpus("muddy4.kbp")));
    CHECK(m.env_vars.size() == 8);
    CHECK(m.vars[*m.find_var("muddy[Child2]")].dom.kind == Domain::Kind::Bool);
    CHECK(m.actions == std::vector<std::string>{"SayYes"});
    CHECK(m.length == 4);
    const CAgent& c0 = m.agents[0];
    std::vector<int> expected{*m.find_var("info[Child1]"), *m.find_var("info[Child2]"), *m.find_var("info[Child3]")};
    CHECK(c0.observables == expected);
    CHECK(m.knowledge_based);

    CompiledModel e = compile(parse_model(corpus::election(3, 2)));
    CHECK(e.vars[*e.find_var("leader")].dom.size == 4);
    CHECK(e.vars[*e.find_var("leader")].dom.bits() == 2);
    CHECK(e.actions.size() == 3);

    // programs of different lengths are padded
    CompiledModel t = compile(parse_model(read_corpus("coin.kbp")));
    CHECK(t.length == 2);
    for (const auto& a : t.agents) CHECK(a.program.size() == 2);
}

TEST_CASE("skeleton: the one-round program") {
    ast::Model m = parse_model(read_corpus("fig2.kbp"));
    Skeleton s = skeleton(m);
    // one variable per child: the second guard is the negation of the first
    REQUIRE(s.vars.size() == 2);
    for (const auto& v : s.vars) {
        CHECK(v.time == 0);
        CHECK(canonical_text(v.formula) == "Knows Self muddy[Self] \\/ Knows Self neg muddy[Self]");
    }
    const auto& body = s.model.find_protocol(s.model.agents[0].protocol)->body;
    REQUIRE(body[0].arms.size() == 2);
    CHECK(body[0].arms[0].guard->kind == ExprKind::Skel);
    CHECK(body[0].arms[1].guard->kind == ExprKind::Not);
    CHECK(body[0].arms[1].guard->args[0]->name == body[0].arms[0].guard->name);
    CHECK(count_in_program(body, ExprKind::Knows) == 0);
}

TEST_CASE("skeleton: knowledge-free program is unchanged") {
    ast::Model m = parse_model(read_corpus("token.kbp"));
    Skeleton s = skeleton(m);
    CHECK(s.vars.empty());
    CHECK(ast::equal(merge_protocols(s.model, m), m));
}

TEST_CASE("skeleton: one variable per time, maximal subformulas, idempotence") {
    ast::Model m = parse_model(read_corpus("muddy4.kbp"));
    Skeleton s = skeleton(m);
    CHECK(s.vars.size() == 16);
    std::set<std::string> ids;
    for (const auto& v : s.vars) ids.insert(v.id);
    CHECK(ids.size() == 16);
    std::set<int> times;
    for (const auto& v : s.vars)
        if (v.agent == "Child0") times.insert(v.time);
    CHECK(times == std::set<int>{0, 1, 2, 3});

    Skeleton again = skeleton(s.model);
    CHECK(again.vars.empty());
    CHECK(ast::equal(again.model.protocols[0].body, s.model.protocols[0].body));

    // non-observable parameter splits the guard: crashed stays outside
    Skeleton e = skeleton(parse_model(corpus::election(3, 2)));
    int per_agent_step = 0;
    for (const auto& v : e.vars)
        if (v.agent == "A1" && v.time == 1) ++per_agent_step;
    CHECK(per_agent_step == 3);
    CompiledModel cm = compile(e.model, e.vars);
    for (const auto& v : e.vars) {
        CHECK_FALSE(ast::contains_next(*v.formula));
        RExpr f = cm.resolve_skeleton(v);
        std::vector<int> fv;
        free_vars(f, fv);
        const auto& obs = cm.agents[*cm.find_agent(v.agent)].observables;
        for (int x : fv) CHECK(std::binary_search(obs.begin(), obs.end(), x));
    }
}

TEST_CASE("skeleton: other agents' knowledge cannot be implemented") {
    ast::Model m = parse_model(kTwoChildren + "protocol \"p\" (o : observable Bool) begin if Knows B muddy[B] -> skip fi end");
    CHECK_THROWS_AS(skeleton(m), ValidationError);
}

TEST_CASE("history transform") {
    SUBCASE("one observable, length two") {
        ast::Model m = parse_model("y : Bool\nagent A \"p\" (y)\ntransitions begin end\n"
                                   "protocol \"p\" (x : observable Bool) begin << Go >>; if x -> skip fi end\n");
        ast::Model h = history_transform(m, 2);
        const auto& p = h.protocols[0];
        REQUIRE(p.locals.size() == 2);
        CHECK(p.locals[0].name == "x@0");
        CHECK(p.locals[1].name == "x@1");
        CHECK(p.locals[0].observable);
        REQUIRE(p.body[0].atomic.assigns.size() == 1);
        CHECK(p.body[0].atomic.assigns[0].target.name == "x@0");
        CHECK(*p.body[0].atomic.action == "Go");
        // the implicit skip arm now records history too
        REQUIRE(p.body[1].arms.size() == 2);
        CHECK(p.body[1].arms[1].is_otherwise());
        CHECK(p.body[1].arms[1].body.assigns[0].target.name == "x@1");
        CHECK(validate(h).ok());
    }
    SUBCASE("length zero") {
        ast::Model m = parse_model(read_corpus("muddy4.kbp"));
        CHECK(ast::equal(history_transform(m, 0), m));
    }
    SUBCASE("four children: twelve variables per child, lengths and actions kept") {
        ast::Model m = parse_model(read_corpus("muddy4.kbp"));
        ast::Model h = history_transform(m, 4);
        const auto& before = m.protocols[0];
        const auto& after = h.protocols[0];
        CHECK(after.locals.size() - before.locals.size() == 12);
        CHECK(after.body.size() == before.body.size());
        for (std::size_t t = 0; t < before.body.size(); ++t) {
            for (std::size_t a = 0; a < before.body[t].arms.size(); ++a) {
                CHECK(after.body[t].arms[a].body.action == before.body[t].arms[a].body.action);
                CHECK(after.body[t].arms[a].body.assigns.size() == 3);
            }
        }
        CompiledModel cm = compile(h);
        CHECK(cm.agents[0].observables.size() == 15);
        CHECK(cm.vars[*cm.find_var("Child0.info2@3")].history_time == 3);
    }
    SUBCASE("collision") {
        ast::Model m = parse_model("y : Bool\nagent A \"p\" (y)\ntransitions begin end\n"
                                   "protocol \"p\" (x : observable Bool) x@0 : Bool begin skip end\n");
        CHECK_THROWS_AS(history_transform(m, 1), ValidationError);
    }
}

TEST_CASE("substitute") {
    ast::Model m = parse_model(read_corpus("fig2.kbp"));
    Skeleton s = skeleton(m);
    SUBCASE("empty skeleton, empty substitution") {
        ast::Model t = parse_model(read_corpus("token.kbp"));
        Skeleton st = skeleton(t);
        CHECK(ast::equal(substitute(st.model, {}), st.model));
    }
    SUBCASE("constant true gives the original structure") {
        Substitution theta;
        for (const auto& v : s.vars) theta[v.id] = ast::Expr::boolean(true);
        ast::Model out = merge_protocols(substitute(s.model, theta), m);
        REQUIRE(out.protocols.size() == 1);
        const auto& st = out.protocols[0].body[0];
        CHECK(print(st.arms[0].guard) == "true");
        CHECK(print(st.arms[1].guard) == "neg true");
        CHECK(*st.arms[1].body.action == "SayNo");
        CHECK_FALSE(out.knowledge_based());
        CHECK(validate(out).ok());
    }
    SUBCASE("missing binding") { CHECK_THROWS_AS(substitute(s.model, {}), UsageError); }
    SUBCASE("images must be observable") {
        ast::Model two = parse_model(corpus::muddy(2));
        Skeleton sk = skeleton(two);
        CompiledModel cm = compile(sk.model, sk.vars);
        CHECK_NOTHROW(cm.resolve_observable(0, parse_formula("neg info1")));
        CHECK_THROWS_AS(cm.resolve_observable(0, parse_formula("muddy[Child0]")), ValidationError);
    }
}
