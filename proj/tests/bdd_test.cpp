#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kbp/bdd.hpp"
#include "truth_table.hpp"

#include <map>
#include <set>
#include <random>

using kbp::bdd::BinOp;
using kbp::bdd::Bdd;
using kbp::bdd::Manager;
using kbp::bdd::VarId;
using kbp::testing::TruthTable;

namespace {

std::vector<VarId> make_vars(Manager& m, int n) {
    std::vector<VarId> vs;
    for (int i = 0; i < n; ++i) vs.push_back(m.new_var("x" + std::to_string(i)));
    return vs;
}

std::uint32_t apply_table(BinOp op, std::uint32_t a, std::uint32_t b, std::uint32_t mask) {
    switch (op) {
        case BinOp::And: return a & b;
        case BinOp::Or: return a | b;
        case BinOp::Xor: return a ^ b;
        case BinOp::Implies: return (~a | b) & mask;
        case BinOp::Iff: return ~(a ^ b) & mask;
    }
    return 0;
}

}  // namespace

TEST_CASE("literals") {
    Manager m;
    VarId a = m.new_var("a");
    m.new_var("b");
    CHECK(m.eval(m.var(a), {true, false}));
    CHECK_FALSE(m.eval(m.var(a), {false, false}));
    CHECK(m.var(a) == m.var(a));
    CHECK_THROWS_AS(m.var(7), std::out_of_range);
}

TEST_CASE("negation") {
    Manager m;
    VarId a = m.new_var("a");
    VarId b = m.new_var("b");
    CHECK(m.negate(m.zero()) == m.one());
    Bdd f = m.var(a) ^ m.var(b);
    CHECK(~~f == f);
    CHECK_FALSE(m.eval(~m.var(a), {true, false}));
}

TEST_CASE("contradiction and the xor diagram") {
    Manager m;
    VarId a = m.new_var("a");
    VarId b = m.new_var("b");
    VarId c = m.new_var("c");
    CHECK((m.var(a) & ~m.var(a)).is_zero());

    Bdd x = m.apply(BinOp::Xor, m.var(a), m.var(b));
    CHECK(m.node_count(x) == 3);
    auto supp = m.support(x);
    CHECK(std::find(supp.begin(), supp.end(), c) == supp.end());
}

TEST_CASE("manager mismatch is rejected") {
    Manager m1;
    Manager m2;
    VarId a = m1.new_var("a");
    VarId b = m2.new_var("b");
    CHECK_THROWS_AS(m1.apply(BinOp::And, m1.var(a), m2.var(b)), std::invalid_argument);
    CHECK_THROWS_AS(m1.var(a) | m2.var(b), std::invalid_argument);
}

TEST_CASE("binary operations agree with truth tables on every pair of 3-variable functions") {
    Manager m;
    auto vs = make_vars(m, 3);
    std::vector<Bdd> fns;
    for (std::uint32_t t = 0; t < 256; ++t) fns.push_back(TruthTable(3, t).build(m, vs));
    for (BinOp op : {BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Implies, BinOp::Iff}) {
        for (std::uint32_t f = 0; f < 256; ++f) {
            for (std::uint32_t g = 0; g < 256; ++g) {
                Bdd r = m.apply(op, fns[f], fns[g]);
                REQUIRE(TruthTable::of(m, r, vs).bits == apply_table(op, f, g, 0xff));
            }
        }
    }
    CHECK(m.check_invariants());
}

TEST_CASE("operations agree with truth tables exhaustively on random 4- and 5-variable functions") {
    std::mt19937 rng(7);
    for (int n : {4, 5}) {
        Manager m;
        auto vs = make_vars(m, n);
        const std::uint32_t mask = n == 5 ? 0xffffffffu : 0xffffu;
        for (int trial = 0; trial < 300; ++trial) {
            TruthTable tf(n, rng() & mask);
            TruthTable tg(n, rng() & mask);
            Bdd f = tf.build(m, vs);
            Bdd g = tg.build(m, vs);
            CHECK(TruthTable::of(m, f, vs) == tf);
            for (BinOp op : {BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Implies, BinOp::Iff}) {
                REQUIRE(TruthTable::of(m, m.apply(op, f, g), vs).bits == apply_table(op, tf.bits, tg.bits, mask));
            }
            REQUIRE(TruthTable::of(m, ~f, vs).bits == (~tf.bits & mask));

            // quantification over a random subset
            std::vector<VarId> q;
            std::vector<int> qi;
            for (int i = 0; i < n; ++i) {
                if (rng() & 1) {
                    q.push_back(vs[i]);
                    qi.push_back(i);
                }
            }
            REQUIRE(TruthTable::of(m, m.exists(f, q), vs) == tf.exists(qi));
            REQUIRE(TruthTable::of(m, m.forall(f, q), vs) == tf.forall(qi));
            REQUIRE(m.forall(f, q) == ~m.exists(~f, q));
            REQUIRE(m.and_exists(f, g, q) == m.exists(f & g, q));
            REQUIRE(m.sat_count(f, vs) == doctest::Approx(tf.count()));
        }
    }
}

TEST_CASE("exists") {
    Manager m;
    VarId a = m.new_var("a");
    VarId b = m.new_var("b");
    Bdd f = m.var(a) & m.var(b);
    std::vector<VarId> just_a{a};
    CHECK(m.exists(f, just_a) == m.var(b));
    CHECK(m.exists(f, std::vector<VarId>{}) == f);
    std::vector<VarId> all{a, b};
    CHECK(m.exists(f, all).is_one());
    CHECK(m.exists(m.var(a) & ~m.var(a), all).is_zero());
}

TEST_CASE("forall") {
    Manager m;
    VarId a = m.new_var("a");
    std::vector<VarId> just_a{a};
    CHECK(m.forall(m.var(a), just_a).is_zero());
    CHECK(m.forall(m.one(), just_a).is_one());
}

TEST_CASE("rename") {
    Manager m;
    VarId a = m.new_var("a");
    VarId a2 = m.new_var("a'");
    VarId b = m.new_var("b");
    VarId c = m.new_var("c");

    std::vector<std::pair<VarId, VarId>> sigma{{a, a2}};
    CHECK(m.rename(m.var(a), sigma) == m.var(a2));

    SUBCASE("round trip") {
        Bdd f = (m.var(a) & m.var(b)) | m.var(c);
        Bdd g = m.rename(f, sigma);
        std::vector<std::pair<VarId, VarId>> inv{{a2, a}};
        CHECK(m.rename(g, inv) == f);
    }

    SUBCASE("order-changing rename of a 3-variable relation matches the definition") {
        // f over (a, b, c); sigma: a -> c' where c' sits below c... use c -> a2, a -> c
        // is a swap-free permutation that reverses order: check pointwise.
        Manager m2;
        auto vs = make_vars(m2, 6);
        std::mt19937 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            TruthTable tf(3, rng() & 0xff);
            std::vector<VarId> dom{vs[0], vs[1], vs[2]};
            Bdd f = tf.build(m2, dom);
            // map x0->x5, x1->x3, x2->x4 : not monotone
            std::vector<std::pair<VarId, VarId>> s{{vs[0], vs[5]}, {vs[1], vs[3]}, {vs[2], vs[4]}};
            Bdd g = m2.rename(f, s);
            for (std::uint32_t asg = 0; asg < 8; ++asg) {
                std::vector<bool> point(6, false);
                point[5] = asg & 1;
                point[3] = (asg >> 1) & 1;
                point[4] = (asg >> 2) & 1;
                REQUIRE(m2.eval(g, point) == tf.at(asg));
            }
            // swap x0 <-> x1
            std::vector<std::pair<VarId, VarId>> swap{{vs[0], vs[1]}, {vs[1], vs[0]}};
            Bdd h = m2.rename(f, swap);
            for (std::uint32_t asg = 0; asg < 8; ++asg) {
                std::uint32_t swapped = (asg & 4) | ((asg & 1) << 1) | ((asg >> 1) & 1);
                REQUIRE(TruthTable::of(m2, h, dom).at(asg) == tf.at(swapped));
            }
        }
    }

    SUBCASE("errors") {
        Bdd f = m.var(a) & m.var(b);
        std::vector<std::pair<VarId, VarId>> clash{{a, b}};
        CHECK_THROWS_AS(m.rename(f, clash), std::invalid_argument);
        std::vector<std::pair<VarId, VarId>> non_injective{{a, c}, {b, c}};
        CHECK_THROWS_AS(m.rename(f, non_injective), std::invalid_argument);
    }
}

TEST_CASE("restrict") {
    Manager m;
    VarId a = m.new_var("a");
    VarId b = m.new_var("b");
    Bdd f = m.var(a) & m.var(b);
    CHECK(m.restrict(f, m.one()) == f);
    Bdd r = m.restrict(f, m.var(b));
    CHECK((r & m.var(b)) == (f & m.var(b)));
    CHECK_THROWS_AS(m.restrict(f, m.zero()), std::invalid_argument);

    SUBCASE("agreement on the care set and no growth on random 8-variable pairs") {
        Manager m8;
        auto vs = make_vars(m8, 8);
        std::mt19937 rng(11);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int trial = 0; trial < 100; ++trial) {
            Bdd f = kbp::testing::random_function(m8, vs, rng, 0.5);
            Bdd c = kbp::testing::random_function(m8, vs, rng, 0.7);
            if (c.is_zero()) continue;
            Bdd g = m8.restrict(f, c);
            REQUIRE(m8.node_count(g) <= m8.node_count(f));
            REQUIRE((g & c) == (f & c));
            REQUIRE(m8.restrict(f, c) == g);
        }
    }
}

TEST_CASE("enumerate_sats") {
    Manager m;
    VarId a = m.new_var("a");
    VarId b = m.new_var("b");
    std::vector<VarId> ab{a, b};
    CHECK(m.enumerate_sats(m.zero(), ab).empty());
    auto sats = m.enumerate_sats(m.var(a), ab);
    REQUIRE(sats.size() == 2);
    CHECK(sats[0] == std::vector<bool>{true, false});
    CHECK(sats[1] == std::vector<bool>{true, true});
    std::vector<VarId> just_b{b};
    CHECK_THROWS_AS(m.enumerate_sats(m.var(a), just_b), std::invalid_argument);

    SUBCASE("counts match truth tables over 5 variables") {
        Manager m5;
        auto vs = make_vars(m5, 5);
        std::mt19937 rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            TruthTable t(5, rng());
            Bdd f = t.build(m5, vs);
            auto all = m5.enumerate_sats(f, vs);
            REQUIRE(all.size() == t.count());
            std::set<std::vector<bool>> unique(all.begin(), all.end());
            REQUIRE(unique.size() == all.size());
            for (const auto& s : all) REQUIRE(m5.eval(f, s));
        }
    }
}

TEST_CASE("isop covers the interval irredundantly") {
    Manager m;
    auto vs = make_vars(m, 5);
    std::mt19937 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        TruthTable tl(5, rng() & rng());
        TruthTable extra(5, rng());
        Bdd lower = tl.build(m, vs);
        Bdd upper = lower | extra.build(m, vs);
        auto cover = m.isop(lower, upper);
        Bdd sum = m.zero();
        for (const auto& c : cover.cubes) sum |= m.cube(c);
        REQUIRE(sum == cover.function);
        REQUIRE((lower & ~sum).is_zero());
        REQUIRE((sum & ~upper).is_zero());
        // irredundant: dropping any cube loses part of lower
        for (std::size_t drop = 0; drop < cover.cubes.size(); ++drop) {
            Bdd rest = m.zero();
            for (std::size_t k = 0; k < cover.cubes.size(); ++k)
                if (k != drop) rest |= m.cube(cover.cubes[k]);
            REQUIRE_FALSE((lower & ~rest).is_zero());
        }
    }
}

TEST_CASE("canonicity and reduction under 10^4 random expressions") {
    Manager m;
    auto vs = make_vars(m, 6);
    std::mt19937 rng(2024);
    std::map<std::uint64_t, std::uint32_t> handle_of_table;
    std::map<std::uint32_t, std::uint64_t> table_of_handle;
    for (int i = 0; i < 10000; ++i) {
        auto [f, table] = kbp::testing::random_expression(m, vs, rng, 5);
        auto [it1, fresh1] = handle_of_table.emplace(table, f.id());
        auto [it2, fresh2] = table_of_handle.emplace(f.id(), table);
        REQUIRE(it1->second == f.id());
        REQUIRE(it2->second == table);
    }
    CHECK(m.check_invariants());
}

TEST_CASE("dot dump names variables and both edge kinds") {
    Manager m;
    VarId a = m.new_var("alpha");
    VarId b = m.new_var("beta");
    std::string text = m.dot(m.var(a) ^ m.var(b));
    CHECK(text.find("alpha") != std::string::npos);
    CHECK(text.find("style=dashed") != std::string::npos);
    CHECK(text.rfind("digraph", 0) == 0);
}
