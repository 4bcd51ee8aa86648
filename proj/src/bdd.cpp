#include "kbp/bdd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace kbp::bdd {

namespace {

inline std::uint64_t mix(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

inline std::uint64_t hash3(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    return mix((std::uint64_t(a) << 40) ^ (std::uint64_t(b) << 20) ^ c ^ (std::uint64_t(b) * 0x9e3779b97f4a7c15ULL));
}

Manager* require_manager(const Bdd& f) {
    if (f.manager() == nullptr) {
        throw std::invalid_argument("bdd: operation on a null handle");
    }
    return f.manager();
}

}  // namespace

// ---------------------------------------------------------------------------
// Bdd operators

Bdd Bdd::operator~() const { return require_manager(*this)->negate(*this); }
Bdd Bdd::operator&(const Bdd& g) const { return require_manager(*this)->apply(BinOp::And, *this, g); }
Bdd Bdd::operator|(const Bdd& g) const { return require_manager(*this)->apply(BinOp::Or, *this, g); }
Bdd Bdd::operator^(const Bdd& g) const { return require_manager(*this)->apply(BinOp::Xor, *this, g); }
Bdd Bdd::implies(const Bdd& g) const { return require_manager(*this)->apply(BinOp::Implies, *this, g); }
Bdd Bdd::iff(const Bdd& g) const { return require_manager(*this)->apply(BinOp::Iff, *this, g); }

// ---------------------------------------------------------------------------
// Manager: storage

Manager::Manager(unsigned cache_log2) {
    nodes_.push_back({kTerminal, 0, 0});
    nodes_.push_back({kTerminal, 1, 1});
    unique_.assign(1u << 16, 0);
    cache_.resize(std::size_t{1} << cache_log2);
    cache_mask_ = cache_.size() - 1;
}

VarId Manager::new_var(std::string name) {
    if (by_name_.count(name) != 0) {
        throw std::invalid_argument("bdd: duplicate variable name '" + name + "'");
    }
    auto v = static_cast<VarId>(names_.size());
    by_name_.emplace(name, v);
    names_.push_back(std::move(name));
    return v;
}

const std::string& Manager::var_name(VarId v) const {
    if (v >= names_.size()) {
        throw std::out_of_range("bdd: unknown variable " + std::to_string(v));
    }
    return names_[v];
}

std::optional<VarId> Manager::find_var(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Manager::grow_unique() {
    std::vector<std::uint32_t> fresh(unique_.size() * 2, 0);
    const std::size_t mask = fresh.size() - 1;
    for (std::uint32_t id : unique_) {
        if (id == 0) {
            continue;
        }
        const Node& n = nodes_[id];
        std::size_t slot = hash3(n.var, n.lo, n.hi) & mask;
        while (fresh[slot] != 0) {
            slot = (slot + 1) & mask;
        }
        fresh[slot] = id;
    }
    unique_.swap(fresh);
}

std::uint32_t Manager::mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi) {
    if (lo == hi) {
        return lo;
    }
    if (2 * (unique_used_ + 1) > unique_.size()) {
        grow_unique();
    }
    const std::size_t mask = unique_.size() - 1;
    std::size_t slot = hash3(var, lo, hi) & mask;
    while (unique_[slot] != 0) {
        const Node& n = nodes_[unique_[slot]];
        if (n.var == var && n.lo == lo && n.hi == hi) {
            return unique_[slot];
        }
        slot = (slot + 1) & mask;
    }
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({var, lo, hi});
    unique_[slot] = id;
    ++unique_used_;
    return id;
}

bool Manager::cache_lookup(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                           std::uint32_t& out) const {
    const CacheEntry& e = cache_[mix(hash3(a, b, c) + op) & cache_mask_];
    if (e.op == op && e.a == a && e.b == b && e.c == c) {
        out = e.result;
        return true;
    }
    return false;
}

void Manager::cache_store(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t r) {
    cache_[mix(hash3(a, b, c) + op) & cache_mask_] = {op, a, b, c, r};
}

void Manager::check_same(const Bdd& f) const {
    if (f.mgr_ != this) {
        throw std::invalid_argument("bdd: manager mismatch");
    }
}

// ---------------------------------------------------------------------------
// constructors

Bdd Manager::var(VarId v) {
    if (v >= names_.size()) {
        throw std::out_of_range("bdd: unknown variable " + std::to_string(v));
    }
    return {this, mk(v, 0, 1)};
}

Bdd Manager::nvar(VarId v) {
    if (v >= names_.size()) {
        throw std::out_of_range("bdd: unknown variable " + std::to_string(v));
    }
    return {this, mk(v, 1, 0)};
}

std::uint32_t Manager::cube_of(std::span<const VarId> vars) {
    std::vector<VarId> sorted(vars.begin(), vars.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::uint32_t r = 1;
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (*it >= names_.size()) {
            throw std::out_of_range("bdd: unknown variable " + std::to_string(*it));
        }
        r = mk(*it, 0, r);
    }
    return r;
}

Bdd Manager::cube(std::span<const VarId> vars) { return {this, cube_of(vars)}; }

Bdd Manager::cube(const Cube& literals) {
    Bdd r = one();
    for (const auto& [v, pos] : literals) {
        r &= literal(v, pos);
    }
    return r;
}

// ---------------------------------------------------------------------------
// boolean operations

std::uint32_t Manager::not_rec(std::uint32_t f) {
    if (f <= 1) {
        return f ^ 1u;
    }
    std::uint32_t r;
    if (cache_lookup(kNot, f, 0, 0, r)) {
        return r;
    }
    const Node n = nodes_[f];
    r = mk(n.var, not_rec(n.lo), not_rec(n.hi));
    cache_store(kNot, f, 0, 0, r);
    return r;
}

std::uint32_t Manager::and_rec(std::uint32_t f, std::uint32_t g) {
    if (f == 0 || g == 0) return 0;
    if (f == 1) return g;
    if (g == 1 || f == g) return f;
    if (f > g) std::swap(f, g);
    std::uint32_t r;
    if (cache_lookup(kAnd, f, g, 0, r)) {
        return r;
    }
    const Node nf = nodes_[f];
    const Node ng = nodes_[g];
    const std::uint32_t v = std::min(nf.var, ng.var);
    const std::uint32_t f0 = nf.var == v ? nf.lo : f, f1 = nf.var == v ? nf.hi : f;
    const std::uint32_t g0 = ng.var == v ? ng.lo : g, g1 = ng.var == v ? ng.hi : g;
    const std::uint32_t lo = and_rec(f0, g0);
    const std::uint32_t hi = and_rec(f1, g1);
    r = mk(v, lo, hi);
    cache_store(kAnd, f, g, 0, r);
    return r;
}

std::uint32_t Manager::or_rec(std::uint32_t f, std::uint32_t g) {
    if (f == 1 || g == 1) return 1;
    if (f == 0) return g;
    if (g == 0 || f == g) return f;
    if (f > g) std::swap(f, g);
    std::uint32_t r;
    if (cache_lookup(kOr, f, g, 0, r)) {
        return r;
    }
    const Node nf = nodes_[f];
    const Node ng = nodes_[g];
    const std::uint32_t v = std::min(nf.var, ng.var);
    const std::uint32_t f0 = nf.var == v ? nf.lo : f, f1 = nf.var == v ? nf.hi : f;
    const std::uint32_t g0 = ng.var == v ? ng.lo : g, g1 = ng.var == v ? ng.hi : g;
    const std::uint32_t lo = or_rec(f0, g0);
    const std::uint32_t hi = or_rec(f1, g1);
    r = mk(v, lo, hi);
    cache_store(kOr, f, g, 0, r);
    return r;
}

std::uint32_t Manager::xor_rec(std::uint32_t f, std::uint32_t g) {
    if (f == g) return 0;
    if (f == 0) return g;
    if (g == 0) return f;
    if (f == 1) return not_rec(g);
    if (g == 1) return not_rec(f);
    if (f > g) std::swap(f, g);
    std::uint32_t r;
    if (cache_lookup(kXor, f, g, 0, r)) {
        return r;
    }
    const Node nf = nodes_[f];
    const Node ng = nodes_[g];
    const std::uint32_t v = std::min(nf.var, ng.var);
    const std::uint32_t f0 = nf.var == v ? nf.lo : f, f1 = nf.var == v ? nf.hi : f;
    const std::uint32_t g0 = ng.var == v ? ng.lo : g, g1 = ng.var == v ? ng.hi : g;
    const std::uint32_t lo = xor_rec(f0, g0);
    const std::uint32_t hi = xor_rec(f1, g1);
    r = mk(v, lo, hi);
    cache_store(kXor, f, g, 0, r);
    return r;
}

std::uint32_t Manager::ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h) {
    if (f == 1) return g;
    if (f == 0) return h;
    if (g == h) return g;
    if (g == 1 && h == 0) return f;
    if (g == 0 && h == 1) return not_rec(f);
    if (g == 1) return or_rec(f, h);
    if (h == 0) return and_rec(f, g);
    std::uint32_t r;
    if (cache_lookup(kIte, f, g, h, r)) {
        return r;
    }
    const std::uint32_t v = std::min({var_of(f), var_of(g), var_of(h)});
    auto lo_of = [&](std::uint32_t x) { return var_of(x) == v ? nodes_[x].lo : x; };
    auto hi_of = [&](std::uint32_t x) { return var_of(x) == v ? nodes_[x].hi : x; };
    const std::uint32_t lo = ite_rec(lo_of(f), lo_of(g), lo_of(h));
    const std::uint32_t hi = ite_rec(hi_of(f), hi_of(g), hi_of(h));
    r = mk(v, lo, hi);
    cache_store(kIte, f, g, h, r);
    return r;
}

Bdd Manager::apply(BinOp op, const Bdd& f, const Bdd& g) {
    check_same(f);
    check_same(g);
    switch (op) {
        case BinOp::And: return {this, and_rec(f.id_, g.id_)};
        case BinOp::Or: return {this, or_rec(f.id_, g.id_)};
        case BinOp::Xor: return {this, xor_rec(f.id_, g.id_)};
        case BinOp::Implies: return {this, or_rec(not_rec(f.id_), g.id_)};
        case BinOp::Iff: return {this, not_rec(xor_rec(f.id_, g.id_))};
    }
    throw std::invalid_argument("bdd: unknown operation");
}

Bdd Manager::negate(const Bdd& f) {
    check_same(f);
    return {this, not_rec(f.id_)};
}

Bdd Manager::ite(const Bdd& f, const Bdd& g, const Bdd& h) {
    check_same(f);
    check_same(g);
    check_same(h);
    return {this, ite_rec(f.id_, g.id_, h.id_)};
}

// ---------------------------------------------------------------------------
// quantification

std::uint32_t Manager::exists_rec(std::uint32_t f, std::uint32_t cube) {
    if (f <= 1) {
        return f;
    }
    const std::uint32_t v = var_of(f);
    while (cube > 1 && var_of(cube) < v) {
        cube = nodes_[cube].hi;
    }
    if (cube == 1) {
        return f;
    }
    std::uint32_t r;
    if (cache_lookup(kExists, f, cube, 0, r)) {
        return r;
    }
    const Node n = nodes_[f];
    if (var_of(cube) == v) {
        const std::uint32_t rest = nodes_[cube].hi;
        const std::uint32_t lo = exists_rec(n.lo, rest);
        r = lo == 1 ? 1 : or_rec(lo, exists_rec(n.hi, rest));
    } else {
        r = mk(v, exists_rec(n.lo, cube), exists_rec(n.hi, cube));
    }
    cache_store(kExists, f, cube, 0, r);
    return r;
}

Bdd Manager::exists(const Bdd& f, std::span<const VarId> vars) {
    check_same(f);
    return {this, exists_rec(f.id_, cube_of(vars))};
}

Bdd Manager::forall(const Bdd& f, std::span<const VarId> vars) {
    check_same(f);
    return {this, not_rec(exists_rec(not_rec(f.id_), cube_of(vars)))};
}

std::uint32_t Manager::and_exists_rec(std::uint32_t f, std::uint32_t g, std::uint32_t cube) {
    if (f == 0 || g == 0) return 0;
    if (f == 1 && g == 1) return 1;
    if (f == 1) return exists_rec(g, cube);
    if (g == 1 || f == g) return exists_rec(f, cube);
    if (f > g) std::swap(f, g);
    const std::uint32_t v = std::min(var_of(f), var_of(g));
    while (cube > 1 && var_of(cube) < v) {
        cube = nodes_[cube].hi;
    }
    if (cube == 1) {
        return and_rec(f, g);
    }
    std::uint32_t r;
    if (cache_lookup(kAndExists, f, g, cube, r)) {
        return r;
    }
    const Node nf = nodes_[f];
    const Node ng = nodes_[g];
    const std::uint32_t f0 = nf.var == v ? nf.lo : f, f1 = nf.var == v ? nf.hi : f;
    const std::uint32_t g0 = ng.var == v ? ng.lo : g, g1 = ng.var == v ? ng.hi : g;
    if (var_of(cube) == v) {
        const std::uint32_t rest = nodes_[cube].hi;
        const std::uint32_t lo = and_exists_rec(f0, g0, rest);
        r = lo == 1 ? 1 : or_rec(lo, and_exists_rec(f1, g1, rest));
    } else {
        r = mk(v, and_exists_rec(f0, g0, cube), and_exists_rec(f1, g1, cube));
    }
    cache_store(kAndExists, f, g, cube, r);
    return r;
}

Bdd Manager::and_exists(const Bdd& f, const Bdd& g, std::span<const VarId> vars) {
    check_same(f);
    check_same(g);
    return {this, and_exists_rec(f.id_, g.id_, cube_of(vars))};
}

// ---------------------------------------------------------------------------
// substitution

Bdd Manager::rename(const Bdd& f, std::span<const std::pair<VarId, VarId>> sigma) {
    check_same(f);
    std::map<VarId, VarId> map;
    std::set<VarId> range;
    for (const auto& [from, to] : sigma) {
        if (from >= names_.size() || to >= names_.size()) {
            throw std::out_of_range("bdd: rename mentions an unknown variable");
        }
        if (!map.emplace(from, to).second && map[from] != to) {
            throw std::invalid_argument("bdd: rename maps a variable twice");
        }
        if (!range.insert(to).second) {
            throw std::invalid_argument("bdd: rename is not injective");
        }
    }
    const std::vector<VarId> supp = support(f);
    for (VarId v : supp) {
        if (map.count(v) == 0 && range.count(v) != 0) {
            throw std::invalid_argument("bdd: rename target '" + names_[v] + "' is in the non-renamed support");
        }
    }
    // Drop identity pairs and pairs that do not touch the support.
    std::map<VarId, VarId> active;
    for (VarId v : supp) {
        auto it = map.find(v);
        if (it != map.end() && it->second != v) {
            active.emplace(v, it->second);
        }
    }
    if (active.empty()) {
        return f;
    }

    auto target = [&](VarId v) {
        auto it = active.find(v);
        return it == active.end() ? v : it->second;
    };
    bool monotone = true;
    for (std::size_t i = 1; i < supp.size(); ++i) {
        if (target(supp[i - 1]) >= target(supp[i])) {
            monotone = false;
            break;
        }
    }

    if (monotone) {
        // Relabelling keeps every path ordered, so rebuild node by node.
        std::unordered_map<std::uint32_t, std::uint32_t> memo;
        std::function<std::uint32_t(std::uint32_t)> relabel = [&](std::uint32_t x) -> std::uint32_t {
            if (x <= 1) return x;
            auto it = memo.find(x);
            if (it != memo.end()) return it->second;
            const Node n = nodes_[x];
            std::uint32_t r = mk(target(n.var), relabel(n.lo), relabel(n.hi));
            memo.emplace(x, r);
            return r;
        };
        return {this, relabel(f.id_)};
    }

    bool range_meets_domain = false;
    for (const auto& [from, to] : active) {
        if (active.count(to) != 0) {
            range_meets_domain = true;
        }
    }
    if (!range_meets_domain) {
        // f[sigma] = exists U. f & AND_u (u <-> sigma(u))
        Bdd link = one();
        std::vector<VarId> dom;
        for (const auto& [from, to] : active) {
            link &= var(from).iff(var(to));
            dom.push_back(from);
        }
        return and_exists(f, link, dom);
    }

    // Permutations that swap variables: compose with ite.
    std::unordered_map<std::uint32_t, std::uint32_t> memo;
    std::function<std::uint32_t(std::uint32_t)> compose = [&](std::uint32_t x) -> std::uint32_t {
        if (x <= 1) return x;
        auto it = memo.find(x);
        if (it != memo.end()) return it->second;
        const Node n = nodes_[x];
        const std::uint32_t lo = compose(n.lo);
        const std::uint32_t hi = compose(n.hi);
        std::uint32_t r = ite_rec(mk(target(n.var), 0, 1), hi, lo);
        memo.emplace(x, r);
        return r;
    };
    return {this, compose(f.id_)};
}

Bdd Manager::cofactor(const Bdd& f, VarId v, bool value) {
    check_same(f);
    std::unordered_map<std::uint32_t, std::uint32_t> memo;
    std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t x) -> std::uint32_t {
        if (x <= 1 || var_of(x) > v) return x;
        const Node n = nodes_[x];
        if (n.var == v) return value ? n.hi : n.lo;
        auto it = memo.find(x);
        if (it != memo.end()) return it->second;
        std::uint32_t r = mk(n.var, rec(n.lo), rec(n.hi));
        memo.emplace(x, r);
        return r;
    };
    return {this, rec(f.id_)};
}

std::uint32_t Manager::restrict_rec(std::uint32_t f, std::uint32_t c) {
    if (c == 1 || f <= 1) return f;
    if (f == c) return 1;
    std::uint32_t r;
    if (cache_lookup(kRestrict, f, c, 0, r)) {
        return r;
    }
    const Node nf = nodes_[f];
    const Node nc = nodes_[c];
    if (nc.var < nf.var) {
        r = restrict_rec(f, or_rec(nc.lo, nc.hi));
    } else {
        const std::uint32_t c0 = nc.var == nf.var ? nc.lo : c;
        const std::uint32_t c1 = nc.var == nf.var ? nc.hi : c;
        if (c0 == 0) {
            r = restrict_rec(nf.hi, c1);
        } else if (c1 == 0) {
            r = restrict_rec(nf.lo, c0);
        } else {
            r = mk(nf.var, restrict_rec(nf.lo, c0), restrict_rec(nf.hi, c1));
        }
    }
    cache_store(kRestrict, f, c, 0, r);
    return r;
}

Bdd Manager::restrict(const Bdd& f, const Bdd& care) {
    check_same(f);
    check_same(care);
    if (care.is_zero()) {
        throw std::invalid_argument("bdd: restrict with an empty care set");
    }
    Bdd r{this, restrict_rec(f.id_, care.id_)};
    if (node_count(r) > node_count(f)) {
        return f;
    }
    return r;
}

Cover Manager::isop(const Bdd& lower, const Bdd& upper) {
    check_same(lower);
    check_same(upper);
    if (and_rec(lower.id_, not_rec(upper.id_)) != 0) {
        throw std::invalid_argument("bdd: isop requires lower <= upper");
    }
    struct Result {
        std::uint32_t fn;
        std::vector<Cube> cubes;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Result> memo;
    std::function<const Result&(std::uint32_t, std::uint32_t)> rec =
        [&](std::uint32_t lo, std::uint32_t up) -> const Result& {
        auto key = std::make_pair(lo, up);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        Result res;
        if (lo == 0) {
            res.fn = 0;
        } else if (up == 1) {
            res.fn = 1;
            res.cubes.emplace_back();
        } else {
            const std::uint32_t v = std::min(var_of(lo), var_of(up));
            const std::uint32_t l0 = var_of(lo) == v ? nodes_[lo].lo : lo;
            const std::uint32_t l1 = var_of(lo) == v ? nodes_[lo].hi : lo;
            const std::uint32_t u0 = var_of(up) == v ? nodes_[up].lo : up;
            const std::uint32_t u1 = var_of(up) == v ? nodes_[up].hi : up;

            const Result r0 = rec(and_rec(l0, not_rec(u1)), u0);
            const Result r1 = rec(and_rec(l1, not_rec(u0)), u1);
            const std::uint32_t lstar = or_rec(and_rec(l0, not_rec(r0.fn)), and_rec(l1, not_rec(r1.fn)));
            const std::uint32_t ustar = and_rec(u0, u1);
            const Result rs = rec(lstar, ustar);

            const std::uint32_t x = mk(v, 0, 1);
            const std::uint32_t nx = mk(v, 1, 0);
            res.fn = or_rec(or_rec(and_rec(nx, r0.fn), and_rec(x, r1.fn)), rs.fn);
            for (const Cube& c : r0.cubes) {
                Cube cc{{v, false}};
                cc.insert(cc.end(), c.begin(), c.end());
                res.cubes.push_back(std::move(cc));
            }
            for (const Cube& c : r1.cubes) {
                Cube cc{{v, true}};
                cc.insert(cc.end(), c.begin(), c.end());
                res.cubes.push_back(std::move(cc));
            }
            res.cubes.insert(res.cubes.end(), rs.cubes.begin(), rs.cubes.end());
        }
        return memo.emplace(key, std::move(res)).first->second;
    };
    const Result& r = rec(lower.id_, upper.id_);
    return {Bdd{this, r.fn}, r.cubes};
}

// ---------------------------------------------------------------------------
// inspection

bool Manager::eval(const Bdd& f, const std::vector<bool>& assignment) const {
    check_same(f);
    std::uint32_t x = f.id_;
    while (x > 1) {
        const Node& n = nodes_[x];
        if (n.var >= assignment.size()) {
            throw std::out_of_range("bdd: assignment does not cover variable " + names_[n.var]);
        }
        x = assignment[n.var] ? n.hi : n.lo;
    }
    return x == 1;
}

std::vector<VarId> Manager::support(const Bdd& f) const {
    check_same(f);
    std::unordered_set<std::uint32_t> seen;
    std::set<VarId> vars;
    std::vector<std::uint32_t> stack{f.id_};
    while (!stack.empty()) {
        std::uint32_t x = stack.back();
        stack.pop_back();
        if (x <= 1 || !seen.insert(x).second) continue;
        vars.insert(nodes_[x].var);
        stack.push_back(nodes_[x].lo);
        stack.push_back(nodes_[x].hi);
    }
    return {vars.begin(), vars.end()};
}

std::size_t Manager::node_count(const Bdd& f) const {
    check_same(f);
    std::unordered_set<std::uint32_t> seen;
    std::vector<std::uint32_t> stack{f.id_};
    while (!stack.empty()) {
        std::uint32_t x = stack.back();
        stack.pop_back();
        if (x <= 1 || !seen.insert(x).second) continue;
        stack.push_back(nodes_[x].lo);
        stack.push_back(nodes_[x].hi);
    }
    return seen.size();
}

namespace {

std::vector<VarId> sorted_unique(std::span<const VarId> over) {
    std::vector<VarId> s(over.begin(), over.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace

double Manager::sat_count(const Bdd& f, std::span<const VarId> over) const {
    check_same(f);
    const std::vector<VarId> vars = sorted_unique(over);
    std::unordered_map<VarId, std::size_t> pos;
    for (std::size_t i = 0; i < vars.size(); ++i) pos.emplace(vars[i], i);
    for (VarId v : support(f)) {
        if (pos.count(v) == 0) {
            throw std::invalid_argument("bdd: sat_count domain misses support variable " + names_[v]);
        }
    }
    auto level = [&](std::uint32_t x) { return x <= 1 ? vars.size() : pos.at(nodes_[x].var); };
    std::unordered_map<std::uint32_t, double> memo;
    std::function<double(std::uint32_t)> rec = [&](std::uint32_t x) -> double {
        if (x == 0) return 0.0;
        if (x == 1) return 1.0;
        auto it = memo.find(x);
        if (it != memo.end()) return it->second;
        const Node& n = nodes_[x];
        const std::size_t l = level(x);
        double r = rec(n.lo) * std::ldexp(1.0, int(level(n.lo) - l - 1)) +
                   rec(n.hi) * std::ldexp(1.0, int(level(n.hi) - l - 1));
        memo.emplace(x, r);
        return r;
    };
    return rec(f.id_) * std::ldexp(1.0, int(level(f.id_)));
}

void Manager::for_each_sat(const Bdd& f, std::span<const VarId> over,
                           const std::function<void(std::span<const VarId>, const std::vector<bool>&)>& visit) const {
    check_same(f);
    const std::vector<VarId> vars = sorted_unique(over);
    {
        std::set<VarId> in(vars.begin(), vars.end());
        for (VarId v : support(f)) {
            if (in.count(v) == 0) {
                throw std::invalid_argument("bdd: enumeration domain misses support variable " + names_[v]);
            }
        }
    }
    std::vector<bool> values(vars.size(), false);
    std::function<void(std::uint32_t, std::size_t)> rec = [&](std::uint32_t x, std::size_t i) {
        if (x == 0) return;
        if (i == vars.size()) {
            visit(vars, values);
            return;
        }
        if (x > 1 && nodes_[x].var == vars[i]) {
            values[i] = false;
            rec(nodes_[x].lo, i + 1);
            values[i] = true;
            rec(nodes_[x].hi, i + 1);
        } else {
            values[i] = false;
            rec(x, i + 1);
            values[i] = true;
            rec(x, i + 1);
        }
        values[i] = false;
    };
    rec(f.id_, 0);
}

std::vector<std::vector<bool>> Manager::enumerate_sats(const Bdd& f, std::span<const VarId> over) const {
    std::vector<std::vector<bool>> out;
    for_each_sat(f, over, [&](std::span<const VarId>, const std::vector<bool>& v) { out.push_back(v); });
    return out;
}

Cube Manager::pick_cube(const Bdd& f) const {
    check_same(f);
    if (f.is_zero()) {
        throw std::invalid_argument("bdd: pick_cube on the empty function");
    }
    Cube c;
    std::uint32_t x = f.id_;
    while (x > 1) {
        const Node& n = nodes_[x];
        if (n.lo != 0) {
            c.emplace_back(n.var, false);
            x = n.lo;
        } else {
            c.emplace_back(n.var, true);
            x = n.hi;
        }
    }
    return c;
}

VarId Manager::top_var(const Bdd& f) const {
    check_same(f);
    if (f.is_const()) {
        throw std::invalid_argument("bdd: constant has no top variable");
    }
    return nodes_[f.id_].var;
}

Bdd Manager::low(const Bdd& f) const {
    check_same(f);
    if (f.is_const()) return f;
    return {const_cast<Manager*>(this), nodes_[f.id_].lo};
}

Bdd Manager::high(const Bdd& f) const {
    check_same(f);
    if (f.is_const()) return f;
    return {const_cast<Manager*>(this), nodes_[f.id_].hi};
}

bool Manager::check_invariants() const {
    std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples;
    for (std::size_t id = 2; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (n.lo == n.hi) return false;
        if (n.var >= names_.size()) return false;
        if (!triples.emplace(n.var, n.lo, n.hi).second) return false;
        for (std::uint32_t child : {n.lo, n.hi}) {
            if (child >= id) return false;
            if (child > 1 && nodes_[child].var <= n.var) return false;
        }
    }
    return true;
}

std::string Manager::dot(const Bdd& f, const std::string& graph_name) const {
    check_same(f);
    std::ostringstream out;
    out << "digraph " << graph_name << " {\n";
    out << "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
    std::unordered_set<std::uint32_t> seen;
    std::vector<std::uint32_t> stack{f.id_};
    std::vector<std::uint32_t> order;
    while (!stack.empty()) {
        std::uint32_t x = stack.back();
        stack.pop_back();
        if (x <= 1 || !seen.insert(x).second) continue;
        order.push_back(x);
        stack.push_back(nodes_[x].hi);
        stack.push_back(nodes_[x].lo);
    }
    std::sort(order.begin(), order.end());
    for (std::uint32_t x : order) {
        const Node& n = nodes_[x];
        out << "  n" << x << " [label=\"" << names_[n.var] << "\"];\n";
        out << "  n" << x << " -> n" << n.lo << " [style=dashed];\n";
        out << "  n" << x << " -> n" << n.hi << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace kbp::bdd
