#pragma once

// Reduced ordered binary decision diagrams.
//
// A Manager owns a unique table of hash-consed nodes and a lossy operation
// cache.  Variables are ordered by creation: the VarId returned by new_var()
// is its position in the diagram order.  Nodes are never freed; a manager is
// meant to live for one synthesis or checking run.
//
// A Manager is single-owner: do not call into one manager from two threads.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kbp::bdd {

using VarId = std::uint32_t;

class Manager;

/// Handle to a node in a Manager.  Cheap to copy; equality is function
/// equality because the diagrams are canonical.
class Bdd {
public:
    Bdd() = default;

    Manager* manager() const { return mgr_; }
    std::uint32_t id() const { return id_; }

    bool is_zero() const { return id_ == 0; }
    bool is_one() const { return id_ == 1; }
    bool is_const() const { return id_ <= 1; }

    Bdd operator~() const;
    Bdd operator&(const Bdd& g) const;
    Bdd operator|(const Bdd& g) const;
    Bdd operator^(const Bdd& g) const;
    Bdd& operator&=(const Bdd& g) { return *this = *this & g; }
    Bdd& operator|=(const Bdd& g) { return *this = *this | g; }
    Bdd implies(const Bdd& g) const;
    Bdd iff(const Bdd& g) const;

    friend bool operator==(const Bdd& a, const Bdd& b) { return a.mgr_ == b.mgr_ && a.id_ == b.id_; }
    friend bool operator!=(const Bdd& a, const Bdd& b) { return !(a == b); }

private:
    friend class Manager;
    Bdd(Manager* m, std::uint32_t id) : mgr_(m), id_(id) {}

    Manager* mgr_ = nullptr;
    std::uint32_t id_ = 0;
};

enum class BinOp : std::uint8_t { And, Or, Xor, Implies, Iff };

/// One product term: (variable, polarity) literals in increasing VarId order.
using Cube = std::vector<std::pair<VarId, bool>>;

struct Cover {
    Bdd function;
    std::vector<Cube> cubes;
};

class Manager {
public:
    explicit Manager(unsigned cache_log2 = 20);

    Manager(const Manager&) = delete;
    Manager& operator=(const Manager&) = delete;

    // --- variables ----------------------------------------------------------

    /// Appends a variable at the bottom of the order.  Names must be unique.
    VarId new_var(std::string name);
    std::size_t var_count() const { return names_.size(); }
    const std::string& var_name(VarId v) const;
    std::optional<VarId> find_var(const std::string& name) const;

    // --- constructors -------------------------------------------------------

    Bdd zero() { return {this, 0}; }
    Bdd one() { return {this, 1}; }
    Bdd constant(bool b) { return b ? one() : zero(); }
    Bdd var(VarId v);
    Bdd nvar(VarId v);
    Bdd literal(VarId v, bool positive) { return positive ? var(v) : nvar(v); }
    /// Conjunction of positive literals; the canonical encoding of a var set.
    Bdd cube(std::span<const VarId> vars);
    Bdd cube(const Cube& literals);

    // --- boolean operations -------------------------------------------------

    Bdd apply(BinOp op, const Bdd& f, const Bdd& g);
    Bdd negate(const Bdd& f);
    Bdd ite(const Bdd& f, const Bdd& g, const Bdd& h);

    // --- quantification and substitution ------------------------------------

    Bdd exists(const Bdd& f, std::span<const VarId> vars);
    Bdd forall(const Bdd& f, std::span<const VarId> vars);
    /// exists(f & g, vars) without building the conjunction.
    Bdd and_exists(const Bdd& f, const Bdd& g, std::span<const VarId> vars);

    /// Variable substitution f[sigma]: the result at s equals f at the
    /// assignment that reads sigma(u) wherever f reads u.  sigma must be
    /// injective and its range must not meet the non-renamed support of f.
    Bdd rename(const Bdd& f, std::span<const std::pair<VarId, VarId>> sigma);

    /// Shannon cofactor f|v=value.
    Bdd cofactor(const Bdd& f, VarId v, bool value);

    /// Generalized cofactor (Coudert-Madre restrict).  Agrees with f wherever
    /// care holds; elsewhere the value is whatever the recursion produced.
    /// Falls back to f itself if the recursion grew the diagram.
    Bdd restrict(const Bdd& f, const Bdd& care);

    /// Minato-Morreale irredundant sum of products for some function h with
    /// lower <= h <= upper.
    Cover isop(const Bdd& lower, const Bdd& upper);

    // --- inspection ---------------------------------------------------------

    bool eval(const Bdd& f, const std::vector<bool>& assignment) const;
    std::vector<VarId> support(const Bdd& f) const;
    std::size_t node_count(const Bdd& f) const;
    /// Number of satisfying assignments over `over` (must contain support(f)).
    double sat_count(const Bdd& f, std::span<const VarId> over) const;
    /// Calls visit once per satisfying assignment over `over`, in
    /// lexicographic order (false before true).  values[k] is the value of
    /// over[k] after `over` has been sorted; the sorted order is passed too.
    void for_each_sat(const Bdd& f, std::span<const VarId> over,
                      const std::function<void(std::span<const VarId>, const std::vector<bool>&)>& visit) const;
    std::vector<std::vector<bool>> enumerate_sats(const Bdd& f, std::span<const VarId> over) const;
    /// One satisfying assignment as a cube over support(f); empty for 1.
    Cube pick_cube(const Bdd& f) const;

    VarId top_var(const Bdd& f) const;
    Bdd low(const Bdd& f) const;
    Bdd high(const Bdd& f) const;

    /// Number of entries in the unique table, terminals included.
    std::size_t table_size() const { return nodes_.size(); }
    /// Structural scan: reduced, ordered, and no duplicate triples.
    bool check_invariants() const;

    std::string dot(const Bdd& f, const std::string& graph_name = "bdd") const;

private:
    static constexpr std::uint32_t kTerminal = 0xffffffffu;

    struct Node {
        std::uint32_t var;
        std::uint32_t lo;
        std::uint32_t hi;
    };

    struct CacheEntry {
        std::uint32_t op = 0;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        std::uint32_t c = 0;
        std::uint32_t result = 0;
    };

    enum OpCode : std::uint32_t {
        kNone = 0, kAnd, kOr, kXor, kNot, kExists, kAndExists, kRestrict, kIte,
    };

    std::uint32_t mk(std::uint32_t var, std::uint32_t lo, std::uint32_t hi);
    void grow_unique();

    bool cache_lookup(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t& out) const;
    void cache_store(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t r);

    std::uint32_t var_of(std::uint32_t f) const { return nodes_[f].var; }

    std::uint32_t and_rec(std::uint32_t f, std::uint32_t g);
    std::uint32_t or_rec(std::uint32_t f, std::uint32_t g);
    std::uint32_t xor_rec(std::uint32_t f, std::uint32_t g);
    std::uint32_t not_rec(std::uint32_t f);
    std::uint32_t ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h);
    std::uint32_t exists_rec(std::uint32_t f, std::uint32_t cube);
    std::uint32_t and_exists_rec(std::uint32_t f, std::uint32_t g, std::uint32_t cube);
    std::uint32_t restrict_rec(std::uint32_t f, std::uint32_t c);

    void check_same(const Bdd& f) const;
    std::uint32_t cube_of(std::span<const VarId> vars);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> unique_;  // open addressing over node ids, 0 = empty
    std::size_t unique_used_ = 0;
    std::vector<CacheEntry> cache_;
    std::size_t cache_mask_ = 0;

    std::vector<std::string> names_;
    std::unordered_map<std::string, VarId> by_name_;
};

}  // namespace kbp::bdd
