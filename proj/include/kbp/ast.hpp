#pragma once

// Abstract syntax for environment models and (knowledge-based) protocols.
//
// Expression trees are immutable and shared; structural equality ignores
// source positions.  Names are unresolved here: resolution against
// declarations happens in model.hpp.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kbp::ast {

struct Pos {
    int line = 0;
    int column = 0;
};

/// A written type.  `Named` refers to a `type` alias or to the agent type.
struct TypeRef {
    enum class Kind { Bool, Enum, Range, Named };
    Kind kind = Kind::Bool;
    std::vector<std::string> labels;  // Enum
    int lo = 0;                       // Range
    int hi = 0;                       // Range
    std::string name;                 // Named

    static TypeRef boolean() { return {}; }
    static TypeRef named(std::string n) {
        TypeRef t;
        t.kind = Kind::Named;
        t.name = std::move(n);
        return t;
    }
    static TypeRef range(int lo, int hi) {
        TypeRef t;
        t.kind = Kind::Range;
        t.lo = lo;
        t.hi = hi;
        return t;
    }

    friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
    Bool,    // literal true/false
    Int,     // integer literal
    Name,    // variable, parameter, enum label, or bound variable
    Index,   // name[index]
    Member,  // agent.Action
    Not,
    And,
    Or,
    Eq,
    Knows,   // Knows who body
    Next,    // X^steps body
    Quant,   // Exists/Forall var : type (body)
    Skel,    // skeleton variable placeholder; `name` is its identifier
};

struct Expr {
    ExprKind kind = ExprKind::Bool;
    Pos pos;
    bool truth = false;    // Bool; Quant: true for Forall
    int number = 0;        // Int; Next: step count
    std::string name;      // Name, Index, Member (agent), Knows (who), Quant (bound var), Skel
    std::string sub;       // Index (index identifier), Member (action), Quant (type name)
    std::vector<ExprPtr> args;

    static ExprPtr boolean(bool b, Pos p = {});
    static ExprPtr integer(int v, Pos p = {});
    static ExprPtr ident(std::string n, Pos p = {});
    static ExprPtr index(std::string array, std::string idx, Pos p = {});
    static ExprPtr member(std::string agent, std::string action, Pos p = {});
    static ExprPtr negate(ExprPtr e, Pos p = {});
    static ExprPtr conj(ExprPtr a, ExprPtr b, Pos p = {});
    static ExprPtr disj(ExprPtr a, ExprPtr b, Pos p = {});
    static ExprPtr equals(ExprPtr a, ExprPtr b, Pos p = {});
    static ExprPtr knows(std::string who, ExprPtr body, Pos p = {});
    static ExprPtr next(int steps, ExprPtr body, Pos p = {});
    static ExprPtr quant(bool forall, std::string var, std::string type, ExprPtr body, Pos p = {});
    static ExprPtr skel(std::string id, Pos p = {});
};

/// Structural equality, ignoring positions.
bool equal(const ExprPtr& a, const ExprPtr& b);

bool contains_knows(const Expr& e);
bool contains_next(const Expr& e);
bool contains_skel(const Expr& e);

/// Left-nested conjunction/disjunction of a list; empty lists give true/false.
ExprPtr conj_all(const std::vector<ExprPtr>& parts);
ExprPtr disj_all(const std::vector<ExprPtr>& parts);

/// Assignment target: `name` or `name[index]`.
struct LValue {
    std::string name;
    std::string index;  // empty when not indexed
    Pos pos;

    friend bool operator==(const LValue& a, const LValue& b) { return a.name == b.name && a.index == b.index; }
};

struct Assign {
    LValue target;
    ExprPtr value;
    Pos pos;
};

struct Atomic {
    std::optional<std::string> action;
    std::vector<Assign> assigns;
    Pos pos;

    bool is_skip() const { return !action && assigns.empty(); }
};

struct Arm {
    ExprPtr guard;  // null for `otherwise`
    Atomic body;
    Pos pos;

    bool is_otherwise() const { return guard == nullptr; }
};

struct Statement {
    bool branch = false;
    Atomic atomic;          // when !branch
    std::vector<Arm> arms;  // when branch
    Pos pos;

    static Statement skip() { return {}; }
};

using Program = std::vector<Statement>;

struct TypeDecl {
    std::string name;
    TypeRef type;
    Pos pos;
};

struct VarDecl {
    std::string name;
    TypeRef type;
    bool per_agent = false;  // `T[Agent]`
    bool observable = false;
    Pos pos;
};

struct AgentDecl {
    std::string name;
    std::string protocol;
    std::vector<LValue> args;
    Pos pos;
};

struct ProtocolDecl {
    std::string name;
    std::vector<VarDecl> params;
    std::vector<VarDecl> locals;
    ExprPtr init;  // may be null
    Program body;
    Pos pos;
};

struct Model {
    std::vector<TypeDecl> types;
    std::vector<VarDecl> env_vars;
    ExprPtr init;  // may be null (true)
    std::vector<AgentDecl> agents;
    Program transitions;
    std::vector<ProtocolDecl> protocols;

    const ProtocolDecl* find_protocol(const std::string& name) const;
    ProtocolDecl* find_protocol(const std::string& name);
    const AgentDecl* find_agent(const std::string& name) const;
    /// True iff some protocol mentions a knowledge operator.
    bool knowledge_based() const;
};

bool equal(const Atomic& a, const Atomic& b);
bool equal(const Statement& a, const Statement& b);
bool equal(const Program& a, const Program& b);
bool equal(const VarDecl& a, const VarDecl& b);
bool equal(const ProtocolDecl& a, const ProtocolDecl& b);
/// Structural equality of whole documents, ignoring positions.
bool equal(const Model& a, const Model& b);

/// Visits every expression (guards, assignment sources) of a program.
void for_each_expr(const Program& p, const std::function<void(const ExprPtr&)>& visit);

}  // namespace kbp::ast
