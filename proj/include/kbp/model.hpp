#pragma once

// Elaborated system models: every variable of the global state is an entry
// in one table, every name in a program is resolved to that table, and
// finite types are represented by value codes 0..size-1.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbp/ast.hpp"
#include "kbp/errors.hpp"
#include "kbp/transform.hpp"

namespace kbp {

struct Domain {
    enum class Kind { Bool, Enum, Range };
    Kind kind = Kind::Bool;
    int lo = 0;    // Range: value of code 0
    int size = 2;  // number of codes
    std::vector<std::string> labels;

    /// Bits in the binary encoding; at least one.
    int bits() const;
    /// Surface text of a code: true/false, label, or number.
    std::string text(int code) const;
    /// Surface expression of a code.
    ast::ExprPtr literal(int code) const;

    friend bool operator==(const Domain&, const Domain&) = default;
};

struct Variable {
    std::string name;  // `v`, `arr[Agent]`, `Agent.local`, `Agent.v@k`
    Domain dom;
    int agent = -1;         // owner of a local; -1 for environment variables
    int history_time = -1;  // k for a history variable `v@k`
};

/// Resolved expression.  Boolean-valued nodes evaluate to 0/1; Eq compares
/// value codes of two operands of one domain.
struct RExpr {
    enum class Kind { Const, Var, Act, Not, And, Or, Eq, Knows, Next, Skel };
    Kind kind = Kind::Const;
    int a = 0;  // Const: code; Var: var index; Act: agent; Knows: agent; Next: steps; Skel: index
    int b = 0;  // Act: action index
    std::vector<RExpr> args;

    static RExpr constant(int code) { return {Kind::Const, code, 0, {}}; }
    static RExpr var(int v) { return {Kind::Var, v, 0, {}}; }
    static RExpr negate(RExpr e) { return {Kind::Not, 0, 0, {std::move(e)}}; }
    static RExpr conj(std::vector<RExpr> xs);
    static RExpr disj(std::vector<RExpr> xs);
    static RExpr equals(RExpr x, RExpr y) { return {Kind::Eq, 0, 0, {std::move(x), std::move(y)}}; }

    bool is_true() const { return kind == Kind::Const && a == 1; }
    bool is_false() const { return kind == Kind::Const && a == 0; }
};

bool contains(const RExpr& e, RExpr::Kind k);
/// Variables read outside any Knows scope.
void free_vars(const RExpr& e, std::vector<int>& out);

struct CAssign {
    int var = 0;
    RExpr value;
};

struct CAtomic {
    int action = -1;  // index into CompiledModel::actions, -1 for none
    std::vector<CAssign> assigns;
};

struct CArm {
    RExpr guard;  // `otherwise` is compiled to the negated disjunction of earlier guards
    bool otherwise = false;
    CAtomic body;
};

struct CStatement {
    bool branch = false;
    CAtomic atomic;
    std::vector<CArm> arms;
};

struct CAgent {
    std::string name;
    std::string protocol;
    std::vector<int> locals;       // sorted
    std::vector<int> observables;  // sorted; aliased parameters are environment variables
    RExpr init;                    // over locals
    std::vector<CStatement> program;  // padded to the joint length
    std::map<std::string, int> scope;  // protocol-level name -> variable
    std::map<int, std::string> names;  // variable -> protocol-level name (observables and locals)
};

struct ValidationReport {
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

class CompiledModel {
public:
    ast::Model source;
    std::vector<Variable> vars;
    std::vector<int> env_vars;
    std::vector<std::string> actions;
    std::vector<CAgent> agents;
    RExpr init_env;
    std::vector<CStatement> tau;
    int length = 0;
    std::vector<SkeletonVar> skeleton_vars;
    bool knowledge_based = false;
    std::map<std::string, Domain> type_aliases;
    std::map<std::string, Domain> label_domains;  // enumeration label -> its type

    std::optional<int> find_var(const std::string& name) const;
    std::optional<int> find_agent(const std::string& name) const;
    std::optional<int> find_action(const std::string& name) const;
    std::optional<int> find_skeleton(const std::string& id) const;

    /// Resolves a formula written at the top level: environment variables,
    /// `Agent.local`, Knows over agent names and bound agent variables, X^k.
    RExpr resolve_global(const ast::ExprPtr& e) const;
    /// Resolves an expression in an agent's protocol scope, outside any
    /// knowledge operator; it may read only that agent's observables.
    RExpr resolve_observable(int agent, const ast::ExprPtr& e) const;
    /// Resolves a skeleton variable's formula in its agent's scope.
    RExpr resolve_skeleton(const SkeletonVar& v) const;

    /// Total number of bits in the binary state encoding.
    int state_bits() const;
    /// Conjunction Init_e and every agent's Init_i.
    RExpr initial_condition() const;
};

/// Full static check; never throws for model-level problems.
ValidationReport validate(const ast::Model& m, std::span<const SkeletonVar> skeleton_vars = {});

/// Elaborates a model; throws ValidationError with every diagnostic found.
CompiledModel compile(const ast::Model& m, std::span<const SkeletonVar> skeleton_vars = {});

}  // namespace kbp
