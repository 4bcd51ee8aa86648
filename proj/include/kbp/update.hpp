#pragma once

// Static-proposition epistemic models and their product with update
// structures (event models with preconditions), plus bisimulation
// minimization of the result.

#include <string>
#include <vector>

#include "kbp/ast.hpp"

namespace kbp::update {

/// Worlds with a valuation over named atoms and, per agent, an
/// equivalence given by class ids.
struct ExplicitModel {
    std::vector<std::string> agents;
    std::vector<std::string> atoms;             // e.g. `muddy[Child0]`
    std::vector<std::vector<bool>> valuation;   // per world, per atom
    std::vector<std::vector<int>> classes;      // per agent, per world
    std::vector<int> origin;                    // per world: world of the initial model it descends from, -1 if merged

    std::size_t size() const { return valuation.size(); }
};

struct UpdateStructure {
    std::vector<std::string> events;
    std::vector<std::vector<int>> classes;  // per agent, per event
    std::vector<ast::ExprPtr> pre;          // per event
};

/// Truth of a formula at a world: atoms by name (arrays indexed by agent
/// name or bound variable), Boolean connectives, `==` between Boolean
/// operands, Knows, and quantifiers over agents.  Throws UsageError on
/// anything else.
bool holds(const ExplicitModel& m, int world, const ast::ExprPtr& phi);
std::vector<bool> truth(const ExplicitModel& m, const ast::ExprPtr& phi);

/// Product model: worlds (w, e) with pre(e) true at w; (w1,e1) and (w2,e2)
/// are indistinguishable for i iff w1 ~i w2 and e1 ~i e2; valuation of w.
ExplicitModel apply_update(const ExplicitModel& m, const UpdateStructure& u, bool quotient = false);

/// Quotient by the largest bisimulation, computed by partition refinement.
/// `block_of`, when given, receives the quotient world of every world of m.
ExplicitModel bisimulation_quotient(const ExplicitModel& m, std::vector<int>* block_of = nullptr);

/// [U, T]phi at every world of S: phi holds at (w, e) for each w in S and
/// each e in T with pre(e) true at w.
bool check_update_formula(const ExplicitModel& m, const std::vector<int>& worlds, const UpdateStructure& u,
                          const std::vector<int>& events, const ast::ExprPtr& phi);

/// Muddy children: worlds are the non-empty sets of muddy children; child i
/// sees everyone's forehead but its own.
ExplicitModel muddy_initial(int n);
/// One round of public answers: events are answer vectors, child i says yes
/// exactly when it knows whether it is muddy.
UpdateStructure muddy_round(int n);
/// Agent names shared with the generated muddy models.
std::string muddy_agent(int i);

}  // namespace kbp::update
