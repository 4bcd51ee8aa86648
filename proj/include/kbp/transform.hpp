#pragma once

// Source-to-source transforms on knowledge-based models: skeleton
// extraction, the history-variable transform that reduces perfect recall to
// the clock view, substitution of skeleton variables, and protocol
// specialisation/merging between template and per-agent form.

#include <map>
#include <string>
#include <vector>

#include "kbp/ast.hpp"

namespace kbp {

/// A knowledge condition of one agent at one time, replaced by a fresh name.
struct SkeletonVar {
    std::string id;       // unique, `k_<agent>_<time>_<hash>`
    std::string agent;
    int time = 0;
    ast::ExprPtr formula;  // atemporal, contains Knows, written in the agent's protocol names
};

struct Skeleton {
    ast::Model model;  // per-agent protocols, no Knows left
    std::vector<SkeletonVar> vars;
};

/// Map from skeleton identifier to an expression over the owning agent's
/// observable protocol names.
using Substitution = std::map<std::string, ast::ExprPtr>;

/// Length of the longest protocol program bound to some agent.
int joint_length(const ast::Model& m);

/// Gives every agent its own protocol copy named `<protocol>_<agent>` and
/// pads all programs with trailing skips to the joint length.
ast::Model specialize(const ast::Model& m);

/// Inverse of specialize where possible: agents whose protocol copies are
/// all structurally equal are pointed back at one protocol carrying the
/// template name; others keep their copies.
ast::Model merge_protocols(const ast::Model& specialized, const ast::Model& original);

/// Replaces maximal knowledge subformulas free of non-observable variables
/// outside knowledge scopes by skeleton variables.  Throws ValidationError
/// when a knowledge subformula cannot be covered.
Skeleton skeleton(const ast::Model& m);

/// Perfect-recall history variables `v@k` for every observable v and k < length.
/// Observables that are themselves history variables are not recorded again.
ast::Model history_transform(const ast::Model& m, int length);

/// The model itself when every protocol already records the full history of
/// its observables, otherwise its history transform over the joint length.
ast::Model with_perfect_recall(const ast::Model& m);

/// Replaces each skeleton variable by its image.  Throws UsageError on a
/// missing binding.  Observability of images is checked on compilation.
ast::Model substitute(const ast::Model& skeleton_model, const Substitution& theta);

/// Canonical text of a formula with any quantifiers left as written.
std::string canonical_text(const ast::ExprPtr& e);

}  // namespace kbp
