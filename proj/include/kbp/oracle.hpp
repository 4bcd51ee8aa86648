#pragma once

// Independent checks of synthesis output: the implementation condition
// re-established from scratch, bounded model checking of X^k formulas, and
// a brute-force synthesizer over explicit state sets.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbp/epistemic.hpp"
#include "kbp/explicit.hpp"
#include "kbp/transform.hpp"

namespace kbp {

struct CheckEntry {
    std::string agent;
    int time = 0;
    std::string formula;
    std::string expression;
    bool pass = true;
    // on failure: a slice state where formula and expression differ
    std::optional<GlobalState> witness;
    Observation observation;
    std::optional<Trace> trace;
    std::string witness_text;
    std::string trace_text;
};

struct CheckReport {
    std::vector<CheckEntry> entries;

    bool pass() const;
    /// One line per condition: `PASS|FAIL agent time formula :: expression`.
    std::string str() const;
};

/// Rebuilds the slices by running the substituted program and checks, for
/// every skeleton variable at time t, that formula and image hold in the
/// same states of S_t.  Throws UsageError when theta misses a variable and
/// ValidationError when an image reads a non-observable variable.
CheckReport check_implementation(const ast::Model& kbp, const Substitution& theta, View view);

struct ModelCheckResult {
    bool holds = true;
    std::vector<double> slice_sizes;  // |S_0| .. |S_depth|
    std::optional<GlobalState> counterexample;
    std::optional<Trace> trace;  // reaches the counterexample from S_0
    std::string counterexample_text;
    std::string trace_text;
};

/// Checks X^depth phi on a standard model: every state of S_depth satisfies
/// the atemporal phi.  Throws UsageError on a knowledge-based model, a depth
/// beyond the program length, or knowledge under the obs view.
ModelCheckResult model_check_X(const ast::Model& standard, View view, int depth, const ast::ExprPtr& phi);
/// Splits leading X operators off `formula` and checks the rest.
ModelCheckResult model_check(const ast::Model& standard, View view, const ast::ExprPtr& formula);

struct ExplicitCondition {
    SkeletonVar var;
    int agent = 0;
    std::set<Observation> care;   // observations realized at var.time
    std::set<Observation> truth;  // realized observations where the formula holds
};

struct ExplicitSynthesis {
    CompiledModel model;  // compiled skeleton model
    std::vector<ExplicitCondition> conditions;
    std::vector<std::vector<GlobalState>> slices;  // S_0..S_N

    /// Evaluates skeleton variables through the truth tables; valid while
    /// this object is alive and unmoved.
    EvalContext context() const;
};

/// The slice construction over explicit state sets with knowledge evaluated
/// by sweeping observation classes.  Throws UsageError when a slice exceeds
/// `bound` states.
ExplicitSynthesis explicit_synthesize(const ast::Model& m, View view, std::size_t bound = std::size_t{1} << 16);

/// Number of distinct runs (state sequences) of `length` steps of the
/// explicitly synthesized program.
double count_runs(const ExplicitSynthesis& s, int length, std::size_t bound = std::size_t{1} << 16);

}  // namespace kbp
