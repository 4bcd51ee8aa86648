#pragma once

// Construction of an implementation of a knowledge-based program: each
// knowledge condition at time k is replaced by the observable expression
// that agrees with it on every observation realized at time k.

#include <memory>
#include <string>
#include <vector>

#include "kbp/epistemic.hpp"
#include "kbp/symbolic.hpp"
#include "kbp/transform.hpp"

namespace kbp {

/// One synthesized condition.
struct Condition {
    SkeletonVar var;
    int agent = 0;                // index in the compiled model
    ast::ExprPtr expression;      // over the agent's protocol-level observable names
    bdd::Bdd function;            // the expression, resolved over current bits
    bdd::Bdd truth;               // observation-level truth of the knowledge formula
    bdd::Bdd care;                // observations realized at var.time
    double care_count = 0;
};

struct SynthesisOptions {
    View view = View::Clk;
    EncodingOptions encoding;
};

struct SynthesisResult {
    View view = View::Clk;
    ast::Model input;
    ast::Model transformed;  // input after the history transform (spr) or as is
    Skeleton skeleton;
    std::shared_ptr<SymbolicSystem> system;  // over the skeleton model
    std::vector<Condition> conditions;
    Substitution theta;
    ast::Model standard_model;
    std::vector<bdd::Bdd> slices;  // S_0..S_N
    std::vector<std::string> warnings;

    const CompiledModel& compiled() const { return system->model(); }
    /// Conditions bound by skeleton index, for image computations.
    SymbolicTheta symbolic_theta() const;
};

/// Runs the slice-by-slice construction.  Throws ValidationError on an
/// invalid model and UsageError on an unsupported view.
SynthesisResult synthesize(const ast::Model& m, const SynthesisOptions& options = {});

struct ExtractedCondition {
    ast::ExprPtr expression;
    bdd::Bdd cover;  // function of the expression over observable bits
};

/// An expression over `agent`'s observables that equals `truth` wherever
/// `care` holds; elsewhere its value is chosen to keep the expression small.
ExtractedCondition extract_condition(SymbolicSystem& sys, int agent, const bdd::Bdd& truth, const bdd::Bdd& care);
/// Same for a knowledge formula evaluated in one slice.
ExtractedCondition extract_condition(SymbolicSystem& sys, const bdd::Bdd& slice, int agent, const RExpr& phi);

struct Emission {
    std::string program;
    std::string sidecar;
};

Emission emit(const SynthesisResult& r);

/// Reads a sidecar back into a substitution over the skeleton of `kbp`
/// (already history-transformed for spr).  Throws UsageError on a record
/// that matches no skeleton variable or a missing record.
Substitution read_sidecar(const Skeleton& skeleton, const std::string& text);

/// The model as synthesis sees it: the history transform for spr, the
/// input otherwise.
ast::Model prepare_for_view(const ast::Model& m, View view);

}  // namespace kbp
