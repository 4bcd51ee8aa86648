#include "kbp/synthesis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "kbp/errors.hpp"
#include "kbp/parser.hpp"
#include "kbp/printer.hpp"

namespace kbp {

using ast::Expr;
using ast::ExprPtr;
using bdd::Bdd;
using bdd::VarId;

namespace {

std::size_t literal_count(const bdd::Cover& c) {
    std::size_t n = 0;
    for (const auto& cube : c.cubes) n += cube.size();
    return n;
}

// Expression for one variable restricted to `codes` (a non-empty proper subset of its domain).
ExprPtr code_set(const std::string& name, const Domain& d, const std::vector<int>& codes) {
    if (d.kind == Domain::Kind::Bool) return codes.front() ? Expr::ident(name) : Expr::negate(Expr::ident(name));
    std::vector<int> rest;
    for (int c = 0; c < d.size; ++c)
        if (!std::binary_search(codes.begin(), codes.end(), c)) rest.push_back(c);
    auto is = [&](int c) { return Expr::equals(Expr::ident(name), d.literal(c)); };
    if (rest.size() < codes.size()) {
        std::vector<ExprPtr> parts;
        for (int c : rest) parts.push_back(Expr::negate(is(c)));
        return ast::conj_all(parts);
    }
    std::vector<ExprPtr> parts;
    for (int c : codes) parts.push_back(is(c));
    return ast::disj_all(parts);
}

// Null when the cube admits no valid code of some variable.
ExprPtr cube_expression(const SymbolicSystem& sys, int agent, const bdd::Cube& cube) {
    const CompiledModel& m = sys.model();
    const CAgent& ag = m.agents[agent];
    std::vector<ExprPtr> parts;
    for (int v : ag.observables) {
        const auto& bits = sys.bits_of(v);
        const Domain& d = m.vars[v].dom;
        std::vector<std::pair<std::size_t, bool>> fixed;
        for (auto [var, val] : cube) {
            auto it = std::find(bits.begin(), bits.end(), var);
            if (it != bits.end()) fixed.emplace_back(static_cast<std::size_t>(it - bits.begin()), val);
        }
        if (fixed.empty()) continue;
        std::vector<int> codes;
        for (int c = 0; c < d.size; ++c) {
            bool ok = true;
            for (auto [pos, val] : fixed) ok = ok && (((c >> (bits.size() - 1 - pos)) & 1) == (val ? 1 : 0));
            if (ok) codes.push_back(c);
        }
        if (codes.empty()) return nullptr;
        if (static_cast<int>(codes.size()) == d.size) continue;
        parts.push_back(code_set(ag.names.at(v), d, codes));
    }
    return ast::conj_all(parts);
}

}  // namespace

ExtractedCondition extract_condition(SymbolicSystem& sys, int agent, const Bdd& truth, const Bdd& care) {
    bdd::Manager& mgr = sys.manager();
    if (care.is_zero()) return {Expr::boolean(false), mgr.zero()};
    bdd::Cover interval = mgr.isop(truth & care, truth | ~care);
    Bdd simplified = mgr.restrict(truth, care);
    bdd::Cover restricted = mgr.isop(simplified, simplified);
    auto size = [](const bdd::Cover& c) { return std::make_pair(literal_count(c), c.cubes.size()); };
    const bdd::Cover& best = size(restricted) < size(interval) ? restricted : interval;

    std::vector<ExprPtr> terms;
    for (const auto& cube : best.cubes)
        if (ExprPtr t = cube_expression(sys, agent, cube)) terms.push_back(t);
    return {ast::disj_all(terms), best.function};
}

ExtractedCondition extract_condition(SymbolicSystem& sys, const Bdd& slice, int agent, const RExpr& phi) {
    return extract_condition(sys, agent, obs_sat(sys, slice, agent, phi), realized_observations(sys, slice, agent));
}

SymbolicTheta SynthesisResult::symbolic_theta() const {
    SymbolicTheta out;
    for (const auto& c : conditions) out[*compiled().find_skeleton(c.var.id)] = c.function;
    return out;
}

ast::Model prepare_for_view(const ast::Model& m, View view) {
    if (view == View::Spr && m.knowledge_based()) return with_perfect_recall(m);
    return m;
}

SynthesisResult synthesize(const ast::Model& m, const SynthesisOptions& options) {
    if (options.view == View::Obs) {
        throw UsageError("synthesis supports the clk and spr views only; the observational view is out of scope");
    }
    SynthesisResult r;
    r.view = options.view;
    r.input = m;
    r.transformed = prepare_for_view(m, options.view);
    r.skeleton = skeleton(r.transformed);
    r.system = std::make_shared<SymbolicSystem>(compile(r.skeleton.model, r.skeleton.vars), options.encoding);
    SymbolicSystem& sys = *r.system;
    const CompiledModel& cm = sys.model();

    int last = 0;
    for (const auto& v : r.skeleton.vars) last = std::max(last, v.time);
    if (r.skeleton.vars.empty()) r.warnings.push_back("no knowledge conditions");

    Bdd states = sys.initial_set();
    if (states.is_zero()) r.warnings.push_back("the initial condition is unsatisfiable; every condition is set to false");
    SymbolicTheta theta;
    for (int k = 0; k <= last; ++k) {
        r.slices.push_back(states);
        for (const auto& v : r.skeleton.vars) {
            if (v.time != k) continue;
            Condition c;
            c.var = v;
            c.agent = *cm.find_agent(v.agent);
            c.truth = obs_sat(sys, states, c.agent, cm.resolve_skeleton(v));
            c.care = realized_observations(sys, states, c.agent);
            c.care_count = sys.manager().sat_count(c.care, sys.observable_bits(c.agent));
            ExtractedCondition ex = extract_condition(sys, c.agent, c.truth, c.care);
            c.expression = ex.expression;
            c.function = sys.eval(cm.resolve_observable(c.agent, c.expression));
            if (!((c.function ^ c.truth) & c.care).is_zero()) {
                throw InternalError("extracted condition for " + v.id + " disagrees with its formula on a realized observation");
            }
            theta[*cm.find_skeleton(v.id)] = c.function;
            r.theta[v.id] = c.expression;
            r.conditions.push_back(std::move(c));
        }
        if (k < last) states = sys.image(states, k, &theta);
    }
    r.standard_model = merge_protocols(substitute(r.skeleton.model, r.theta), r.transformed);
    return r;
}

Emission emit(const SynthesisResult& r) {
    Emission e;
    e.program = print(r.standard_model);
    std::ostringstream os;
    os << "# agent\ttime\tformula\texpression\tcare\n";
    for (const auto& c : r.conditions) {
        os << c.var.agent << '\t' << c.var.time << '\t' << canonical_text(c.var.formula) << '\t' << print(c.expression)
           << '\t' << static_cast<long long>(c.care_count) << '\n';
    }
    e.sidecar = os.str();
    return e;
}

Substitution read_sidecar(const Skeleton& skeleton, const std::string& text) {
    Substitution theta;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1)
            fields.push_back(line.substr(start, tab - start));
        fields.push_back(line.substr(start));
        if (fields.size() < 4) throw UsageError("sidecar line " + std::to_string(line_no) + ": expected tab-separated fields");
        const SkeletonVar* match = nullptr;
        for (const auto& v : skeleton.vars) {
            if (v.agent == fields[0] && std::to_string(v.time) == fields[1] && canonical_text(v.formula) == fields[2]) {
                match = &v;
            }
        }
        if (!match) {
            throw UsageError("sidecar line " + std::to_string(line_no) + ": no condition '" + fields[2] + "' of agent " +
                             fields[0] + " at time " + fields[1]);
        }
        theta[match->id] = parse_formula(fields[3]);
    }
    for (const auto& v : skeleton.vars)
        if (!theta.count(v.id)) {
            throw UsageError("sidecar has no record for agent " + v.agent + " at time " + std::to_string(v.time) + ": " +
                             canonical_text(v.formula));
        }
    return theta;
}

}  // namespace kbp
