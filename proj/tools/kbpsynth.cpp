// kbpsynth: synthesize, check, simulate and generate knowledge-based programs.
// Exit status: 0 success, 1 user or validation error, 2 internal error.

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "kbp/corpus.hpp"
#include "kbp/oracle.hpp"
#include "kbp/parser.hpp"
#include "kbp/printer.hpp"
#include "kbp/synthesis.hpp"

namespace {

using namespace kbp;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

ast::Model load(const std::string& path) { return parse_model(read_file(path)); }

struct Config {
    std::vector<std::string> inputs;
    std::string view = "spr";
    std::string out;
    std::string sidecar;
    std::string formula;
    std::string trace_out;
    std::string init;
    int init_index = -1;
    int steps = -1;
    int depth = -1;
    std::uint64_t seed = 0;
    bool seeded = false;
    bool oracle = false;
    std::size_t oracle_bound = std::size_t{1} << 16;
    unsigned jobs = 1;
    std::vector<std::string> crashes;
    std::string family;
    int agents = 0;
    bool clock_variant = false;
    bool reverse_agents = false;
};

// Differences between symbolic and explicit synthesis on realized observations.
std::vector<std::string> oracle_mismatches(const SynthesisResult& r, const ExplicitSynthesis& ex) {
    std::vector<std::string> out;
    SymbolicSystem& sys = *r.system;
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
        const Condition& c = r.conditions[i];
        const ExplicitCondition& e = ex.conditions.at(i);
        if (e.var.id != c.var.id) throw InternalError("oracle and synthesis disagree on the skeleton");
        auto realized = sys.observations(c.agent, c.care);
        std::set<Observation> care(realized.begin(), realized.end());
        if (care != e.care) out.push_back(c.var.id + ": realized observations differ");
        for (const auto& o : e.care)
            if (sys.eval_observation(c.function, c.agent, o) != (e.truth.count(o) > 0))
                out.push_back(c.var.id + ": condition differs on a realized observation");
    }
    return out;
}

int synth_one(const Config& cfg, const std::string& input, std::ostream& log) {
    SynthesisOptions opt;
    opt.view = parse_view(cfg.view);
    opt.encoding.reverse_agents = cfg.reverse_agents;
    SynthesisResult r = synthesize(load(input), opt);
    for (const auto& w : r.warnings) log << input << ": warning: " << w << '\n';
    for (std::size_t k = 0; k < r.slices.size(); ++k)
        log << input << ": slice " << k << ": " << static_cast<long long>(r.system->count(r.slices[k])) << " states\n";
    for (const auto& c : r.conditions)
        log << input << ": " << c.var.agent << " t=" << c.var.time << ' ' << canonical_text(c.var.formula)
            << " :: " << print(c.expression) << '\n';
    if (cfg.oracle) {
        auto mismatches = oracle_mismatches(r, explicit_synthesize(r.input, opt.view, cfg.oracle_bound));
        for (const auto& m : mismatches) log << input << ": oracle: " << m << '\n';
        if (!mismatches.empty()) throw InternalError("explicit oracle disagrees with symbolic synthesis");
        log << input << ": oracle agrees\n";
    }
    Emission e = emit(r);
    std::string out = cfg.out.empty() || cfg.inputs.size() > 1 ? input + ".impl" : cfg.out;
    write_file(out, e.program);
    write_file(out + ".sidecar", e.sidecar);
    log << input << ": wrote " << out << " and " << out << ".sidecar\n";
    return kOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics()) err << "error: " << d.str() << '\n';
        if (e.diagnostics().empty()) err << "error: " << e.what() << '\n';
        return kUserError;
    } catch (const SyntaxError& e) {
        err << "syntax error: " << e.what() << '\n';
        return kUserError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUserError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUserError;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

int cmd_synth(const Config& cfg) {
    if (cfg.jobs <= 1 || cfg.inputs.size() <= 1) {
        int worst = kOk;
        for (const auto& in : cfg.inputs)
            worst = std::max(worst, run_guarded([&] { return synth_one(cfg, in, std::cout); }, std::cerr));
        return worst;
    }
    // one manager per input; outputs are buffered so lines do not interleave
    std::atomic<std::size_t> next{0};
    std::atomic<int> worst{kOk};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cfg.inputs.size();) {
            std::ostringstream log, err;
            int rc = run_guarded([&] { return synth_one(cfg, cfg.inputs[i], log); }, err);
            std::lock_guard<std::mutex> lock(io);
            std::cout << log.str();
            std::cerr << err.str();
            for (int w = worst; rc > w && !worst.compare_exchange_weak(w, rc);) {}
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < std::min<std::size_t>(cfg.jobs, cfg.inputs.size()); ++j) pool.emplace_back(worker);
    pool.clear();
    return worst;
}

int cmd_check(const Config& cfg) {
    View view = parse_view(cfg.view);
    ast::Model m = load(cfg.inputs.at(0));
    if (!cfg.formula.empty()) {
        ast::Model standard = m;
        if (m.knowledge_based()) {
            if (cfg.sidecar.empty()) throw UsageError("model checking a knowledge-based program needs --sidecar");
            Skeleton sk = skeleton(prepare_for_view(m, view));
            standard = merge_protocols(substitute(sk.model, read_sidecar(sk, read_file(cfg.sidecar))), m);
        }
        ast::ExprPtr f = parse_formula(cfg.formula);
        ModelCheckResult r = cfg.depth >= 0 ? model_check_X(standard, view, cfg.depth, f) : model_check(standard, view, f);
        for (std::size_t k = 0; k < r.slice_sizes.size(); ++k)
            std::cout << "slice " << k << ": " << static_cast<long long>(r.slice_sizes[k]) << " states\n";
        std::cout << (r.holds ? "PASS " : "FAIL ") << cfg.formula << '\n';
        if (!r.holds) {
            std::cout << "counterexample " << r.counterexample_text << '\n' << r.trace_text;
            if (!cfg.trace_out.empty()) write_file(cfg.trace_out, r.trace_text);
        }
        return r.holds ? kOk : kUserError;
    }
    if (cfg.sidecar.empty()) throw UsageError("check needs --sidecar or --formula");
    Skeleton sk = skeleton(prepare_for_view(m, view));
    CheckReport report = check_implementation(m, read_sidecar(sk, read_file(cfg.sidecar)), view);
    std::cout << report.str();
    if (!report.pass() && !cfg.trace_out.empty()) {
        for (const auto& e : report.entries)
            if (!e.pass) {
                write_file(cfg.trace_out, e.trace_text);
                break;
            }
    }
    return report.pass() ? kOk : kUserError;
}

// Resolver that takes the crash arm of the named agents at the given steps
// and the lowest enabled choice (or a seeded one) elsewhere.
ChoiceResolver crash_resolver(const CompiledModel& cm, const Config& cfg) {
    std::map<std::pair<int, int>, int> forced;  // (time, env statement) -> arm
    for (const auto& spec : cfg.crashes) {
        auto at = spec.find('@');
        if (at == std::string::npos) throw UsageError("--crash expects AGENT@STEP, got '" + spec + "'");
        std::string agent = spec.substr(0, at);
        int step = std::stoi(spec.substr(at + 1));
        auto var = cm.find_var("crashed[" + agent + "]");
        if (!var) throw UsageError("no crashed[" + agent + "] variable in this model");
        bool found = false;
        for (std::size_t s = 0; s < cm.tau.size() && !found; ++s)
            for (std::size_t a = 0; a < cm.tau[s].arms.size() && !found; ++a)
                for (const auto& as : cm.tau[s].arms[a].body.assigns)
                    if (as.var == *var && as.value.kind == RExpr::Kind::Const && as.value.a == 1) {
                        forced[{step, static_cast<int>(s)}] = static_cast<int>(a);
                        found = true;
                    }
        if (!found) throw UsageError("no environment choice crashes " + agent);
    }
    ChoiceResolver fallback = cfg.seeded ? seeded_resolver(cfg.seed) : lowest_enabled();
    return [forced, fallback](const ChoicePoint& p) {
        if (p.agent < 0) {
            auto it = forced.find({p.time, p.statement});
            if (it != forced.end()) return it->second;
        }
        return fallback(p);
    };
}

int cmd_simulate(const Config& cfg) {
    ast::Model m = load(cfg.inputs.at(0));
    if (m.knowledge_based()) throw UsageError("simulate needs a standard program; run synth first");
    CompiledModel cm = compile(m);
    GlobalState s0;
    if (!cfg.init.empty()) {
        s0 = parse_state(cm, cfg.init);
    } else {
        auto inits = initial_states(cm);
        if (inits.empty()) throw UsageError("the initial condition is unsatisfiable");
        int idx = std::max(cfg.init_index, 0);
        if (idx >= static_cast<int>(inits.size()))
            throw UsageError("--init-index " + std::to_string(idx) + " out of range; " + std::to_string(inits.size()) + " initial states");
        s0 = inits[static_cast<std::size_t>(idx)];
    }
    Trace t = simulate(cm, s0, cfg.steps < 0 ? cm.length : cfg.steps, crash_resolver(cm, cfg));
    std::string text = export_trace(cm, t);
    std::cout << text;
    if (!cfg.out.empty()) write_file(cfg.out, text);
    return kOk;
}

int cmd_gen(const Config& cfg) {
    std::string text;
    if (cfg.family == "muddy") text = corpus::muddy(cfg.agents, cfg.clock_variant);
    else if (cfg.family == "election") text = corpus::election(cfg.agents, cfg.steps < 0 ? cfg.agents : cfg.steps);
    else throw UsageError("unknown family '" + cfg.family + "'; use muddy or election");
    if (cfg.out.empty()) std::cout << text;
    else write_file(cfg.out, text);
    return kOk;
}

int cmd_oracle_compare(const Config& cfg) {
    View view = parse_view(cfg.view);
    ast::Model m = load(cfg.inputs.at(0));
    SynthesisResult r = synthesize(m, {view, {}});
    auto mismatches = oracle_mismatches(r, explicit_synthesize(m, view, cfg.oracle_bound));
    for (const auto& s : mismatches) std::cout << "MISMATCH " << s << '\n';
    if (!mismatches.empty()) return kInternalError;
    std::cout << "agree on " << r.conditions.size() << " conditions\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthesis of implementations of knowledge-based programs"};
    app.require_subcommand(1);
    Config cfg;
    const std::string view_help = "clk or spr";

    auto* synth = app.add_subcommand("synth", "synthesize a standard program and write it with its sidecar");
    synth->add_option("inputs", cfg.inputs, "model files")->required();
    synth->add_option("--view", cfg.view, view_help);
    synth->add_option("--out", cfg.out, "output path for a single input; the sidecar goes to <out>.sidecar");
    synth->add_flag("--oracle", cfg.oracle, "cross-check against explicit-state synthesis");
    synth->add_option("--oracle-bound", cfg.oracle_bound, "state bound for the explicit oracle");
    synth->add_option("--jobs", cfg.jobs, "inputs processed in parallel");
    synth->add_flag("--reverse-agents", cfg.reverse_agents, "lay out agent blocks in reverse order");

    auto* check = app.add_subcommand("check", "check a sidecar against its program, or model check a formula");
    check->add_option("input", cfg.inputs, "model file")->required()->expected(1);
    check->add_option("--view", cfg.view, view_help);
    check->add_option("--sidecar", cfg.sidecar, "synthesized conditions");
    check->add_option("--formula", cfg.formula, "X^k phi to model check");
    check->add_option("--depth", cfg.depth, "check phi at this depth instead of leading X operators");
    check->add_option("--trace-out", cfg.trace_out, "write the counterexample trace here on failure");

    auto* sim = app.add_subcommand("simulate", "run a standard program from one initial state");
    sim->add_option("input", cfg.inputs, "model file")->required()->expected(1);
    sim->add_option("--init", cfg.init, "initial state as name=value pairs");
    sim->add_option("--init-index", cfg.init_index, "index into the enumerated initial states");
    sim->add_option("--steps", cfg.steps, "number of steps, at most the program length");
    sim->add_option("--seed", cfg.seed, "resolve nondeterminism pseudo-randomly")->each([&](const std::string&) { cfg.seeded = true; });
    sim->add_option("--crash", cfg.crashes, "AGENT@STEP: take the crash choice of AGENT at STEP");
    sim->add_option("--out", cfg.out, "also write the trace here");

    auto* gen = app.add_subcommand("gen", "print a generated model");
    gen->add_option("family", cfg.family, "muddy or election")->required();
    gen->add_option("n", cfg.agents, "number of agents")->required();
    gen->add_option("--steps", cfg.steps, "program length (election)");
    gen->add_flag("--clk", cfg.clock_variant, "clock-view muddy variant");
    gen->add_option("--out", cfg.out, "write here instead of stdout");

    auto* oc = app.add_subcommand("oracle-compare", "compare symbolic and explicit synthesis");
    oc->add_option("input", cfg.inputs, "model file")->required()->expected(1);
    oc->add_option("--view", cfg.view, view_help);
    oc->add_option("--oracle-bound", cfg.oracle_bound, "state bound for the explicit oracle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUserError;
    }

    if (*synth) return cmd_synth(cfg);
    std::function<int()> body;
    if (*check) body = [&] { return cmd_check(cfg); };
    else if (*sim) body = [&] { return cmd_simulate(cfg); };
    else if (*gen) body = [&] { return cmd_gen(cfg); };
    else body = [&] { return cmd_oracle_compare(cfg); };
    return run_guarded(body, std::cerr);
}
