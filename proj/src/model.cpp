#include "kbp/model.hpp"

#include <algorithm>
#include <set>

#include "kbp/printer.hpp"

namespace kbp {

using ast::ExprKind;
using ast::ExprPtr;
using ast::Pos;

int Domain::bits() const {
    int b = 1;
    while ((1 << b) < size) ++b;
    return b;
}

std::string Domain::text(int code) const {
    switch (kind) {
        case Kind::Bool: return code ? "true" : "false";
        case Kind::Enum: return code >= 0 && code < size ? labels[code] : "?" + std::to_string(code);
        case Kind::Range: return std::to_string(lo + code);
    }
    return "?";
}

ast::ExprPtr Domain::literal(int code) const {
    switch (kind) {
        case Kind::Bool: return ast::Expr::boolean(code != 0);
        case Kind::Enum: return ast::Expr::ident(labels.at(code));
        case Kind::Range: return ast::Expr::integer(lo + code);
    }
    return nullptr;
}

RExpr RExpr::conj(std::vector<RExpr> xs) {
    std::vector<RExpr> kept;
    for (auto& x : xs) {
        if (x.is_false()) return constant(0);
        if (!x.is_true()) kept.push_back(std::move(x));
    }
    if (kept.empty()) return constant(1);
    if (kept.size() == 1) return std::move(kept.front());
    return {Kind::And, 0, 0, std::move(kept)};
}

RExpr RExpr::disj(std::vector<RExpr> xs) {
    std::vector<RExpr> kept;
    for (auto& x : xs) {
        if (x.is_true()) return constant(1);
        if (!x.is_false()) kept.push_back(std::move(x));
    }
    if (kept.empty()) return constant(0);
    if (kept.size() == 1) return std::move(kept.front());
    return {Kind::Or, 0, 0, std::move(kept)};
}

bool contains(const RExpr& e, RExpr::Kind k) {
    if (e.kind == k) return true;
    return std::any_of(e.args.begin(), e.args.end(), [k](const RExpr& x) { return contains(x, k); });
}

void free_vars(const RExpr& e, std::vector<int>& out) {
    if (e.kind == RExpr::Kind::Knows) return;
    if (e.kind == RExpr::Kind::Var) out.push_back(e.a);
    for (const auto& x : e.args) free_vars(x, out);
}

namespace {

struct Bail {};

enum class Mode { Protocol, ProtocolInit, Tau, EnvInit, Global };

struct Ctx {
    Mode mode = Mode::Global;
    int agent = -1;
    bool in_knows = false;
    std::map<std::string, int> bound;  // bound variable -> agent
};

/// Name resolution and typing against a (partially built) compiled model.
class Resolver {
public:
    Resolver(const CompiledModel& m, std::vector<Diagnostic>& diags) : m_(m), diags_(diags) {}

    [[noreturn]] void fail(Pos p, const std::string& rule, const std::string& msg) const {
        diags_.push_back({p, rule, msg});
        throw Bail{};
    }

    Domain domain_of(const ast::TypeRef& t, Pos p) const {
        Domain d;
        switch (t.kind) {
            case ast::TypeRef::Kind::Bool: return d;
            case ast::TypeRef::Kind::Range:
                d.kind = Domain::Kind::Range;
                d.lo = t.lo;
                d.size = t.hi - t.lo + 1;
                if (d.size > (1 << 16)) fail(p, "type", "range type too large");
                return d;
            case ast::TypeRef::Kind::Enum:
                d.kind = Domain::Kind::Enum;
                d.labels = t.labels;
                d.size = static_cast<int>(t.labels.size());
                return d;
            case ast::TypeRef::Kind::Named: {
                auto it = m_.type_aliases.find(t.name);
                if (it == m_.type_aliases.end()) fail(p, "unknown-name", "unknown type '" + t.name + "'");
                return it->second;
            }
        }
        return d;
    }

    // A resolved operand of `==` or an assignment source.
    struct Term {
        RExpr expr;
        std::optional<Domain> dom;  // absent for bare literals
        std::optional<int> int_literal;
        std::optional<std::string> label;
        Pos pos;
    };

    RExpr boolean(const ExprPtr& e, Ctx& c) const {
        switch (e->kind) {
            case ExprKind::Bool: return RExpr::constant(e->truth ? 1 : 0);
            case ExprKind::Int: fail(e->pos, "type", "integer used as a condition");
            case ExprKind::Name:
            case ExprKind::Index:
            case ExprKind::Member: {
                Term t = term(e, c);
                if (t.label) fail(e->pos, "type", "label '" + *t.label + "' used as a condition");
                if (!t.dom || t.dom->kind != Domain::Kind::Bool) {
                    fail(e->pos, "type", "'" + print(e) + "' is not Boolean");
                }
                return t.expr;
            }
            case ExprKind::Not: return RExpr::negate(boolean(e->args[0], c));
            case ExprKind::And: return RExpr::conj({boolean(e->args[0], c), boolean(e->args[1], c)});
            case ExprKind::Or: return RExpr::disj({boolean(e->args[0], c), boolean(e->args[1], c)});
            case ExprKind::Eq: return equality(e, c);
            case ExprKind::Knows: {
                if (c.mode == Mode::Tau) fail(e->pos, "tau-knowledge", "knowledge operator in the environment program");
                if (c.mode == Mode::EnvInit || c.mode == Mode::ProtocolInit) {
                    fail(e->pos, "init-knowledge", "knowledge operator in an initial condition");
                }
                int who = agent_ref(e->name, e->pos, c);
                Ctx inner = c;
                inner.in_knows = true;
                RExpr body = boolean(e->args[0], inner);
                return {RExpr::Kind::Knows, who, 0, {std::move(body)}};
            }
            case ExprKind::Next: {
                if (c.mode != Mode::Global) fail(e->pos, "atemporal", "temporal operator X inside a program or initial condition");
                if (e->number < 0) fail(e->pos, "type", "negative step count");
                RExpr body = boolean(e->args[0], c);
                return {RExpr::Kind::Next, e->number, 0, {std::move(body)}};
            }
            case ExprKind::Quant: {
                if (e->sub != "Agent") fail(e->pos, "type", "quantifiers range over Agent only");
                if (m_.find_var(e->name) || m_.find_agent(e->name) || m_.label_domains.count(e->name)) {
                    fail(e->pos, "scope", "bound variable '" + e->name + "' shadows a declaration");
                }
                std::vector<RExpr> parts;
                for (int a = 0; a < static_cast<int>(m_.agents.size()); ++a) {
                    Ctx inner = c;
                    inner.bound[e->name] = a;
                    parts.push_back(boolean(e->args[0], inner));
                }
                return e->truth ? RExpr::conj(std::move(parts)) : RExpr::disj(std::move(parts));
            }
            case ExprKind::Skel: {
                if (c.mode != Mode::Protocol || c.in_knows) fail(e->pos, "scope", "skeleton variable outside a protocol program");
                auto idx = m_.find_skeleton(e->name);
                if (!idx) fail(e->pos, "unknown-name", "unknown skeleton variable '" + e->name + "'");
                if (m_.skeleton_vars[*idx].agent != m_.agents[c.agent].name) {
                    fail(e->pos, "scope", "skeleton variable '" + e->name + "' belongs to another agent");
                }
                return {RExpr::Kind::Skel, *idx, 0, {}};
            }
        }
        fail(e->pos, "internal", "unhandled expression");
    }

    Term term(const ExprPtr& e, Ctx& c) const {
        Term t;
        t.pos = e->pos;
        switch (e->kind) {
            case ExprKind::Int: t.int_literal = e->number; return t;
            case ExprKind::Bool:
                t.expr = RExpr::constant(e->truth ? 1 : 0);
                t.dom = Domain{};
                return t;
            case ExprKind::Name: {
                if (c.bound.count(e->name)) fail(e->pos, "type", "bound variable '" + e->name + "' used as a value");
                if (auto v = lookup(e->name, e->pos, c)) {
                    t.expr = RExpr::var(*v);
                    t.dom = m_.vars[*v].dom;
                    return t;
                }
                if (m_.label_domains.count(e->name)) {
                    t.label = e->name;
                    return t;
                }
                fail(e->pos, "unknown-name", "unknown name '" + e->name + "'");
            }
            case ExprKind::Index: {
                int v = indexed(e->name, e->sub, e->pos, c);
                t.expr = RExpr::var(v);
                t.dom = m_.vars[v].dom;
                return t;
            }
            case ExprKind::Member: {
                auto agent = m_.find_agent(e->name);
                if (!agent) fail(e->pos, "unknown-name", "unknown agent '" + e->name + "'");
                if (c.mode == Mode::Tau) {
                    auto act = m_.find_action(e->sub);
                    if (!act) fail(e->pos, "unknown-name", "unknown action '" + e->sub + "'");
                    t.expr = {RExpr::Kind::Act, *agent, *act, {}};
                    t.dom = Domain{};
                    return t;
                }
                if (c.mode == Mode::Global) {
                    const auto& ag = m_.agents[*agent];
                    auto it = ag.scope.find(e->sub);
                    if (it != ag.scope.end() && m_.vars[it->second].agent == *agent) {
                        t.expr = RExpr::var(it->second);
                        t.dom = m_.vars[it->second].dom;
                        return t;
                    }
                    fail(e->pos, "unknown-name", "agent '" + e->name + "' has no local variable '" + e->sub + "'");
                }
                fail(e->pos, "scope", "dotted reference '" + print(e) + "' is not allowed here");
            }
            default:
                t.expr = boolean(e, c);
                t.dom = Domain{};
                return t;
        }
    }

    // Converts a bare literal to a code of `d`.
    int literal_code(const Term& t, const Domain& d) const {
        if (t.int_literal) {
            if (d.kind != Domain::Kind::Range) fail(t.pos, "type", "integer compared with a non-numeric value");
            int code = *t.int_literal - d.lo;
            if (code < 0 || code >= d.size) fail(t.pos, "type", "constant " + std::to_string(*t.int_literal) + " out of range");
            return code;
        }
        if (d.kind != Domain::Kind::Enum) fail(t.pos, "type", "label '" + *t.label + "' compared with a non-enumerated value");
        auto it = std::find(d.labels.begin(), d.labels.end(), *t.label);
        if (it == d.labels.end()) fail(t.pos, "type", "label '" + *t.label + "' is not a value of this type");
        return static_cast<int>(it - d.labels.begin());
    }

    RExpr equality(const ExprPtr& e, Ctx& c) const {
        Term x = term(e->args[0], c);
        Term y = term(e->args[1], c);
        if (x.dom && y.dom) {
            if (!(*x.dom == *y.dom)) fail(e->pos, "type", "'==' between values of different types");
            return RExpr::equals(std::move(x.expr), std::move(y.expr));
        }
        if (x.dom) return RExpr::equals(std::move(x.expr), RExpr::constant(literal_code(y, *x.dom)));
        if (y.dom) return RExpr::equals(RExpr::constant(literal_code(x, *y.dom)), std::move(y.expr));
        if (x.int_literal && y.int_literal) return RExpr::constant(*x.int_literal == *y.int_literal);
        if (x.label && y.label) {
            if (!(m_.label_domains.at(*x.label) == m_.label_domains.at(*y.label))) {
                fail(e->pos, "type", "'==' between labels of different types");
            }
            return RExpr::constant(*x.label == *y.label);
        }
        fail(e->pos, "type", "'==' between an integer and a label");
    }

    /// Resolves an assignment source against the target's domain.
    RExpr value_for(const Domain& d, const ExprPtr& e, Ctx& c) const {
        if (d.kind == Domain::Kind::Bool) return boolean(e, c);
        Term t = term(e, c);
        if (t.dom) {
            if (!(*t.dom == d)) fail(e->pos, "type", "assigned value has the wrong type");
            return std::move(t.expr);
        }
        return RExpr::constant(literal_code(t, d));
    }

    int agent_ref(const std::string& who, Pos p, const Ctx& c) const {
        if (who == "Self") {
            if (c.agent < 0) fail(p, "scope", "'Self' outside a protocol");
            return c.agent;
        }
        if (auto it = c.bound.find(who); it != c.bound.end()) return it->second;
        if (auto a = m_.find_agent(who)) return *a;
        fail(p, "unknown-name", "unknown agent '" + who + "'");
    }

    // Variable named by a plain identifier, or nullopt if it names no variable.
    std::optional<int> lookup(const std::string& n, Pos p, const Ctx& c) const {
        if ((c.mode == Mode::Protocol || c.mode == Mode::ProtocolInit) && c.agent >= 0) {
            const auto& ag = m_.agents[c.agent];
            if (auto it = ag.scope.find(n); it != ag.scope.end()) {
                if (c.mode == Mode::ProtocolInit && m_.vars[it->second].agent != c.agent) {
                    fail(p, "init-scope", "initial condition of protocol reads parameter '" + n + "'");
                }
                return it->second;
            }
        }
        auto v = m_.find_var(n);
        if (!v || m_.vars[*v].agent >= 0) return std::nullopt;
        env_access(n, p, c);
        return v;
    }

    void env_access(const std::string& n, Pos p, const Ctx& c) const {
        switch (c.mode) {
            case Mode::Tau:
            case Mode::EnvInit:
            case Mode::Global: return;
            case Mode::ProtocolInit:
                fail(p, "init-scope", "initial condition of protocol reads environment variable '" + n + "'");
            case Mode::Protocol:
                if (c.in_knows) return;
                fail(p, "scope", "environment variable '" + n + "' read outside a knowledge operator; pass it as a parameter");
        }
    }

    int indexed(const std::string& arr, const std::string& idx, Pos p, const Ctx& c) const {
        int agent = agent_ref(idx, p, c);
        std::string n = arr + "[" + m_.agents[agent].name + "]";
        auto v = m_.find_var(n);
        if (!v) fail(p, "unknown-name", "unknown array '" + arr + "'");
        env_access(n, p, c);
        return *v;
    }

private:
    const CompiledModel& m_;
    std::vector<Diagnostic>& diags_;
};

class Elaborator {
public:
    Elaborator(const ast::Model& src, std::span<const SkeletonVar> skel, std::vector<Diagnostic>& diags)
        : diags_(diags), r_(out_, diags) {
        out_.source = src;
        out_.skeleton_vars.assign(skel.begin(), skel.end());
    }

    CompiledModel run() {
        const ast::Model& m = out_.source;
        declare_agents(m);
        declare_types(m);
        declare_env(m);
        declare_locals(m);
        collect_actions(m);
        guard([&] {
            Ctx c;
            c.mode = Mode::EnvInit;
            out_.init_env = m.init ? r_.boolean(m.init, c) : RExpr::constant(1);
        });
        for (int a = 0; a < static_cast<int>(out_.agents.size()); ++a) agent_init(a);
        for (const auto& st : m.transitions) out_.tau.push_back(statement(st, -1));
        for (int a = 0; a < static_cast<int>(out_.agents.size()); ++a) agent_program(a);
        for (auto& ag : out_.agents) ag.program.resize(static_cast<std::size_t>(out_.length));
        check_skeleton();
        return std::move(out_);
    }

private:
    template <class F>
    void guard(F&& f) {
        try {
            f();
        } catch (const Bail&) {
        }
    }

    void diag(Pos p, const std::string& rule, const std::string& msg) { diags_.push_back({p, rule, msg}); }

    void declare_agents(const ast::Model& m) {
        for (const auto& a : m.agents) {
            CAgent ag;
            ag.name = a.name;
            ag.protocol = a.protocol;
            out_.agents.push_back(std::move(ag));
        }
    }

    void add_label(const std::string& l, const Domain& d, Pos p) {
        auto [it, fresh] = out_.label_domains.emplace(l, d);
        if (!fresh && !(it->second == d)) diag(p, "label-clash", "label '" + l + "' belongs to two different types");
    }

    void declare_types(const ast::Model& m) {
        auto labels_of = [&](const ast::TypeRef& t, Pos p) {
            if (t.kind == ast::TypeRef::Kind::Enum) {
                Domain d;
                guard([&] { d = r_.domain_of(t, p); });
                for (const auto& l : t.labels) add_label(l, d, p);
            }
        };
        for (const auto& t : m.types) {
            if (t.name == "Agent") {
                diag(t.pos, "reserved", "'Agent' is the built-in agent type");
                continue;
            }
            guard([&] { out_.type_aliases[t.name] = r_.domain_of(t.type, t.pos); });
            labels_of(t.type, t.pos);
        }
        for (const auto& v : m.env_vars) labels_of(v.type, v.pos);
        for (const auto& p : m.protocols) {
            for (const auto& d : p.params) labels_of(d.type, d.pos);
            for (const auto& d : p.locals) labels_of(d.type, d.pos);
        }
    }

    void declare_env(const ast::Model& m) {
        for (const auto& d : m.env_vars) {
            Domain dom;
            bool ok = true;
            guard([&] { dom = r_.domain_of(d.type, d.pos); });
            if (out_.label_domains.count(d.name)) {
                diag(d.pos, "label-clash", "variable '" + d.name + "' has the name of an enumeration label");
                ok = false;
            }
            if (!ok) continue;
            auto add = [&](std::string n) {
                out_.env_vars.push_back(static_cast<int>(out_.vars.size()));
                out_.vars.push_back({std::move(n), dom, -1, -1});
            };
            if (d.per_agent) {
                for (const auto& a : out_.agents) add(d.name + "[" + a.name + "]");
            } else {
                add(d.name);
            }
        }
    }

    static int history_suffix(const std::string& n) {
        auto at = n.rfind('@');
        if (at == std::string::npos) return -1;
        return std::stoi(n.substr(at + 1));
    }

    void declare_locals(const ast::Model& m) {
        for (int ai = 0; ai < static_cast<int>(out_.agents.size()); ++ai) {
            const ast::AgentDecl& decl = m.agents[ai];
            CAgent& ag = out_.agents[ai];
            const ast::ProtocolDecl* p = m.find_protocol(decl.protocol);
            if (!p) {
                diag(decl.pos, "unknown-name", "agent '" + decl.name + "' uses undeclared protocol \"" + decl.protocol + "\"");
                continue;
            }
            if (p->params.size() != decl.args.size()) {
                diag(decl.pos, "arity", "protocol \"" + p->name + "\" takes " + std::to_string(p->params.size()) +
                                            " parameters, agent '" + decl.name + "' passes " +
                                            std::to_string(decl.args.size()));
            }
            for (std::size_t k = 0; k < std::min(p->params.size(), decl.args.size()); ++k) {
                const auto& par = p->params[k];
                const auto& arg = decl.args[k];
                guard([&] {
                    if (par.per_agent) r_.fail(par.pos, "type", "parameters cannot be arrays");
                    Domain want = r_.domain_of(par.type, par.pos);
                    Ctx c;
                    c.mode = Mode::Global;
                    int v = 0;
                    if (arg.index.empty()) {
                        auto found = out_.find_var(arg.name);
                        if (!found || out_.vars[*found].agent >= 0) {
                            r_.fail(arg.pos, "unknown-name", "unknown environment variable '" + arg.name + "'");
                        }
                        v = *found;
                    } else {
                        if (arg.index == "Self") r_.fail(arg.pos, "scope", "'Self' in an agent declaration");
                        v = r_.indexed(arg.name, arg.index, arg.pos, c);
                    }
                    if (!(out_.vars[v].dom == want)) {
                        r_.fail(arg.pos, "type", "argument '" + out_.vars[v].name + "' does not match the type of parameter '" + par.name + "'");
                    }
                    ag.scope[par.name] = v;
                    if (par.observable) {
                        ag.observables.push_back(v);
                        ag.names.emplace(v, par.name);
                    }
                });
            }
            for (const auto& loc : p->locals) {
                guard([&] {
                    if (loc.per_agent) r_.fail(loc.pos, "type", "local variables cannot be arrays");
                    if (out_.label_domains.count(loc.name)) {
                        r_.fail(loc.pos, "label-clash", "local '" + loc.name + "' has the name of an enumeration label");
                    }
                    Domain dom = r_.domain_of(loc.type, loc.pos);
                    int v = static_cast<int>(out_.vars.size());
                    out_.vars.push_back({ag.name + "." + loc.name, dom, ai, history_suffix(loc.name)});
                    ag.scope[loc.name] = v;
                    ag.locals.push_back(v);
                    ag.names[v] = loc.name;
                    if (loc.observable) ag.observables.push_back(v);
                });
            }
            std::sort(ag.observables.begin(), ag.observables.end());
            ag.observables.erase(std::unique(ag.observables.begin(), ag.observables.end()), ag.observables.end());
        }
    }

    void collect_actions(const ast::Model& m) {
        std::set<std::string> seen;
        auto note = [&](const ast::Atomic& a) {
            if (a.action && seen.insert(*a.action).second) out_.actions.push_back(*a.action);
        };
        for (const auto& agent : m.agents) {
            const ast::ProtocolDecl* p = m.find_protocol(agent.protocol);
            if (!p) continue;
            for (const auto& st : p->body) {
                if (!st.branch) note(st.atomic);
                for (const auto& arm : st.arms) note(arm.body);
            }
        }
    }

    void agent_init(int a) {
        const ast::ProtocolDecl* p = out_.source.find_protocol(out_.agents[a].protocol);
        out_.agents[a].init = RExpr::constant(1);
        if (!p || !p->init) return;
        guard([&] {
            Ctx c;
            c.mode = Mode::ProtocolInit;
            c.agent = a;
            out_.agents[a].init = r_.boolean(p->init, c);
        });
    }

    CAtomic atomic(const ast::Atomic& at, int agent) {
        CAtomic out;
        if (at.action) {
            if (agent < 0) {
                diag(at.pos, "tau-action", "the environment program cannot emit actions");
            } else {
                out.action = *out_.find_action(*at.action);
            }
        }
        std::set<int> targets;
        for (const auto& as : at.assigns) {
            guard([&] {
                int v = target(as.target, agent);
                if (!targets.insert(v).second) {
                    r_.fail(as.pos, "duplicate-assignment", "'" + out_.vars[v].name + "' assigned twice in one atomic statement");
                }
                Ctx c;
                c.mode = agent < 0 ? Mode::Tau : Mode::Protocol;
                c.agent = agent;
                out.assigns.push_back({v, r_.value_for(out_.vars[v].dom, as.value, c)});
            });
        }
        return out;
    }

    int target(const ast::LValue& lv, int agent) {
        if (agent < 0) {
            int v = 0;
            if (lv.index.empty()) {
                auto found = out_.find_var(lv.name);
                if (!found) r_.fail(lv.pos, "unknown-name", "unknown variable '" + lv.name + "'");
                v = *found;
            } else {
                Ctx c;
                c.mode = Mode::Tau;
                v = r_.indexed(lv.name, lv.index, lv.pos, c);
            }
            if (out_.vars[v].agent >= 0) r_.fail(lv.pos, "tau-target", "the environment program assigns a local variable");
            return v;
        }
        const CAgent& ag = out_.agents[agent];
        auto it = ag.scope.find(lv.name);
        if (!lv.index.empty() || it == ag.scope.end() || out_.vars[it->second].agent != agent) {
            r_.fail(lv.pos, "target", "protocol assigns '" + lv.name + (lv.index.empty() ? "" : "[" + lv.index + "]") +
                                          "', which is not one of its local variables");
        }
        return it->second;
    }

    CStatement statement(const ast::Statement& st, int agent) {
        CStatement out;
        out.branch = st.branch;
        if (!st.branch) {
            out.atomic = atomic(st.atomic, agent);
            return out;
        }
        std::vector<RExpr> previous;
        for (const auto& arm : st.arms) {
            CArm c;
            c.otherwise = arm.is_otherwise();
            if (c.otherwise) {
                c.guard = RExpr::negate(RExpr::disj(previous));
            } else {
                guard([&] {
                    Ctx ctx;
                    ctx.mode = agent < 0 ? Mode::Tau : Mode::Protocol;
                    ctx.agent = agent;
                    c.guard = r_.boolean(arm.guard, ctx);
                });
                previous.push_back(c.guard);
            }
            c.body = atomic(arm.body, agent);
            out.arms.push_back(std::move(c));
        }
        return out;
    }

    void agent_program(int a) {
        const ast::ProtocolDecl* p = out_.source.find_protocol(out_.agents[a].protocol);
        if (!p) return;
        for (const auto& st : p->body) {
            CStatement cs = statement(st, a);
            bool kb = false;
            auto mark = [&](const RExpr& e) { kb = kb || contains(e, RExpr::Kind::Knows); };
            for (const auto& arm : cs.arms) mark(arm.guard);
            for (const auto& as : cs.atomic.assigns) mark(as.value);
            for (const auto& arm : cs.arms)
                for (const auto& as : arm.body.assigns) mark(as.value);
            out_.knowledge_based = out_.knowledge_based || kb;
            out_.agents[a].program.push_back(std::move(cs));
        }
        out_.length = std::max(out_.length, static_cast<int>(p->body.size()));
    }

    void check_skeleton() {
        std::set<std::string> ids;
        for (const auto& sv : out_.skeleton_vars) {
            if (!ids.insert(sv.id).second) diag({}, "skeleton", "duplicate skeleton variable '" + sv.id + "'");
            auto agent = out_.find_agent(sv.agent);
            if (!agent) {
                diag(sv.formula ? sv.formula->pos : Pos{}, "skeleton", "skeleton variable of unknown agent '" + sv.agent + "'");
                continue;
            }
            guard([&] {
                Ctx c;
                c.mode = Mode::Protocol;
                c.agent = *agent;
                RExpr f = r_.boolean(sv.formula, c);
                std::vector<int> fv;
                free_vars(f, fv);
                const auto& obs = out_.agents[*agent].observables;
                for (int v : fv) {
                    if (!std::binary_search(obs.begin(), obs.end(), v)) {
                        r_.fail(sv.formula->pos, "skeleton", "condition '" + print(sv.formula) + "' reads non-observable '" +
                                                                 out_.vars[v].name + "' outside a knowledge operator");
                    }
                }
            });
        }
    }

    CompiledModel out_;
    std::vector<Diagnostic>& diags_;
    Resolver r_;
};

}  // namespace

std::optional<int> CompiledModel::find_var(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> CompiledModel::find_agent(const std::string& name) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> CompiledModel::find_action(const std::string& name) const {
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (actions[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> CompiledModel::find_skeleton(const std::string& id) const {
    for (std::size_t i = 0; i < skeleton_vars.size(); ++i)
        if (skeleton_vars[i].id == id) return static_cast<int>(i);
    return std::nullopt;
}

RExpr CompiledModel::resolve_global(const ast::ExprPtr& e) const {
    std::vector<Diagnostic> diags;
    Resolver r(*this, diags);
    Ctx c;
    c.mode = Mode::Global;
    try {
        return r.boolean(e, c);
    } catch (const Bail&) {
        throw ValidationError(std::move(diags));
    }
}

RExpr CompiledModel::resolve_observable(int agent, const ast::ExprPtr& e) const {
    std::vector<Diagnostic> diags;
    Resolver r(*this, diags);
    Ctx c;
    c.mode = Mode::Protocol;
    c.agent = agent;
    try {
        if (ast::contains_knows(*e) || ast::contains_skel(*e)) {
            r.fail(e->pos, "observability", "condition '" + print(e) + "' is not a standard expression");
        }
        RExpr out = r.boolean(e, c);
        std::vector<int> fv;
        free_vars(out, fv);
        const auto& obs = agents[agent].observables;
        for (int v : fv) {
            if (!std::binary_search(obs.begin(), obs.end(), v)) {
                r.fail(e->pos, "observability", "condition '" + print(e) + "' reads '" + vars[v].name +
                                                    "', which agent " + agents[agent].name + " cannot observe");
            }
        }
        return out;
    } catch (const Bail&) {
        throw ValidationError(std::move(diags));
    }
}

RExpr CompiledModel::resolve_skeleton(const SkeletonVar& v) const {
    std::vector<Diagnostic> diags;
    Resolver r(*this, diags);
    Ctx c;
    c.mode = Mode::Protocol;
    auto a = find_agent(v.agent);
    if (!a) throw ValidationError({{{}, "skeleton", "unknown agent '" + v.agent + "'"}});
    c.agent = *a;
    try {
        return r.boolean(v.formula, c);
    } catch (const Bail&) {
        throw ValidationError(std::move(diags));
    }
}

int CompiledModel::state_bits() const {
    int n = 0;
    for (const auto& v : vars) n += v.dom.bits();
    return n;
}

RExpr CompiledModel::initial_condition() const {
    std::vector<RExpr> parts{init_env};
    for (const auto& a : agents) parts.push_back(a.init);
    return RExpr::conj(std::move(parts));
}

ValidationReport validate(const ast::Model& m, std::span<const SkeletonVar> skeleton_vars) {
    ValidationReport report;
    Elaborator(m, skeleton_vars, report.diagnostics).run();
    return report;
}

CompiledModel compile(const ast::Model& m, std::span<const SkeletonVar> skeleton_vars) {
    std::vector<Diagnostic> diags;
    CompiledModel out = Elaborator(m, skeleton_vars, diags).run();
    if (!diags.empty()) throw ValidationError(std::move(diags));
    return out;
}

}  // namespace kbp
