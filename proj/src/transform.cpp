#include "kbp/transform.hpp"

#include <cstdio>
#include <set>

#include "kbp/errors.hpp"
#include "kbp/model.hpp"
#include "kbp/printer.hpp"

namespace kbp {

using ast::Expr;
using ast::ExprKind;
using ast::ExprPtr;

namespace {

std::uint32_t fnv1a(const std::string& s) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::string hex8(std::uint32_t h) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", h);
    return buf;
}

ExprPtr with_args(const ExprPtr& e, std::vector<ExprPtr> args) {
    auto copy = std::make_shared<Expr>(*e);
    copy->args = std::move(args);
    return copy;
}

/// Rebuilds `e` bottom-up through `f`, which sees nodes with rewritten children.
ExprPtr map_expr(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& f) {
    if (!e) return e;
    if (e->args.empty()) return f(e);
    std::vector<ExprPtr> args;
    bool changed = false;
    for (const auto& a : e->args) {
        args.push_back(map_expr(a, f));
        changed = changed || args.back() != a;
    }
    return f(changed ? with_args(e, std::move(args)) : e);
}

/// Replaces a bound agent variable by an agent name.
ExprPtr bind_agent(const ExprPtr& e, const std::string& var, const std::string& agent) {
    if (e->kind == ExprKind::Quant && e->name == var) return e;  // shadowed
    auto copy = std::make_shared<Expr>(*e);
    if ((e->kind == ExprKind::Index && e->sub == var)) copy->sub = agent;
    if (e->kind == ExprKind::Knows && e->name == var) copy->name = agent;
    for (auto& a : copy->args) a = bind_agent(a, var, agent);
    return copy;
}

void map_program(ast::Program& p, const std::function<ExprPtr(const ExprPtr&, int)>& f) {
    for (std::size_t t = 0; t < p.size(); ++t) {
        auto& st = p[t];
        auto atomic = [&](ast::Atomic& a) {
            for (auto& as : a.assigns) as.value = f(as.value, static_cast<int>(t));
        };
        if (!st.branch) {
            atomic(st.atomic);
            continue;
        }
        for (auto& arm : st.arms) {
            if (arm.guard) arm.guard = f(arm.guard, static_cast<int>(t));
            atomic(arm.body);
        }
    }
}

// Skeleton references already present in `m`, each standing for an opaque condition.
std::vector<SkeletonVar> existing_skeleton_vars(const ast::Model& m) {
    std::vector<SkeletonVar> out;
    std::set<std::string> seen;
    for (const auto& a : m.agents) {
        const ast::ProtocolDecl* p = m.find_protocol(a.protocol);
        if (!p) continue;
        ast::Program body = p->body;
        map_program(body, [&](const ExprPtr& e, int t) {
            return map_expr(e, [&](const ExprPtr& n) {
                if (n->kind == ExprKind::Skel && seen.insert(n->name).second)
                    out.push_back({n->name, a.name, t, Expr::boolean(true)});
                return n;
            });
        });
    }
    return out;
}

void throw_if_invalid(const ast::Model& m) {
    ValidationReport r = validate(m, existing_skeleton_vars(m));
    if (!r.ok()) throw ValidationError(r.diagnostics);
}

class SkeletonBuilder {
public:
    SkeletonBuilder(const ast::ProtocolDecl& p, std::string agent, std::vector<std::string> agents,
                    std::vector<SkeletonVar>& out)
        : agent_(std::move(agent)), agents_(std::move(agents)), out_(out) {
        for (const auto& d : p.params)
            if (!d.observable) hidden_.insert(d.name);
        for (const auto& d : p.locals)
            if (!d.observable) hidden_.insert(d.name);
    }

    ExprPtr rewrite(const ExprPtr& e, int time) {
        if (!ast::contains_knows(*e)) return e;
        if (e->kind == ExprKind::Not) return Expr::negate(rewrite(e->args[0], time), e->pos);
        if (coverable(*e, false)) return Expr::skel(make_var(e, time), e->pos);
        if (e->kind == ExprKind::Quant) {
            std::vector<ExprPtr> parts;
            for (const auto& a : agents_) parts.push_back(rewrite(bind_agent(e->args[0], e->name, a), time));
            return e->truth ? ast::conj_all(parts) : ast::disj_all(parts);
        }
        std::vector<ExprPtr> args;
        for (const auto& a : e->args) args.push_back(rewrite(a, time));
        return with_args(e, std::move(args));
    }

private:
    // No hidden variable outside knowledge scopes.
    bool coverable(const Expr& e, bool in_knows) const {
        if (e.kind == ExprKind::Knows) return true;
        if (!in_knows && e.kind == ExprKind::Name && hidden_.count(e.name)) return false;
        for (const auto& a : e.args)
            if (!coverable(*a, in_knows)) return false;
        return true;
    }

    // Every outermost knowledge operator must be the agent's own.
    void check_shape(const Expr& e) const {
        if (e.kind == ExprKind::Knows) {
            if (e.name != "Self" && e.name != agent_) {
                throw ValidationError({{e.pos, "shape",
                                        "condition of agent " + agent_ + " depends on what " + e.name +
                                            " knows; only the agent's own knowledge can be implemented"}});
            }
            return;
        }
        for (const auto& a : e.args) check_shape(*a);
    }

    std::string make_var(const ExprPtr& f, int time) {
        check_shape(*f);
        std::string text = canonical_text(f);
        std::string id = "k_" + agent_ + "_" + std::to_string(time) + "_" + hex8(fnv1a(text));
        for (const auto& v : out_) {
            if (v.id != id) continue;
            if (canonical_text(v.formula) != text) {
                throw ValidationError({{f->pos, "skeleton", "identifier collision between '" + text + "' and '" +
                                                                 canonical_text(v.formula) + "'"}});
            }
            return id;
        }
        out_.push_back({id, agent_, time, f});
        return id;
    }

    std::string agent_;
    std::vector<std::string> agents_;
    std::set<std::string> hidden_;
    std::vector<SkeletonVar>& out_;
};

ExprPtr default_value(const ast::Model& m, const ast::TypeRef& t) {
    switch (t.kind) {
        case ast::TypeRef::Kind::Bool: return Expr::boolean(false);
        case ast::TypeRef::Kind::Range: return Expr::integer(t.lo);
        case ast::TypeRef::Kind::Enum: return Expr::ident(t.labels.front());
        case ast::TypeRef::Kind::Named:
            for (const auto& d : m.types)
                if (d.name == t.name) return default_value(m, d.type);
            throw ValidationError({{{}, "unknown-name", "unknown type '" + t.name + "'"}});
    }
    return nullptr;
}

}  // namespace

std::string canonical_text(const ast::ExprPtr& e) { return print(e); }

int joint_length(const ast::Model& m) {
    int n = 0;
    for (const auto& a : m.agents)
        if (const auto* p = m.find_protocol(a.protocol)) n = std::max(n, static_cast<int>(p->body.size()));
    return n;
}

ast::Model specialize(const ast::Model& m) {
    ast::Model out = m;
    out.protocols.clear();
    const int len = joint_length(m);
    std::set<std::string> taken;
    for (const auto& p : m.protocols) taken.insert(p.name);
    for (auto& a : out.agents) {
        const ast::ProtocolDecl* p = m.find_protocol(a.protocol);
        if (!p) throw ValidationError({{a.pos, "unknown-name", "agent '" + a.name + "' uses undeclared protocol"}});
        ast::ProtocolDecl copy = *p;
        copy.name = p->name + "_" + a.name;
        if (taken.count(copy.name)) {
            throw ValidationError({{p->pos, "name-clash", "protocol \"" + copy.name + "\" already exists"}});
        }
        copy.body.resize(static_cast<std::size_t>(len));
        a.protocol = copy.name;
        out.protocols.push_back(std::move(copy));
    }
    return out;
}

ast::Model merge_protocols(const ast::Model& specialized, const ast::Model& original) {
    ast::Model out = specialized;
    out.protocols.clear();
    for (const auto& tmpl : original.protocols) {
        std::vector<std::size_t> users;
        for (std::size_t i = 0; i < original.agents.size(); ++i)
            if (original.agents[i].protocol == tmpl.name) users.push_back(i);
        if (users.empty()) {
            out.protocols.push_back(tmpl);
            continue;
        }
        const ast::ProtocolDecl* first = specialized.find_protocol(specialized.agents[users[0]].protocol);
        bool same = true;
        for (std::size_t u : users) {
            ast::ProtocolDecl p = *specialized.find_protocol(specialized.agents[u].protocol);
            p.name = first->name;
            same = same && ast::equal(p, *first);
        }
        if (same) {
            ast::ProtocolDecl merged = *first;
            merged.name = tmpl.name;
            // drop padding that the template did not have
            while (merged.body.size() > tmpl.body.size() && !merged.body.back().branch &&
                   merged.body.back().atomic.is_skip()) {
                merged.body.pop_back();
            }
            for (std::size_t u : users) out.agents[u].protocol = tmpl.name;
            out.protocols.push_back(std::move(merged));
        } else {
            for (std::size_t u : users) out.protocols.push_back(*specialized.find_protocol(specialized.agents[u].protocol));
        }
    }
    return out;
}

Skeleton skeleton(const ast::Model& m) {
    throw_if_invalid(m);
    Skeleton out;
    out.model = specialize(m);
    std::vector<std::string> agents;
    for (const auto& a : m.agents) agents.push_back(a.name);
    for (auto& a : out.model.agents) {
        ast::ProtocolDecl* p = out.model.find_protocol(a.protocol);
        SkeletonBuilder b(*p, a.name, agents, out.vars);
        map_program(p->body, [&](const ExprPtr& e, int t) { return b.rewrite(e, t); });
    }
    return out;
}

ast::Model history_transform(const ast::Model& m, int length) {
    ast::Model out = m;
    if (length <= 0) return out;
    for (auto& p : out.protocols) {
        std::vector<const ast::VarDecl*> observed;
        std::set<std::string> names;
        // history variables already present are records, not observations
        auto recorded = [](const ast::VarDecl& d) { return d.observable && d.name.find('@') == std::string::npos; };
        for (const auto& d : p.params) {
            names.insert(d.name);
            if (recorded(d)) observed.push_back(&d);
        }
        for (const auto& d : p.locals) {
            names.insert(d.name);
            if (recorded(d)) observed.push_back(&d);
        }
        std::vector<ast::VarDecl> added;
        std::vector<ExprPtr> init_parts;
        if (p.init) init_parts.push_back(p.init);
        for (int k = 0; k < length; ++k) {
            for (const auto* d : observed) {
                ast::VarDecl h;
                h.name = d->name + "@" + std::to_string(k);
                h.type = d->type;
                h.observable = true;
                h.pos = d->pos;
                if (names.count(h.name)) {
                    throw ValidationError({{d->pos, "history-collision", "protocol \"" + p.name + "\" already declares '" + h.name + "'"}});
                }
                init_parts.push_back(Expr::equals(Expr::ident(h.name), default_value(m, d->type)));
                added.push_back(std::move(h));
            }
        }
        if (observed.empty()) continue;
        p.body.resize(std::max(p.body.size(), static_cast<std::size_t>(length)));
        for (int k = 0; k < length; ++k) {
            std::vector<ast::Assign> record;
            for (const auto* d : observed) {
                ast::Assign as;
                as.target.name = d->name + "@" + std::to_string(k);
                as.value = Expr::ident(d->name);
                record.push_back(std::move(as));
            }
            auto extend = [&](ast::Atomic& a) { a.assigns.insert(a.assigns.end(), record.begin(), record.end()); };
            auto& st = p.body[static_cast<std::size_t>(k)];
            if (!st.branch) {
                extend(st.atomic);
                continue;
            }
            for (auto& arm : st.arms) extend(arm.body);
            if (!st.arms.back().is_otherwise()) {
                ast::Arm fallback;
                fallback.body.assigns = record;
                st.arms.push_back(std::move(fallback));
            }
        }
        // observed points into p's declarations; append only after the last use
        p.locals.insert(p.locals.end(), added.begin(), added.end());
        p.init = ast::conj_all(init_parts);
    }
    return out;
}

ast::Model with_perfect_recall(const ast::Model& m) {
    const int length = joint_length(m);
    for (const auto& p : m.protocols) {
        std::set<std::string> names;
        for (const auto& d : p.locals) names.insert(d.name);
        auto missing = [&](const ast::VarDecl& d) {
            if (!d.observable || d.name.find('@') != std::string::npos) return false;
            for (int k = 0; k < length; ++k)
                if (!names.count(d.name + "@" + std::to_string(k))) return true;
            return false;
        };
        for (const auto& d : p.params)
            if (missing(d)) return history_transform(m, length);
        for (const auto& d : p.locals)
            if (missing(d)) return history_transform(m, length);
    }
    return m;
}

ast::Model substitute(const ast::Model& skeleton_model, const Substitution& theta) {
    ast::Model out = skeleton_model;
    for (auto& p : out.protocols) {
        map_program(p.body, [&](const ExprPtr& e, int) {
            return map_expr(e, [&](const ExprPtr& n) -> ExprPtr {
                if (n->kind != ExprKind::Skel) return n;
                auto it = theta.find(n->name);
                if (it == theta.end()) throw UsageError("no binding for skeleton variable " + n->name);
                return it->second;
            });
        });
    }
    return out;
}

}  // namespace kbp
