#include "kbp/ast.hpp"

#include <algorithm>

namespace kbp::ast {

namespace {

ExprPtr make(ExprKind k, Pos p, std::vector<ExprPtr> args = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->pos = p;
    e->args = std::move(args);
    return e;
}

bool any_node(const Expr& e, ExprKind k) {
    if (e.kind == k) return true;
    return std::any_of(e.args.begin(), e.args.end(), [k](const ExprPtr& a) { return any_node(*a, k); });
}

}  // namespace

ExprPtr Expr::boolean(bool b, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Bool;
    e->truth = b;
    e->pos = p;
    return e;
}

ExprPtr Expr::integer(int v, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Int;
    e->number = v;
    e->pos = p;
    return e;
}

ExprPtr Expr::ident(std::string n, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Name;
    e->name = std::move(n);
    e->pos = p;
    return e;
}

ExprPtr Expr::index(std::string array, std::string idx, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Index;
    e->name = std::move(array);
    e->sub = std::move(idx);
    e->pos = p;
    return e;
}

ExprPtr Expr::member(std::string agent, std::string action, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Member;
    e->name = std::move(agent);
    e->sub = std::move(action);
    e->pos = p;
    return e;
}

ExprPtr Expr::negate(ExprPtr a, Pos p) { return make(ExprKind::Not, p, {std::move(a)}); }
ExprPtr Expr::conj(ExprPtr a, ExprPtr b, Pos p) { return make(ExprKind::And, p, {std::move(a), std::move(b)}); }
ExprPtr Expr::disj(ExprPtr a, ExprPtr b, Pos p) { return make(ExprKind::Or, p, {std::move(a), std::move(b)}); }
ExprPtr Expr::equals(ExprPtr a, ExprPtr b, Pos p) { return make(ExprKind::Eq, p, {std::move(a), std::move(b)}); }

ExprPtr Expr::knows(std::string who, ExprPtr body, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Knows;
    e->name = std::move(who);
    e->args = {std::move(body)};
    e->pos = p;
    return e;
}

ExprPtr Expr::next(int steps, ExprPtr body, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Next;
    e->number = steps;
    e->args = {std::move(body)};
    e->pos = p;
    return e;
}

ExprPtr Expr::quant(bool forall, std::string var, std::string type, ExprPtr body, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Quant;
    e->truth = forall;
    e->name = std::move(var);
    e->sub = std::move(type);
    e->args = {std::move(body)};
    e->pos = p;
    return e;
}

ExprPtr Expr::skel(std::string id, Pos p) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Skel;
    e->name = std::move(id);
    e->pos = p;
    return e;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->truth != b->truth || a->number != b->number || a->name != b->name ||
        a->sub != b->sub || a->args.size() != b->args.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!equal(a->args[i], b->args[i])) return false;
    }
    return true;
}

bool contains_knows(const Expr& e) { return any_node(e, ExprKind::Knows); }
bool contains_next(const Expr& e) { return any_node(e, ExprKind::Next); }
bool contains_skel(const Expr& e) { return any_node(e, ExprKind::Skel); }

ExprPtr conj_all(const std::vector<ExprPtr>& parts) {
    if (parts.empty()) return Expr::boolean(true);
    ExprPtr acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = Expr::conj(acc, parts[i]);
    return acc;
}

ExprPtr disj_all(const std::vector<ExprPtr>& parts) {
    if (parts.empty()) return Expr::boolean(false);
    ExprPtr acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = Expr::disj(acc, parts[i]);
    return acc;
}

const ProtocolDecl* Model::find_protocol(const std::string& n) const {
    for (const auto& p : protocols)
        if (p.name == n) return &p;
    return nullptr;
}

ProtocolDecl* Model::find_protocol(const std::string& n) {
    for (auto& p : protocols)
        if (p.name == n) return &p;
    return nullptr;
}

const AgentDecl* Model::find_agent(const std::string& n) const {
    for (const auto& a : agents)
        if (a.name == n) return &a;
    return nullptr;
}

void for_each_expr(const Program& p, const std::function<void(const ExprPtr&)>& visit) {
    auto atomic = [&](const Atomic& a) {
        for (const auto& as : a.assigns) visit(as.value);
    };
    for (const auto& st : p) {
        if (!st.branch) {
            atomic(st.atomic);
            continue;
        }
        for (const auto& arm : st.arms) {
            if (arm.guard) visit(arm.guard);
            atomic(arm.body);
        }
    }
}

bool Model::knowledge_based() const {
    bool found = false;
    for (const auto& p : protocols) {
        for_each_expr(p.body, [&](const ExprPtr& e) { found = found || contains_knows(*e); });
    }
    return found;
}

bool equal(const Atomic& a, const Atomic& b) {
    if (a.action != b.action || a.assigns.size() != b.assigns.size()) return false;
    for (std::size_t i = 0; i < a.assigns.size(); ++i) {
        if (!(a.assigns[i].target == b.assigns[i].target) || !equal(a.assigns[i].value, b.assigns[i].value)) {
            return false;
        }
    }
    return true;
}

bool equal(const Statement& a, const Statement& b) {
    if (a.branch != b.branch) return false;
    if (!a.branch) return equal(a.atomic, b.atomic);
    if (a.arms.size() != b.arms.size()) return false;
    for (std::size_t i = 0; i < a.arms.size(); ++i) {
        if (!equal(a.arms[i].guard, b.arms[i].guard) || !equal(a.arms[i].body, b.arms[i].body)) return false;
    }
    return true;
}

bool equal(const Program& a, const Program& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}

bool equal(const VarDecl& a, const VarDecl& b) {
    return a.name == b.name && a.type == b.type && a.per_agent == b.per_agent && a.observable == b.observable;
}

namespace {
bool equal_decls(const std::vector<VarDecl>& a, const std::vector<VarDecl>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}
}  // namespace

bool equal(const ProtocolDecl& a, const ProtocolDecl& b) {
    return a.name == b.name && equal_decls(a.params, b.params) && equal_decls(a.locals, b.locals) &&
           equal(a.init, b.init) && equal(a.body, b.body);
}

bool equal(const Model& a, const Model& b) {
    if (a.types.size() != b.types.size() || a.agents.size() != b.agents.size() ||
        a.protocols.size() != b.protocols.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.types.size(); ++i)
        if (a.types[i].name != b.types[i].name || !(a.types[i].type == b.types[i].type)) return false;
    if (!equal_decls(a.env_vars, b.env_vars) || !equal(a.init, b.init)) return false;
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
        if (a.agents[i].name != b.agents[i].name || a.agents[i].protocol != b.agents[i].protocol ||
            a.agents[i].args != b.agents[i].args) {
            return false;
        }
    }
    if (!equal(a.transitions, b.transitions)) return false;
    for (std::size_t i = 0; i < a.protocols.size(); ++i)
        if (!equal(a.protocols[i], b.protocols[i])) return false;
    return true;
}

}  // namespace kbp::ast
