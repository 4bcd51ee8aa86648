#include "kbp/printer.hpp"

#include <sstream>

namespace kbp {

using ast::ExprKind;

namespace {

// Binding strength, loosest first.  Operands printed below their required
// level are parenthesized.
enum Level { kOr = 1, kAnd = 2, kUnary = 3, kEq = 4, kPrimary = 5 };

int level(const ast::Expr& e) {
    switch (e.kind) {
        case ExprKind::Or: return kOr;
        case ExprKind::And: return kAnd;
        case ExprKind::Not:
        case ExprKind::Knows:
        case ExprKind::Next:
        case ExprKind::Quant: return kUnary;
        case ExprKind::Eq: return kEq;
        default: return kPrimary;
    }
}

void render(std::ostream& os, const ast::Expr& e, int min_level);

void operand(std::ostream& os, const ast::ExprPtr& e, int min_level) {
    if (level(*e) < min_level) {
        os << '(';
        render(os, *e, 0);
        os << ')';
    } else {
        render(os, *e, min_level);
    }
}

void render(std::ostream& os, const ast::Expr& e, int) {
    switch (e.kind) {
        case ExprKind::Bool: os << (e.truth ? "true" : "false"); break;
        case ExprKind::Int: os << e.number; break;
        case ExprKind::Name:
        case ExprKind::Skel: os << e.name; break;
        case ExprKind::Index: os << e.name << '[' << e.sub << ']'; break;
        case ExprKind::Member: os << e.name << '.' << e.sub; break;
        case ExprKind::Not:
            os << "neg ";
            operand(os, e.args[0], kUnary);
            break;
        case ExprKind::And:
            operand(os, e.args[0], kAnd);
            os << " /\\ ";
            operand(os, e.args[1], kUnary);
            break;
        case ExprKind::Or:
            operand(os, e.args[0], kOr);
            os << " \\/ ";
            operand(os, e.args[1], kAnd);
            break;
        case ExprKind::Eq:
            operand(os, e.args[0], kPrimary);
            os << " == ";
            operand(os, e.args[1], kPrimary);
            break;
        case ExprKind::Knows:
            os << "Knows " << e.name << ' ';
            operand(os, e.args[0], kUnary);
            break;
        case ExprKind::Next:
            os << 'X';
            if (e.number != 1) os << '^' << e.number;
            os << ' ';
            operand(os, e.args[0], kUnary);
            break;
        case ExprKind::Quant:
            os << (e.truth ? "Forall " : "Exists ") << e.name << " : " << e.sub << " (";
            render(os, *e.args[0], 0);
            os << ')';
            break;
    }
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

std::string lvalue(const ast::LValue& lv) { return lv.index.empty() ? lv.name : lv.name + "[" + lv.index + "]"; }

std::string decl(const ast::VarDecl& d) {
    std::string s = d.name + " : ";
    if (d.observable) s += "observable ";
    s += print(d.type);
    if (d.per_agent) s += "[Agent]";
    return s;
}

}  // namespace

std::string print(const ast::ExprPtr& e) {
    if (!e) return "true";
    std::ostringstream os;
    render(os, *e, 0);
    return os.str();
}

std::string print(const ast::TypeRef& t) {
    switch (t.kind) {
        case ast::TypeRef::Kind::Bool: return "Bool";
        case ast::TypeRef::Kind::Range: return std::to_string(t.lo) + ".." + std::to_string(t.hi);
        case ast::TypeRef::Kind::Named: return t.name;
        case ast::TypeRef::Kind::Enum: {
            std::string s = "{";
            for (std::size_t i = 0; i < t.labels.size(); ++i) s += (i ? ", " : "") + t.labels[i];
            return s + "}";
        }
    }
    return "?";
}

std::string print(const ast::Atomic& a) {
    if (a.is_skip()) return "skip";
    if (!a.action && a.assigns.size() == 1) return lvalue(a.assigns[0].target) + " := " + print(a.assigns[0].value);
    std::string s = "<< ";
    if (a.action) s += *a.action + " ";
    if (!a.assigns.empty()) {
        s += "| ";
        for (std::size_t i = 0; i < a.assigns.size(); ++i) {
            if (i) s += ", ";
            s += lvalue(a.assigns[i].target) + " := " + print(a.assigns[i].value);
        }
        s += " ";
    }
    return s + ">>";
}

std::string print(const ast::Statement& s, int indent) {
    if (!s.branch) return pad(indent) + print(s.atomic);
    std::string out;
    for (std::size_t i = 0; i < s.arms.size(); ++i) {
        const auto& arm = s.arms[i];
        out += pad(indent) + (i == 0 ? "if " : "[] ");
        out += arm.is_otherwise() ? std::string("otherwise") : print(arm.guard);
        out += " -> " + print(arm.body);
        out += i + 1 == s.arms.size() ? " fi" : "\n";
    }
    return out;
}

std::string print(const ast::Program& p, int indent) {
    std::string out = "begin\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += print(p[i], indent + 1);
        out += i + 1 < p.size() ? ";\n" : "\n";
    }
    return out + "end\n";
}

std::string print(const ast::ProtocolDecl& p) {
    std::string out = "protocol \"" + p.name + "\" (";
    for (std::size_t i = 0; i < p.params.size(); ++i) out += (i ? ", " : "") + decl(p.params[i]);
    out += ")\n";
    for (const auto& l : p.locals) out += decl(l) + "\n";
    if (p.init) out += "init_cond = " + print(p.init) + "\n";
    return out + print(p.body, 0);
}

std::string print(const ast::Model& m) {
    std::string out;
    for (const auto& t : m.types) out += "type " + t.name + " = " + print(t.type) + "\n";
    if (!m.types.empty()) out += "\n";
    for (const auto& v : m.env_vars) out += decl(v) + "\n";
    if (!m.env_vars.empty()) out += "\n";
    if (m.init) out += "init_cond = " + print(m.init) + "\n\n";
    for (const auto& a : m.agents) {
        out += "agent " + a.name + " \"" + a.protocol + "\" (";
        for (std::size_t i = 0; i < a.args.size(); ++i) out += (i ? ", " : "") + lvalue(a.args[i]);
        out += ")\n";
    }
    if (!m.agents.empty()) out += "\n";
    out += "transitions\n" + print(m.transitions, 0);
    for (const auto& p : m.protocols) out += "\n" + print(p);
    return out;
}

}  // namespace kbp
