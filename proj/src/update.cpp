#include "kbp/update.hpp"

#include <algorithm>
#include <map>
#include <functional>
#include <numeric>
#include <set>

#include "kbp/errors.hpp"
#include "kbp/parser.hpp"

namespace kbp::update {

using ast::ExprKind;
using ast::ExprPtr;

namespace {

using Bound = std::map<std::string, std::string>;

class Evaluator {
public:
    explicit Evaluator(const ExplicitModel& m) : m_(m) {
        members_.resize(m.agents.size());
        for (std::size_t i = 0; i < m.agents.size(); ++i)
            for (std::size_t w = 0; w < m.size(); ++w) members_[i][m.classes[i][w]].push_back(w);
    }

    std::vector<bool> eval(const ExprPtr& e, const Bound& bound) const {
        const std::size_t n = m_.size();
        switch (e->kind) {
            case ExprKind::Bool: return std::vector<bool>(n, e->truth);
            case ExprKind::Name: return atom(e->name, e);
            case ExprKind::Index: {
                auto it = bound.find(e->sub);
                return atom(e->name + "[" + (it == bound.end() ? e->sub : it->second) + "]", e);
            }
            case ExprKind::Not: {
                auto x = eval(e->args[0], bound);
                x.flip();
                return x;
            }
            case ExprKind::And:
            case ExprKind::Or:
            case ExprKind::Eq: {
                auto x = eval(e->args[0], bound);
                auto y = eval(e->args[1], bound);
                for (std::size_t w = 0; w < n; ++w) {
                    if (e->kind == ExprKind::And) x[w] = x[w] && y[w];
                    else if (e->kind == ExprKind::Or) x[w] = x[w] || y[w];
                    else x[w] = x[w] == y[w];
                }
                return x;
            }
            case ExprKind::Knows: {
                auto it = bound.find(e->name);
                int i = agent(it == bound.end() ? e->name : it->second, e);
                auto body = eval(e->args[0], bound);
                std::vector<bool> out(n);
                for (const auto& [cls, worlds] : members_[i]) {
                    bool all = std::all_of(worlds.begin(), worlds.end(), [&](std::size_t w) { return body[w]; });
                    for (std::size_t w : worlds) out[w] = all;
                }
                return out;
            }
            case ExprKind::Quant: {
                if (e->sub != "Agent") throw UsageError("quantifiers range over Agent only");
                std::vector<bool> out(n, e->truth);
                for (const auto& a : m_.agents) {
                    Bound inner = bound;
                    inner[e->name] = a;
                    auto x = eval(e->args[0], inner);
                    for (std::size_t w = 0; w < n; ++w) out[w] = e->truth ? out[w] && x[w] : out[w] || x[w];
                }
                return out;
            }
            default: throw UsageError("formula construct not supported on update models");
        }
    }

private:
    std::vector<bool> atom(const std::string& name, const ExprPtr& e) const {
        auto it = std::find(m_.atoms.begin(), m_.atoms.end(), name);
        if (it == m_.atoms.end()) throw UsageError(std::to_string(e->pos.line) + ":" + std::to_string(e->pos.column) + ": unknown atom '" + name + "'");
        std::size_t k = static_cast<std::size_t>(it - m_.atoms.begin());
        std::vector<bool> out(m_.size());
        for (std::size_t w = 0; w < m_.size(); ++w) out[w] = m_.valuation[w][k];
        return out;
    }

    int agent(const std::string& name, const ExprPtr& e) const {
        auto it = std::find(m_.agents.begin(), m_.agents.end(), name);
        if (it == m_.agents.end()) throw UsageError("unknown agent '" + name + "' at line " + std::to_string(e->pos.line));
        return static_cast<int>(it - m_.agents.begin());
    }

    const ExplicitModel& m_;
    std::vector<std::map<int, std::vector<std::size_t>>> members_;
};

struct Product {
    ExplicitModel model;
    std::map<std::pair<int, int>, int> index;  // (world, event) -> product world
};

Product product(const ExplicitModel& m, const UpdateStructure& u) {
    if (u.pre.size() != u.events.size()) throw UsageError("update structure needs one precondition per event");
    Evaluator ev(m);
    std::vector<std::vector<bool>> pre;
    for (const auto& p : u.pre) pre.push_back(ev.eval(p, {}));
    Product out;
    ExplicitModel& r = out.model;
    r.agents = m.agents;
    r.atoms = m.atoms;
    r.classes.resize(m.agents.size());
    std::vector<std::map<std::pair<int, int>, int>> ids(m.agents.size());
    for (std::size_t w = 0; w < m.size(); ++w) {
        for (std::size_t e = 0; e < u.events.size(); ++e) {
            if (!pre[e][w]) continue;
            out.index[{static_cast<int>(w), static_cast<int>(e)}] = static_cast<int>(r.size());
            r.valuation.push_back(m.valuation[w]);
            r.origin.push_back(m.origin[w]);
            for (std::size_t i = 0; i < m.agents.size(); ++i) {
                auto key = std::make_pair(m.classes[i][w], u.classes[i][e]);
                auto [it, fresh] = ids[i].emplace(key, static_cast<int>(ids[i].size()));
                r.classes[i].push_back(it->second);
            }
        }
    }
    return out;
}

}  // namespace

bool holds(const ExplicitModel& m, int world, const ExprPtr& phi) { return truth(m, phi).at(static_cast<std::size_t>(world)); }

std::vector<bool> truth(const ExplicitModel& m, const ExprPtr& phi) { return Evaluator(m).eval(phi, {}); }

ExplicitModel apply_update(const ExplicitModel& m, const UpdateStructure& u, bool quotient) {
    ExplicitModel r = product(m, u).model;
    return quotient ? bisimulation_quotient(r) : r;
}

ExplicitModel bisimulation_quotient(const ExplicitModel& m, std::vector<int>* block_of) {
    const std::size_t n = m.size();
    std::vector<int> block(n);
    {
        std::map<std::vector<bool>, int> ids;
        for (std::size_t w = 0; w < n; ++w) block[w] = ids.emplace(m.valuation[w], static_cast<int>(ids.size())).first->second;
    }
    std::size_t count = 0;
    while (true) {
        // signature: own block and, per agent, the blocks of its class
        std::vector<std::map<int, std::set<int>>> reach(m.agents.size());
        for (std::size_t i = 0; i < m.agents.size(); ++i)
            for (std::size_t w = 0; w < n; ++w) reach[i][m.classes[i][w]].insert(block[w]);
        std::map<std::vector<int>, int> ids;
        std::vector<int> next(n);
        for (std::size_t w = 0; w < n; ++w) {
            std::vector<int> sig{block[w]};
            for (std::size_t i = 0; i < m.agents.size(); ++i) {
                sig.push_back(-1);
                const auto& r = reach[i][m.classes[i][w]];
                sig.insert(sig.end(), r.begin(), r.end());
            }
            next[w] = ids.emplace(std::move(sig), static_cast<int>(ids.size())).first->second;
        }
        block = std::move(next);
        if (ids.size() == count) break;
        count = ids.size();
    }

    ExplicitModel q;
    q.agents = m.agents;
    q.atoms = m.atoms;
    q.valuation.assign(count, {});
    q.origin.assign(count, -2);
    for (std::size_t w = 0; w < n; ++w) {
        auto b = static_cast<std::size_t>(block[w]);
        q.valuation[b] = m.valuation[w];
        if (q.origin[b] == -2) q.origin[b] = m.origin[w];
        else if (q.origin[b] != m.origin[w]) q.origin[b] = -1;
    }
    q.classes.resize(m.agents.size());
    for (std::size_t i = 0; i < m.agents.size(); ++i) {
        std::vector<int> parent(count);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        std::map<int, int> first_block;  // class -> a block in it
        for (std::size_t w = 0; w < n; ++w) {
            auto [it, fresh] = first_block.emplace(m.classes[i][w], block[w]);
            if (!fresh) parent[find(block[w])] = find(it->second);
        }
        for (std::size_t b = 0; b < count; ++b) q.classes[i].push_back(find(static_cast<int>(b)));
    }
    if (block_of) *block_of = block;
    return q;
}

bool check_update_formula(const ExplicitModel& m, const std::vector<int>& worlds, const UpdateStructure& u,
                          const std::vector<int>& events, const ExprPtr& phi) {
    Product p = product(m, u);
    std::vector<bool> t = truth(p.model, phi);
    for (int w : worlds)
        for (int e : events) {
            auto it = p.index.find({w, e});
            if (it != p.index.end() && !t[static_cast<std::size_t>(it->second)]) return false;
        }
    return true;
}

std::string muddy_agent(int i) { return "Child" + std::to_string(i); }

ExplicitModel muddy_initial(int n) {
    if (n < 1 || n > 16) throw UsageError("muddy children model needs 1..16 children");
    ExplicitModel m;
    for (int i = 0; i < n; ++i) {
        m.agents.push_back(muddy_agent(i));
        m.atoms.push_back("muddy[" + muddy_agent(i) + "]");
    }
    m.classes.resize(static_cast<std::size_t>(n));
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<bool> val;
        for (int i = 0; i < n; ++i) val.push_back((mask >> i) & 1);
        m.origin.push_back(static_cast<int>(m.valuation.size()));
        m.valuation.push_back(std::move(val));
        for (int i = 0; i < n; ++i) m.classes[static_cast<std::size_t>(i)].push_back(mask & ~(1 << i));
    }
    return m;
}

UpdateStructure muddy_round(int n) {
    UpdateStructure u;
    u.classes.resize(static_cast<std::size_t>(n));
    for (int e = 0; e < (1 << n); ++e) {
        std::string name;
        std::string pre;
        for (int i = 0; i < n; ++i) {
            bool yes = (e >> i) & 1;
            name += yes ? 'Y' : 'N';
            std::string c = muddy_agent(i);
            std::string knows = "(Knows " + c + " muddy[" + c + "] \\/ Knows " + c + " neg muddy[" + c + "])";
            pre += (i ? " /\\ " : "") + std::string(yes ? "" : "neg ") + knows;
        }
        u.events.push_back(name);
        u.pre.push_back(parse_formula(pre));
        for (int i = 0; i < n; ++i) u.classes[static_cast<std::size_t>(i)].push_back(e);
    }
    return u;
}

}  // namespace kbp::update
