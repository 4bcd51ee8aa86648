#include "kbp/symbolic.hpp"

#include <algorithm>
#include <numeric>

#include "kbp/errors.hpp"

namespace kbp {

using bdd::Bdd;
using bdd::VarId;

namespace {

int width_for(int options) {
    int w = 0;
    while ((1 << w) < options) ++w;
    return w;
}

// Options of a statement: its arms plus the skip taken when no guard holds.
int option_count(const CStatement& st) {
    if (!st.branch) return 1;
    bool exhaustive = !st.arms.empty() && st.arms.back().otherwise;
    return static_cast<int>(st.arms.size()) + (exhaustive ? 0 : 1);
}

void append_sorted(std::vector<VarId>& dst, const std::vector<VarId>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

SymbolicSystem::SymbolicSystem(CompiledModel model, EncodingOptions options)
    : model_(std::move(model)), mgr_(std::make_unique<bdd::Manager>()) {
    allocate(options);
}

void SymbolicSystem::allocate(const EncodingOptions& options) {
    const auto& vars = model_.vars;
    const int n_agents = static_cast<int>(model_.agents.size());
    std::vector<int> agent_order(static_cast<std::size_t>(n_agents));
    std::iota(agent_order.begin(), agent_order.end(), 0);
    if (options.reverse_agents) std::reverse(agent_order.begin(), agent_order.end());

    auto choice_bits = [&](const std::string& prefix, int options_count) {
        std::vector<VarId> bits;
        for (int b = 0; b < width_for(options_count); ++b) bits.push_back(mgr_->new_var(prefix + "#" + std::to_string(b)));
        return bits;
    };
    agent_choice_.resize(static_cast<std::size_t>(n_agents));
    for (int a : agent_order) {
        int most = 1;
        for (const auto& st : model_.agents[a].program) most = std::max(most, option_count(st));
        agent_choice_[a] = choice_bits("choice:" + model_.agents[a].name, most);
    }
    for (std::size_t k = 0; k < model_.tau.size(); ++k) {
        env_choice_.push_back(choice_bits("choice:env" + std::to_string(k), option_count(model_.tau[k])));
    }

    cur_.assign(vars.size(), {});
    next_.assign(vars.size(), {});
    auto place = [&](int v) {
        for (int b = 0; b < vars[v].dom.bits(); ++b) {
            std::string n = vars[v].name + "#" + std::to_string(b);
            cur_[v].push_back(mgr_->new_var(n));
            next_[v].push_back(mgr_->new_var(n + "'"));
        }
    };
    for (int v : model_.env_vars) place(v);
    for (int a : agent_order)
        for (int v : model_.agents[a].locals)
            if (vars[v].history_time < 0) place(v);
    int max_time = -1;
    for (const auto& v : vars) max_time = std::max(max_time, v.history_time);
    for (int k = 0; k <= max_time; ++k)
        for (int a : agent_order)
            for (int v : model_.agents[a].locals)
                if (vars[v].history_time == k) place(v);

    cur_words_.resize(vars.size());
    valid_ = mgr_->one();
    for (std::size_t v = 0; v < vars.size(); ++v) {
        for (VarId b : cur_[v]) {
            cur_words_[v].push_back(mgr_->var(b));
            cur_all_.push_back(b);
        }
        const Domain& d = vars[v].dom;
        if ((1 << d.bits()) != d.size) {
            Bdd ok = mgr_->zero();
            for (int code = 0; code < d.size; ++code) ok |= equal(cur_words_[v], constant_word(code, cur_[v].size()));
            valid_ &= ok;
        }
    }
    std::sort(cur_all_.begin(), cur_all_.end());

    obs_bits_.resize(static_cast<std::size_t>(n_agents));
    hidden_bits_.resize(static_cast<std::size_t>(n_agents));
    for (int a = 0; a < n_agents; ++a) {
        for (int v : model_.agents[a].observables) append_sorted(obs_bits_[a], cur_[v]);
        std::sort(obs_bits_[a].begin(), obs_bits_[a].end());
        std::set_difference(cur_all_.begin(), cur_all_.end(), obs_bits_[a].begin(), obs_bits_[a].end(),
                            std::back_inserter(hidden_bits_[a]));
    }
}

SymbolicSystem::Word SymbolicSystem::constant_word(int code, std::size_t width) {
    Word w;
    for (std::size_t i = 0; i < width; ++i) w.push_back(mgr_->constant((code >> (width - 1 - i)) & 1));
    return w;
}

Bdd SymbolicSystem::equal(const Word& x, const Word& y) {
    if (x.size() != y.size()) throw InternalError("comparison of words of different widths");
    Bdd r = mgr_->one();
    for (std::size_t i = 0; i < x.size(); ++i) r &= x[i].iff(y[i]);
    return r;
}

Bdd SymbolicSystem::choice_is(const std::vector<VarId>& bits, int j) {
    Bdd r = mgr_->one();
    const std::size_t w = bits.size();
    for (std::size_t i = 0; i < w; ++i) r &= mgr_->literal(bits[i], (j >> (w - 1 - i)) & 1);
    return r;
}

SymbolicSystem::Word SymbolicSystem::word(const RExpr& e, const Ctx& c, std::size_t width) {
    switch (e.kind) {
        case RExpr::Kind::Var: return (*c.values)[e.a];
        case RExpr::Kind::Const: return constant_word(e.a, width);
        default: return {boolean(e, c)};
    }
}

Bdd SymbolicSystem::boolean(const RExpr& e, const Ctx& c) {
    switch (e.kind) {
        case RExpr::Kind::Const: return mgr_->constant(e.a != 0);
        case RExpr::Kind::Var: return (*c.values)[e.a].at(0);
        case RExpr::Kind::Act:
            if (!c.actions) throw InternalError("action variable read outside the environment program");
            return (*c.actions)[e.a][e.b];
        case RExpr::Kind::Not: return ~boolean(e.args[0], c);
        case RExpr::Kind::And: {
            Bdd r = mgr_->one();
            for (const auto& x : e.args) {
                r &= boolean(x, c);
                if (r.is_zero()) break;
            }
            return r;
        }
        case RExpr::Kind::Or: {
            Bdd r = mgr_->zero();
            for (const auto& x : e.args) {
                r |= boolean(x, c);
                if (r.is_one()) break;
            }
            return r;
        }
        case RExpr::Kind::Eq: {
            const RExpr& x = e.args[0];
            const RExpr& y = e.args[1];
            if (x.kind == RExpr::Kind::Const && y.kind == RExpr::Kind::Const) return mgr_->constant(x.a == y.a);
            if (x.kind == RExpr::Kind::Const) {
                Word wy = word(y, c, 1);
                return equal(word(x, c, wy.size()), wy);
            }
            Word wx = word(x, c, 1);
            return equal(wx, word(y, c, wx.size()));
        }
        case RExpr::Kind::Knows: {
            if (!c.slice) throw UsageError("knowledge operator evaluated without a time slice");
            Ctx inner = c;
            inner.values = &cur_words_;
            return knows(e.a, boolean(e.args[0], inner), *c.slice);
        }
        case RExpr::Kind::Next: throw UsageError("temporal operator X inside an atemporal formula");
        case RExpr::Kind::Skel: {
            if (c.theta) {
                auto it = c.theta->find(e.a);
                if (it != c.theta->end()) return it->second;
            }
            throw UsageError("unbound skeleton variable " + model_.skeleton_vars.at(e.a).id);
        }
    }
    throw InternalError("unhandled expression kind");
}

Bdd SymbolicSystem::eval(const RExpr& e, const Bdd* slice, const SymbolicTheta* theta) {
    Ctx c;
    c.values = &cur_words_;
    c.slice = slice;
    c.theta = theta;
    return boolean(e, c);
}

Bdd SymbolicSystem::knows(int agent, const Bdd& f, const Bdd& slice) {
    // K f fails exactly on observations shared with some slice state violating f.
    Bdd bad = mgr_->exists(slice & ~f, hidden_bits_[agent]);
    return slice & ~bad;
}

Bdd SymbolicSystem::project(int agent, const Bdd& states) { return mgr_->exists(states, hidden_bits_[agent]); }

Bdd SymbolicSystem::initial_set() { return eval(model_.initial_condition()) & valid_; }

SymbolicSystem::StepRelation SymbolicSystem::step_relation(int time, const Bdd& slice, const SymbolicTheta* theta) {
    const auto& vars = model_.vars;
    const int n_agents = static_cast<int>(model_.agents.size());
    StepRelation out;
    Bdd cons = mgr_->one();
    std::vector<Word> next = cur_words_;
    std::vector<std::vector<Bdd>> acts(static_cast<std::size_t>(n_agents),
                                       std::vector<Bdd>(model_.actions.size(), mgr_->zero()));

    // Arms of one statement as (selector, atomic) pairs; selectors partition the choice space.
    struct Option {
        Bdd selected;
        const CAtomic* body;  // null for the fallthrough skip
    };
    auto options_of = [&](const CStatement& st, const std::vector<VarId>& bits, const Ctx& c) {
        std::vector<Option> opts;
        if (!st.branch) {
            opts.push_back({mgr_->one(), &st.atomic});
            return opts;
        }
        Bdd any_guard = mgr_->zero();
        Bdd any_choice = mgr_->zero();
        int j = 0;
        for (const auto& arm : st.arms) {
            Bdd g = boolean(arm.guard, c);
            Bdd sel = choice_is(bits, j++);
            cons &= sel.implies(g);
            any_guard |= g;
            any_choice |= sel;
            opts.push_back({sel, &arm.body});
        }
        if (j < option_count(st)) {
            Bdd sel = choice_is(bits, j);
            cons &= sel.implies(~any_guard);
            any_choice |= sel;
            opts.push_back({sel, nullptr});
        }
        cons &= any_choice;
        return opts;
    };
    // New words for the variables assigned in some option; values read `c`.
    auto assign = [&](const std::vector<Option>& opts, const Ctx& c, std::vector<Word>& target) {
        std::map<int, Word> result;
        for (const auto& o : opts) {
            if (!o.body) continue;
            for (const auto& as : o.body->assigns) result.emplace(as.var, Word{});
        }
        for (auto& [v, w] : result) {
            const Word& old = (*c.values)[v];
            w.assign(old.size(), mgr_->zero());
            for (const auto& o : opts) {
                const CAssign* hit = nullptr;
                if (o.body)
                    for (const auto& as : o.body->assigns)
                        if (as.var == v) hit = &as;
                Word val = hit ? (vars[v].dom.kind == Domain::Kind::Bool ? Word{boolean(hit->value, c)}
                                                                         : word(hit->value, c, old.size()))
                               : old;
                for (std::size_t b = 0; b < w.size(); ++b) w[b] |= o.selected & val[b];
            }
        }
        for (auto& [v, w] : result) target[v] = std::move(w);
    };

    Ctx agent_ctx;
    agent_ctx.values = &cur_words_;
    agent_ctx.slice = &slice;
    agent_ctx.theta = theta;
    for (int a = 0; a < n_agents; ++a) {
        static const CStatement kSkip{};
        const auto& prog = model_.agents[a].program;
        const CStatement& st = time < static_cast<int>(prog.size()) ? prog[static_cast<std::size_t>(time)] : kSkip;
        auto opts = options_of(st, agent_choice_[a], agent_ctx);
        for (const auto& o : opts)
            if (o.body && o.body->action >= 0) acts[a][o.body->action] |= o.selected;
        assign(opts, agent_ctx, next);
        for (VarId b : agent_choice_[a]) out.quantified.push_back(b);
    }

    std::vector<Word> work = cur_words_;
    Ctx env_ctx;
    env_ctx.values = &work;
    env_ctx.actions = &acts;
    for (std::size_t k = 0; k < model_.tau.size(); ++k) {
        auto opts = options_of(model_.tau[k], env_choice_[k], env_ctx);
        std::vector<Word> updated = work;
        assign(opts, env_ctx, updated);
        work = std::move(updated);
        for (VarId b : env_choice_[k]) out.quantified.push_back(b);
    }
    for (int v : model_.env_vars) next[v] = work[v];

    // seeding with the slice keeps every intermediate conjunction small
    Bdd rel = slice & cons;
    for (std::size_t v = 0; v < vars.size(); ++v) {
        if (next[v] == cur_words_[v]) continue;
        for (std::size_t b = 0; b < cur_[v].size(); ++b) {
            rel &= mgr_->var(next_[v][b]).iff(next[v][b]);
            out.quantified.push_back(cur_[v][b]);
            out.changed_next.push_back(next_[v][b]);
            out.next_to_cur.emplace_back(next_[v][b], cur_[v][b]);
            out.cur_to_next.emplace_back(cur_[v][b], next_[v][b]);
        }
    }
    out.relation = rel;
    return out;
}

Bdd SymbolicSystem::image(const Bdd& states, int time, const SymbolicTheta* theta) {
    StepRelation r = step_relation(time, states, theta);
    Bdd img = mgr_->and_exists(states, r.relation, r.quantified);
    return mgr_->rename(img, r.next_to_cur);
}

Bdd SymbolicSystem::preimage(const Bdd& target, int time, const Bdd& slice, const SymbolicTheta* theta) {
    StepRelation r = step_relation(time, slice, theta);
    Bdd primed = mgr_->rename(target, r.cur_to_next);
    std::vector<VarId> q = r.changed_next;
    for (VarId b : r.quantified) {
        // choice bits only; changed current bits stay free in the preimage
        if (!std::binary_search(cur_all_.begin(), cur_all_.end(), b)) q.push_back(b);
    }
    return mgr_->and_exists(primed, r.relation, q);
}

double SymbolicSystem::count(const Bdd& states) const { return mgr_->sat_count(states, cur_all_); }

std::vector<GlobalState> SymbolicSystem::states(const Bdd& set) const {
    std::vector<GlobalState> out;
    std::map<VarId, std::pair<std::size_t, std::size_t>> where;  // bit -> (var, position)
    for (std::size_t v = 0; v < cur_.size(); ++v)
        for (std::size_t b = 0; b < cur_[v].size(); ++b) where[cur_[v][b]] = {v, b};
    mgr_->for_each_sat(set, cur_all_, [&](std::span<const VarId> order, const std::vector<bool>& values) {
        GlobalState s(cur_.size(), 0);
        for (std::size_t k = 0; k < order.size(); ++k) {
            auto [v, b] = where.at(order[k]);
            if (values[k]) s[v] |= 1 << (cur_[v].size() - 1 - b);
        }
        out.push_back(std::move(s));
    });
    std::sort(out.begin(), out.end());
    return out;
}

Bdd SymbolicSystem::encode(const GlobalState& s) {
    Bdd r = mgr_->one();
    for (std::size_t v = 0; v < cur_.size(); ++v) r &= equal(cur_words_[v], constant_word(s.at(v), cur_[v].size()));
    return r;
}

Bdd SymbolicSystem::encode_observation(int agent, const Observation& o) {
    const auto& obs = model_.agents[agent].observables;
    Bdd r = mgr_->one();
    for (std::size_t k = 0; k < obs.size(); ++k) {
        int v = obs[k];
        r &= equal(cur_words_[v], constant_word(o.at(k), cur_[v].size()));
    }
    return r;
}

std::vector<Observation> SymbolicSystem::observations(int agent, const Bdd& f) const {
    const auto& obs = model_.agents[agent].observables;
    std::map<VarId, std::pair<std::size_t, std::size_t>> where;
    for (std::size_t k = 0; k < obs.size(); ++k)
        for (std::size_t b = 0; b < cur_[obs[k]].size(); ++b) where[cur_[obs[k]][b]] = {k, b};
    std::vector<Observation> out;
    mgr_->for_each_sat(f, obs_bits_[agent], [&](std::span<const VarId> order, const std::vector<bool>& values) {
        Observation o(obs.size(), 0);
        for (std::size_t k = 0; k < order.size(); ++k) {
            auto [slot, b] = where.at(order[k]);
            if (values[k]) o[slot] |= 1 << (cur_[obs[slot]].size() - 1 - b);
        }
        out.push_back(std::move(o));
    });
    std::sort(out.begin(), out.end());
    return out;
}

bool SymbolicSystem::eval_observation(const Bdd& f, int agent, const Observation& o) const {
    std::vector<bool> asg(mgr_->var_count(), false);
    const auto& obs = model_.agents[agent].observables;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const auto& bits = cur_[obs[k]];
        for (std::size_t b = 0; b < bits.size(); ++b) asg[bits[b]] = (o.at(k) >> (bits.size() - 1 - b)) & 1;
    }
    return mgr_->eval(f, asg);
}

GlobalState SymbolicSystem::pick_state(const Bdd& set) const {
    if (set.is_zero()) throw InternalError("pick_state on an empty set");
    bdd::Cube cube = mgr_->pick_cube(set);
    std::vector<bool> asg(mgr_->var_count(), false);
    for (auto [v, val] : cube) asg[v] = val;
    GlobalState s(cur_.size(), 0);
    for (std::size_t v = 0; v < cur_.size(); ++v)
        for (std::size_t b = 0; b < cur_[v].size(); ++b)
            if (asg[cur_[v][b]]) s[v] |= 1 << (cur_[v].size() - 1 - b);
    return s;
}

}  // namespace kbp
