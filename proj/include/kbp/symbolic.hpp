#pragma once

// Binary encoding of a compiled model into one BDD manager: state sets as
// characteristic functions over the current-state bits, one-step images by
// relational product, and evaluation of resolved expressions (knowledge
// included) relative to a time slice.

#include <map>
#include <memory>
#include <vector>

#include "kbp/bdd.hpp"
#include "kbp/model.hpp"

namespace kbp {

using GlobalState = std::vector<int>;  // value code per CompiledModel::vars entry
using Observation = std::vector<int>;  // codes of CAgent::observables, same order

/// Condition bound to each skeleton variable, over current-state bits.
using SymbolicTheta = std::map<int, bdd::Bdd>;

struct EncodingOptions {
    /// Lays out the agents' local-variable blocks in reverse agent order.
    bool reverse_agents = false;
};

class SymbolicSystem {
public:
    explicit SymbolicSystem(CompiledModel model, EncodingOptions options = {});

    SymbolicSystem(const SymbolicSystem&) = delete;
    SymbolicSystem& operator=(const SymbolicSystem&) = delete;

    const CompiledModel& model() const { return model_; }
    bdd::Manager& manager() { return *mgr_; }

    /// States satisfying the initial condition and the domain-validity constraints.
    bdd::Bdd initial_set();
    /// Every state whose codes lie within their domains.
    bdd::Bdd valid_states() const { return valid_; }

    /// Successors of `states` under the agents' statements at `time` and the
    /// environment program.  Skeleton guards read `theta`; knowledge guards
    /// are evaluated in `states` itself.  Throws UsageError on an unbound
    /// skeleton variable.
    bdd::Bdd image(const bdd::Bdd& states, int time, const SymbolicTheta* theta = nullptr);
    /// States of `slice` with a successor in `target` at `time`.  Knowledge guards are
    /// evaluated in `slice`.
    bdd::Bdd preimage(const bdd::Bdd& target, int time, const bdd::Bdd& slice, const SymbolicTheta* theta = nullptr);

    /// Characteristic function of a Boolean expression over current bits.
    /// Knowledge operators quantify over `slice`; without one they throw.
    bdd::Bdd eval(const RExpr& e, const bdd::Bdd* slice = nullptr, const SymbolicTheta* theta = nullptr);
    /// States of `slice` from which `agent` cannot tell any state where f fails.
    bdd::Bdd knows(int agent, const bdd::Bdd& f, const bdd::Bdd& slice);

    /// Function over `agent`'s observable bits: the observations of `states`.
    bdd::Bdd project(int agent, const bdd::Bdd& states);

    const std::vector<bdd::VarId>& current_bits() const { return cur_all_; }
    const std::vector<bdd::VarId>& bits_of(int var) const { return cur_[var]; }
    const std::vector<bdd::VarId>& observable_bits(int agent) const { return obs_bits_[agent]; }
    const std::vector<bdd::VarId>& hidden_bits(int agent) const { return hidden_bits_[agent]; }

    /// Number of states in a set of valid states.
    double count(const bdd::Bdd& states) const;
    std::vector<GlobalState> states(const bdd::Bdd& set) const;
    bdd::Bdd encode(const GlobalState& s);
    bdd::Bdd encode_observation(int agent, const Observation& o);
    /// Observations realized by a function over observable bits.
    std::vector<Observation> observations(int agent, const bdd::Bdd& f) const;
    bool eval_observation(const bdd::Bdd& f, int agent, const Observation& o) const;
    GlobalState pick_state(const bdd::Bdd& set) const;

private:
    using Word = std::vector<bdd::Bdd>;  // most significant bit first

    struct Ctx {
        const std::vector<Word>* values = nullptr;
        const bdd::Bdd* slice = nullptr;
        const SymbolicTheta* theta = nullptr;
        const std::vector<std::vector<bdd::Bdd>>* actions = nullptr;
    };

    struct StepRelation {
        bdd::Bdd relation;
        std::vector<bdd::VarId> quantified;  // choice bits and changed current bits
        std::vector<bdd::VarId> changed_next;
        std::vector<std::pair<bdd::VarId, bdd::VarId>> next_to_cur;
        std::vector<std::pair<bdd::VarId, bdd::VarId>> cur_to_next;
    };

    void allocate(const EncodingOptions& options);
    StepRelation step_relation(int time, const bdd::Bdd& slice, const SymbolicTheta* theta);

    bdd::Bdd boolean(const RExpr& e, const Ctx& c);
    Word word(const RExpr& e, const Ctx& c, std::size_t width);
    bdd::Bdd equal(const Word& x, const Word& y);
    Word constant_word(int code, std::size_t width);
    bdd::Bdd choice_is(const std::vector<bdd::VarId>& bits, int j);

    CompiledModel model_;
    std::unique_ptr<bdd::Manager> mgr_;
    std::vector<std::vector<bdd::VarId>> cur_;
    std::vector<std::vector<bdd::VarId>> next_;
    std::vector<bdd::VarId> cur_all_;  // sorted
    std::vector<Word> cur_words_;
    std::vector<std::vector<bdd::VarId>> agent_choice_;
    std::vector<std::vector<bdd::VarId>> env_choice_;
    std::vector<std::vector<bdd::VarId>> obs_bits_;     // sorted
    std::vector<std::vector<bdd::VarId>> hidden_bits_;  // sorted
    bdd::Bdd valid_;
};

}  // namespace kbp
