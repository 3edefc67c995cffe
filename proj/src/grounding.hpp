#ifndef HTNLEARN_GROUNDING_HPP
#define HTNLEARN_GROUNDING_HPP

#include "pddl.hpp"
#include "util.hpp"

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ground {

using AtomId = int;
using ActionId = int;
using util::Bitset;

class InapplicableAction : public std::runtime_error {
public:
    explicit InapplicableAction(const std::string &what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
public:
    enum class Kind { StepInapplicable, GoalNotAchieved };

    ValidationError(Kind kind, int step, const std::string &what)
        : std::runtime_error(what), kind(kind), step(step) {}

    Kind kind;
    int step; // 1-based index of the failing action; 0 for goal failures
};

struct GroundAction {
    std::string schema;
    std::vector<std::string> args;
    std::vector<AtomId> pre, add, del;
    ActionId id = -1;

    std::string str(const pddl::DisplayPool &pool) const;
    std::string key() const; // "schema a b c", lowercase
};

struct State {
    Bitset atoms;

    bool contains(AtomId a) const { return atoms.test(static_cast<std::size_t>(a)); }
    bool operator==(const State &o) const { return atoms == o.atoms; }
    std::size_t hash() const { return atoms.hash(); }
};

struct StateHash {
    std::size_t operator()(const State &s) const { return s.hash(); }
};

// Immutable grounding of one problem: interned atoms with dense ids, the
// delete-relaxed reachable ground actions, and derived indices.
class Grounding {
public:
    static Grounding build(const pddl::DomainModel &dom, const pddl::ProblemModel &prob);

    const pddl::DomainModel &domain() const { return *dom_; }
    const pddl::ProblemModel &problem() const { return *prob_; }

    int num_atoms() const { return static_cast<int>(atoms_.size()); }
    const pddl::GroundAtom &atom(AtomId id) const { return atoms_[id]; }
    std::string atom_str(AtomId id) const { return atoms_[id].str(display()); }
    AtomId find_atom(const pddl::GroundAtom &a) const; // -1 if unknown
    const pddl::DisplayPool &display() const { return display_; }

    const std::vector<GroundAction> &actions() const { return actions_; }
    const GroundAction *find_action(const std::string &schema,
                                    const std::vector<std::string> &args) const;

    const std::vector<ActionId> &achievers(AtomId atom) const { return achievers_[atom]; }

    State initial_state() const;
    Bitset goal_bits() const;
    const std::vector<AtomId> &goal_atoms() const { return goal_; }
    const std::vector<AtomId> &init_atoms() const { return init_; }

    State make_state(const std::vector<AtomId> &atoms) const;
    Bitset empty_bits() const { return Bitset(atoms_.size()); }

    const std::string &object_type(const std::string &obj) const;

    // Delete-relaxed fact fixpoint from `from`, using actions that pass
    // `allow` (all actions when allow is empty).
    Bitset relaxed_reachable(const Bitset &from,
                             const std::function<bool(ActionId)> &allow = {}) const;

private:
    AtomId intern(const pddl::GroundAtom &a);

    const pddl::DomainModel *dom_ = nullptr;
    const pddl::ProblemModel *prob_ = nullptr;
    std::vector<pddl::GroundAtom> atoms_;
    std::unordered_map<pddl::GroundAtom, AtomId, pddl::GroundAtomHash> atom_ids_;
    std::vector<GroundAction> actions_;
    std::unordered_map<std::string, ActionId> action_ids_;
    std::vector<std::vector<ActionId>> achievers_;
    std::vector<AtomId> init_, goal_;
    pddl::DisplayPool display_;
};

State gamma_apply(const Grounding &g, const State &s, const GroundAction &a);

struct Trajectory {
    std::vector<State> states; // states[0] = start, size = plan length + 1
};

// Replays the plan from the problem's initial state and checks `goal` in the
// final state. Throws ValidationError on the first inapplicable step or on a
// missed goal.
Trajectory validate_plan(const Grounding &g, const State &start,
                         const std::vector<ActionId> &plan, const std::vector<AtomId> &goal);

std::vector<ActionId> resolve_plan(const Grounding &g,
                                   const std::vector<pddl::GroundAtom> &actions);

} // namespace ground

#endif
