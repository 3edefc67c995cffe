#include "grounding.hpp"

#include <algorithm>
#include <cassert>

namespace ground {

std::string GroundAction::str(const pddl::DisplayPool &pool) const {
    std::string out = "(!" + pool.display(schema);
    for (const auto &a : args)
        out += " " + pool.display(a);
    return out + ")";
}

std::string GroundAction::key() const {
    std::string out = schema;
    for (const auto &a : args)
        out += " " + a;
    return out;
}

AtomId Grounding::intern(const pddl::GroundAtom &a) {
    auto it = atom_ids_.find(a);
    if (it != atom_ids_.end())
        return it->second;
    AtomId id = static_cast<AtomId>(atoms_.size());
    atoms_.push_back(a);
    atom_ids_.emplace(a, id);
    return id;
}

AtomId Grounding::find_atom(const pddl::GroundAtom &a) const {
    auto it = atom_ids_.find(a);
    return it == atom_ids_.end() ? -1 : it->second;
}

const GroundAction *Grounding::find_action(const std::string &schema,
                                           const std::vector<std::string> &args) const {
    GroundAction probe;
    probe.schema = schema;
    probe.args = args;
    auto it = action_ids_.find(probe.key());
    return it == action_ids_.end() ? nullptr : &actions_[it->second];
}

const std::string &Grounding::object_type(const std::string &obj) const {
    const pddl::TypedObject *o = prob_->find_object(obj);
    static const std::string object_type_name = "object";
    return o ? o->type : object_type_name;
}

namespace {

void enumerate_bindings(const pddl::DomainModel &dom, const pddl::ProblemModel &prob,
                        const std::vector<pddl::Param> &params, std::size_t idx,
                        std::vector<std::string> &binding,
                        const std::function<void(const std::vector<std::string> &)> &emit) {
    if (idx == params.size()) {
        emit(binding);
        return;
    }
    for (const auto &obj : prob.objects) {
        if (!dom.types.is_subtype(obj.type, params[idx].type))
            continue;
        binding.push_back(obj.name);
        enumerate_bindings(dom, prob, params, idx + 1, binding, emit);
        binding.pop_back();
    }
}

pddl::GroundAtom substitute(const pddl::Literal &lit, const std::vector<pddl::Param> &params,
                            const std::vector<std::string> &binding) {
    pddl::GroundAtom a;
    a.pred = lit.pred;
    for (const auto &arg : lit.args) {
        bool found = false;
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].var == arg) {
                a.args.push_back(binding[i]);
                found = true;
                break;
            }
        assert(found);
        (void)found;
    }
    return a;
}

} // namespace

Grounding Grounding::build(const pddl::DomainModel &dom, const pddl::ProblemModel &prob) {
    Grounding g;
    g.dom_ = &dom;
    g.prob_ = &prob;

    // share the display spellings of both models
    for (const auto &o : prob.objects)
        g.display_.remember(o.name, prob.display.display(o.name));
    for (const auto &p : dom.predicates)
        g.display_.remember(p.name, dom.display.display(p.name));
    for (const auto &a : dom.actions)
        g.display_.remember(a.name, dom.display.display(a.name));
    for (const auto &t : dom.types.parent)
        g.display_.remember(t.first, dom.display.display(t.first));

    for (const auto &a : prob.init)
        g.init_.push_back(g.intern(a));
    std::sort(g.init_.begin(), g.init_.end());
    g.init_.erase(std::unique(g.init_.begin(), g.init_.end()), g.init_.end());

    // enumerate typed candidates
    std::vector<GroundAction> candidates;
    for (const auto &schema : dom.actions) {
        std::vector<std::string> binding;
        enumerate_bindings(dom, prob, schema.params, 0, binding,
                           [&](const std::vector<std::string> &b) {
                               GroundAction ga;
                               ga.schema = schema.name;
                               ga.args = b;
                               for (const auto &l : schema.preconditions)
                                   ga.pre.push_back(g.intern(substitute(l, schema.params, b)));
                               for (const auto &l : schema.add_effects)
                                   ga.add.push_back(g.intern(substitute(l, schema.params, b)));
                               for (const auto &l : schema.del_effects)
                                   ga.del.push_back(g.intern(substitute(l, schema.params, b)));
                               for (auto *v : {&ga.pre, &ga.add, &ga.del}) {
                                   std::sort(v->begin(), v->end());
                                   v->erase(std::unique(v->begin(), v->end()), v->end());
                               }
                               // drop instances where one binding makes an atom
                               // both added and deleted (e.g. stacking a block
                               // onto itself); the action model requires
                               // add/del to be disjoint after grounding
                               for (AtomId x : ga.add)
                                   for (AtomId y : ga.del)
                                       if (x == y)
                                           return;
                               candidates.push_back(std::move(ga));
                           });
    }

    // goal atoms participate in the universe even when unreachable
    for (const auto &a : prob.goal)
        g.goal_.push_back(g.intern(a));

    // delete-relaxed reachability fixpoint over the candidates
    std::vector<char> fact(g.atoms_.size(), 0);
    for (AtomId a : g.init_)
        fact[a] = 1;
    std::vector<char> applied(candidates.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (applied[i])
                continue;
            bool ok = true;
            for (AtomId p : candidates[i].pre)
                if (!fact[p]) {
                    ok = false;
                    break;
                }
            if (!ok)
                continue;
            applied[i] = 1;
            changed = true;
            for (AtomId a : candidates[i].add)
                if (!fact[a]) {
                    fact[a] = 1;
                }
        }
    }

    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (applied[i])
            g.actions_.push_back(std::move(candidates[i]));
    std::sort(g.actions_.begin(), g.actions_.end(),
              [](const GroundAction &a, const GroundAction &b) {
                  if (a.schema != b.schema)
                      return a.schema < b.schema;
                  return a.args < b.args;
              });
    g.achievers_.assign(g.atoms_.size(), {});
    for (std::size_t i = 0; i < g.actions_.size(); ++i) {
        g.actions_[i].id = static_cast<ActionId>(i);
        g.action_ids_.emplace(g.actions_[i].key(), static_cast<ActionId>(i));
        for (AtomId a : g.actions_[i].add)
            g.achievers_[a].push_back(static_cast<ActionId>(i));
    }
    return g;
}

State Grounding::initial_state() const {
    State s{Bitset(atoms_.size())};
    for (AtomId a : init_)
        s.atoms.set(static_cast<std::size_t>(a));
    return s;
}

Bitset Grounding::goal_bits() const {
    Bitset b(atoms_.size());
    for (AtomId a : goal_)
        b.set(static_cast<std::size_t>(a));
    return b;
}

State Grounding::make_state(const std::vector<AtomId> &atoms) const {
    State s{Bitset(atoms_.size())};
    for (AtomId a : atoms)
        s.atoms.set(static_cast<std::size_t>(a));
    return s;
}

Bitset Grounding::relaxed_reachable(const Bitset &from,
                                    const std::function<bool(ActionId)> &allow) const {
    Bitset fact = from;
    std::vector<char> applied(actions_.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            if (applied[i])
                continue;
            if (allow && !allow(static_cast<ActionId>(i)))
                continue;
            bool ok = true;
            for (AtomId p : actions_[i].pre)
                if (!fact.test(static_cast<std::size_t>(p))) {
                    ok = false;
                    break;
                }
            if (!ok)
                continue;
            applied[i] = 1;
            changed = true;
            for (AtomId a : actions_[i].add)
                fact.set(static_cast<std::size_t>(a));
        }
    }
    return fact;
}

State gamma_apply(const Grounding &g, const State &s, const GroundAction &a) {
    for (AtomId p : a.pre)
        if (!s.contains(p))
            throw InapplicableAction("action " + a.str(g.display()) +
                                     " is inapplicable: missing " + g.atom_str(p));
    State out = s;
    for (AtomId d : a.del)
        out.atoms.reset(static_cast<std::size_t>(d));
    for (AtomId x : a.add)
        out.atoms.set(static_cast<std::size_t>(x));
    return out;
}

Trajectory validate_plan(const Grounding &g, const State &start,
                         const std::vector<ActionId> &plan, const std::vector<AtomId> &goal) {
    Trajectory t;
    t.states.push_back(start);
    for (std::size_t k = 0; k < plan.size(); ++k) {
        const GroundAction &a = g.actions()[plan[k]];
        try {
            t.states.push_back(gamma_apply(g, t.states.back(), a));
        } catch (const InapplicableAction &e) {
            throw ValidationError(ValidationError::Kind::StepInapplicable,
                                  static_cast<int>(k + 1),
                                  "step " + std::to_string(k + 1) + " inapplicable: " + e.what());
        }
    }
    for (AtomId a : goal)
        if (!t.states.back().contains(a))
            throw ValidationError(ValidationError::Kind::GoalNotAchieved, 0,
                                  "goal not achieved: " + g.atom_str(a));
    return t;
}

std::vector<ActionId> resolve_plan(const Grounding &g,
                                   const std::vector<pddl::GroundAtom> &actions) {
    std::vector<ActionId> out;
    for (const auto &a : actions) {
        const GroundAction *ga = g.find_action(a.pred, a.args);
        if (!ga)
            throw std::runtime_error("unknown ground action " + a.str());
        out.push_back(ga->id);
    }
    return out;
}

} // namespace ground
