#include "htn.hpp"

#include "../vendor/json.hpp"

#include <algorithm>
#include <unordered_set>

namespace htn {

using learning::HtnMethod;
using nlohmann::ordered_json;

std::vector<ActionId> HtnResult::leaves() const {
    std::vector<ActionId> out;
    std::function<void(const DecompositionNode &)> walk = [&](const DecompositionNode &n) {
        if (n.primitive)
            out.push_back(n.action);
        for (const auto &c : n.children)
            walk(c);
    };
    for (const auto &root : decomposition)
        walk(root);
    return out;
}

namespace {

bool holds(const Grounding &g, const pddl::Literal &lit, const Substitution &sub,
           const ground::State &s) {
    pddl::GroundAtom atom;
    atom.pred = lit.pred;
    for (const auto &v : lit.args) {
        auto it = sub.find(v);
        if (it == sub.end())
            return false;
        atom.args.push_back(it->second);
    }
    ground::AtomId id = g.find_atom(atom);
    return id >= 0 && s.contains(id);
}

void enumerate_free(const Grounding &g, const HtnMethod &m,
                    const std::vector<std::string> &free_vars, std::size_t idx, Substitution &sub,
                    const ground::State &s, std::vector<Substitution> &out) {
    if (idx == free_vars.size()) {
        for (const auto &lit : m.preconditions)
            if (!holds(g, lit, sub, s))
                return;
        out.push_back(sub);
        return;
    }
    const std::string &var = free_vars[idx];
    std::string var_type = "object";
    for (const auto &p : m.method_vars)
        if (p.var == var)
            var_type = p.type;
    for (const auto &obj : g.problem().objects) {
        if (!g.domain().types.is_subtype(obj.type, var_type))
            continue;
        sub[var] = obj.name;
        enumerate_free(g, m, free_vars, idx + 1, sub, s, out);
        sub.erase(var);
    }
}

struct PathKey {
    std::string task;
    std::size_t state_hash;
    bool operator==(const PathKey &o) const {
        return task == o.task && state_hash == o.state_hash;
    }
};
struct PathKeyHash {
    std::size_t operator()(const PathKey &k) const {
        return std::hash<std::string>()(k.task) ^ (k.state_hash * 0x9e3779b97f4a7c15ULL);
    }
};

struct Agenda {
    GroundTask task;
    bool primitive;
    DecompositionNode *slot; // children list owner for the resulting node
    std::shared_ptr<Agenda> next;
};

class Solver {
public:
    Solver(const Grounding &g, const MethodLibrary &lib, const TaskRegistry &tasks,
           const HtnConfig &cfg)
        : g_(g), lib_(lib), tasks_(tasks), cfg_(cfg) {}

    HtnResult run(const ground::State &s0, const std::vector<GroundTask> &roots) {
        HtnResult result;
        result.decomposition.resize(roots.size());
        std::shared_ptr<Agenda> agenda;
        for (std::size_t i = roots.size(); i > 0; --i) {
            auto node = std::make_shared<Agenda>();
            node->task = roots[i - 1];
            node->primitive = false;
            node->slot = &result.decomposition[i - 1];
            node->next = agenda;
            agenda = node;
        }
        for (std::size_t i = 0; i < roots.size(); ++i)
            result.decomposition[i].task = roots[i];

        bool solved = false;
        try {
            solved = solve(s0, agenda, result.plan, 0, true);
        } catch (const Budget &) {
            result.status = HtnStatus::BudgetExceeded;
            result.decompositions = decompositions_;
            return result;
        }
        result.decompositions = decompositions_;
        if (solved)
            result.status = HtnStatus::Solved;
        else
            result.status = depth_cut_ ? HtnStatus::DepthLimitExceeded : HtnStatus::NoSolution;
        return result;
    }

private:
    struct Budget {};

    std::string task_key(const GroundTask &t) const {
        std::string k = t.name;
        for (const auto &a : t.args)
            k += " " + a;
        return k;
    }

    // `root_level` marks agenda entries whose slot IS the tree node (root
    // tasks); everything else appends to slot->children.
    bool solve(const ground::State &s, const std::shared_ptr<Agenda> &agenda,
               std::vector<ActionId> &plan, int depth, bool) {
        if (!agenda)
            return true;
        if (depth > cfg_.depth_limit) {
            depth_cut_ = true;
            return false;
        }
        const GroundTask &task = agenda->task;

        if (agenda->primitive) {
            const ground::GroundAction *a = g_.find_action(task.name, task.args);
            if (!a)
                return false;
            for (ground::AtomId p : a->pre)
                if (!s.contains(p))
                    return false;
            if (++decompositions_ > cfg_.max_decompositions)
                throw Budget{};
            ground::State succ = gamma_apply(g_, s, *a);
            DecompositionNode leaf;
            leaf.primitive = true;
            leaf.action = a->id;
            agenda->slot->children.push_back(std::move(leaf));
            plan.push_back(a->id);
            if (solve(succ, agenda->next, plan, depth, false))
                return true;
            plan.pop_back();
            agenda->slot->children.pop_back();
            return false;
        }

        PathKey key{task_key(task), s.hash()};
        if (path_.count(key))
            return false; // same task in the same state along this branch
        path_.insert(key);

        for (const HtnMethod *m : lib_.for_task(task.name)) {
            if (m->head_params.size() != task.args.size())
                continue;
            for (const Substitution &sub : applicable_instances(g_, *m, task, s)) {
                if (++decompositions_ > cfg_.max_decompositions) {
                    path_.erase(key);
                    throw Budget{};
                }
                DecompositionNode *node;
                bool is_root_slot = agenda->slot->children.empty() &&
                                    agenda->slot->method_id.empty() && !agenda->slot->primitive &&
                                    agenda->slot->task.name == task.name &&
                                    agenda->slot->task.args == task.args;
                if (is_root_slot) {
                    node = agenda->slot;
                } else {
                    agenda->slot->children.push_back({});
                    node = &agenda->slot->children.back();
                }
                node->task = task;
                node->method_id = m->id;

                // queue the method's subtasks in front of the rest
                std::shared_ptr<Agenda> rest = agenda->next;
                for (std::size_t i = m->subtasks.size(); i > 0; --i) {
                    const auto &st = m->subtasks[i - 1];
                    auto entry = std::make_shared<Agenda>();
                    entry->task.name = st.name;
                    for (const auto &v : st.args)
                        entry->task.args.push_back(sub.at(v));
                    entry->primitive = st.kind == HtnMethod::Subtask::Kind::Primitive;
                    entry->slot = node;
                    entry->next = rest;
                    rest = entry;
                }
                if (solve(s, rest, plan, depth + 1, false)) {
                    path_.erase(key);
                    return true;
                }
                if (is_root_slot) {
                    node->method_id.clear();
                    node->children.clear();
                } else {
                    agenda->slot->children.pop_back();
                }
            }
        }
        path_.erase(key);
        return false;
    }

    const Grounding &g_;
    const MethodLibrary &lib_;
    const TaskRegistry &tasks_;
    const HtnConfig &cfg_;
    long decompositions_ = 0;
    bool depth_cut_ = false;
    std::unordered_set<PathKey, PathKeyHash> path_;
};

} // namespace

std::vector<Substitution> applicable_instances(const Grounding &g, const HtnMethod &m,
                                               const GroundTask &task, const ground::State &s) {
    std::vector<Substitution> out;
    if (m.head_params.size() != task.args.size())
        return out;
    Substitution sub;
    for (std::size_t i = 0; i < m.head_params.size(); ++i) {
        const std::string &var = m.head_params[i].var;
        auto it = sub.find(var);
        if (it != sub.end()) {
            if (it->second != task.args[i])
                return out; // repeated head variable must unify
            continue;
        }
        if (!g.domain().types.is_subtype(g.object_type(task.args[i]), m.head_params[i].type))
            return out;
        sub[var] = task.args[i];
    }
    std::vector<std::string> free_vars;
    for (const auto &p : m.method_vars)
        if (!sub.count(p.var))
            free_vars.push_back(p.var);
    enumerate_free(g, m, free_vars, 0, sub, s, out);
    // objects are enumerated in declaration order; report bindings in
    // lexicographic order of the bound objects
    std::sort(out.begin(), out.end(), [&](const Substitution &a, const Substitution &b) {
        std::vector<std::string> va, vb;
        for (const auto &v : free_vars) {
            va.push_back(a.at(v));
            vb.push_back(b.at(v));
        }
        return va < vb;
    });
    return out;
}

HtnResult htn_solve(const Grounding &g, const MethodLibrary &library, const TaskRegistry &tasks,
                    const ground::State &s0, const std::vector<GroundTask> &roots,
                    const HtnConfig &cfg) {
    Solver solver(g, library, tasks, cfg);
    return solver.run(s0, roots);
}

std::vector<GroundTask> roots_from_goal(const Grounding &g, TaskRegistry &tasks) {
    landmarks::LandmarkGraph graph = landmarks::extract_landmarks(g);
    graph = landmarks::add_reasonable_orders(g, graph);
    std::vector<GroundTask> roots;
    for (ground::AtomId a : landmarks::topo_goal_order(g, graph))
        roots.push_back(tasks.ground_instance(g, a));
    return roots;
}

namespace {

ordered_json node_to_json(const Grounding &g, const DecompositionNode &n) {
    ordered_json j;
    if (n.primitive) {
        j["action"] = g.actions()[n.action].str(g.display());
        return j;
    }
    j["task"] = n.task.str(g.display());
    j["method"] = n.method_id;
    j["children"] = ordered_json::array();
    for (const auto &c : n.children)
        j["children"].push_back(node_to_json(g, c));
    return j;
}

} // namespace

std::string decomposition_to_json(const Grounding &g, const HtnResult &result) {
    ordered_json j;
    j["plan"] = ordered_json::array();
    for (ActionId a : result.plan)
        j["plan"].push_back(g.actions()[a].str(g.display()));
    j["trees"] = ordered_json::array();
    for (const auto &root : result.decomposition)
        j["trees"].push_back(node_to_json(g, root));
    return j.dump(2) + "\n";
}

} // namespace htn
