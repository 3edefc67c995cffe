#ifndef HTNLEARN_HTN_HPP
#define HTNLEARN_HTN_HPP

#include "learn.hpp"

#include <memory>
#include <string>
#include <vector>

namespace htn {

using curricula::GroundTask;
using curricula::TaskRegistry;
using ground::ActionId;
using ground::Grounding;
using learning::HtnMethod;
using learning::MethodLibrary;

struct HtnConfig {
    long max_decompositions = 100'000;
    int depth_limit = 500;
};

enum class HtnStatus { Solved, NoSolution, DepthLimitExceeded, BudgetExceeded };

// Decomposition tree; leaves are ground actions, inner nodes record the
// method applied to a task.
struct DecompositionNode {
    bool primitive = false;
    GroundTask task;          // for compound nodes
    std::string method_id;    // for compound nodes
    ActionId action = -1;     // for leaves
    std::vector<DecompositionNode> children;
};

struct HtnResult {
    HtnStatus status = HtnStatus::NoSolution;
    std::vector<ActionId> plan;
    std::vector<DecompositionNode> decomposition; // one tree per root task
    long decompositions = 0;

    bool solved() const { return status == HtnStatus::Solved; }

    std::vector<ActionId> leaves() const;
};

using Substitution = std::map<std::string, std::string>;

// All ways of applying m to `task` in state s: head parameters unify with the
// task's arguments, remaining method variables range over type-compatible
// objects, and the instantiated preconditions must hold in s. Sorted
// lexicographically by the bound objects.
std::vector<Substitution> applicable_instances(const Grounding &g, const HtnMethod &m,
                                               const GroundTask &task, const ground::State &s);

// Depth-first, left-to-right total-order decomposition with backtracking.
// Method choices follow library insertion order; bindings are lexicographic.
HtnResult htn_solve(const Grounding &g, const MethodLibrary &library, const TaskRegistry &tasks,
                    const ground::State &s0, const std::vector<GroundTask> &roots,
                    const HtnConfig &cfg = {});

// Root tasks of the equivalent hierarchical problem: one task per goal atom,
// serialized in landmark topological order.
std::vector<GroundTask> roots_from_goal(const Grounding &g, TaskRegistry &tasks);

std::string decomposition_to_json(const Grounding &g, const HtnResult &result);

} // namespace htn

#endif
