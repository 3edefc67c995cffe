#ifndef HTNLEARN_CURRICULA_HPP
#define HTNLEARN_CURRICULA_HPP

#include "landmark.hpp"
#include "search.hpp"

#include <map>
#include <string>
#include <vector>

namespace curricula {

using ground::ActionId;
using ground::AtomId;
using ground::Grounding;

class CurricugenError : public std::runtime_error {
public:
    enum class Kind { LandmarkUnreachable, BudgetExceeded, GoalUnreachable };

    CurricugenError(Kind kind, const std::string &what) : std::runtime_error(what), kind(kind) {}
    Kind kind;
};

// Task with typed parameters, empty preconditions and a single goal atom
// lifted from the predicate schema it was minted for.
struct AnnotatedTask {
    std::string name; // "achieve-<predicate>"
    std::vector<pddl::Param> params;
    std::vector<pddl::Literal> preconditions; // kept empty
    std::vector<pddl::Literal> goals;
};

struct GroundTask {
    std::string name;
    std::vector<std::string> args;

    bool operator==(const GroundTask &o) const { return name == o.name && args == o.args; }
    std::string str(const pddl::DisplayPool &pool) const;
};

class TaskRegistry {
public:
    // one lifted task per predicate; repeated calls return the same task
    const AnnotatedTask &make_annotated_task(const pddl::DomainModel &dom,
                                             const std::string &predicate);
    GroundTask ground_instance(const Grounding &g, AtomId landmark);
    const AnnotatedTask *find(const std::string &task_name) const;
    const std::map<std::string, AnnotatedTask> &all() const { return tasks_; }

    // goal atoms of a task instance
    std::vector<pddl::GroundAtom> instance_goals(const GroundTask &t) const;

    static std::string task_name_for(const std::string &predicate);
    static std::string predicate_for(const std::string &task_name); // "" if not achieve-*

private:
    std::map<std::string, AnnotatedTask> tasks_; // by task name
};

// A step with begin == end + 1 denotes the trivial span: the task's goals
// already hold at trajectory[end] and an empty-subtask method is learned.
struct CurriculumStep {
    int begin = 1;
    int end = 0;
    GroundTask task;

    bool trivial() const { return begin == end + 1; }
};

struct Curriculum {
    std::vector<CurriculumStep> steps;
};

struct PlanTrace {
    std::vector<ActionId> actions;        // 1-indexed via action(k)
    std::vector<ground::State> trajectory; // trajectory[k] = state after k actions

    int length() const { return static_cast<int>(actions.size()); }
    ActionId action(int k) const { return actions[k - 1]; }
    const ground::State &state(int k) const { return trajectory[k]; }
};

struct GenConfig {
    search::SearchConfig search;
    bool reasonable_orders = true;
    bool repair_goal = true;      // re-plan for goal atoms clobbered by later subplans
    int max_subtrace_len = 0;     // 0 = unlimited
};

struct GenTiming {
    double landmark_seconds = 0;
    double plan_seconds = 0;
};

struct GenResult {
    PlanTrace trace;
    Curriculum curriculum;
    landmarks::LandmarkGraph graph;
    std::vector<AtomId> sequence; // pruned landmark order that was followed
    GenTiming timing;
};

// Curriculum generation: extract the landmark graph, walk a total order over
// it, plan to each landmark from the current state, and emit one block of
// steps (k, i) for k = i..1 per non-empty subplan. Goal atoms that never get
// a block receive a trivial step.
GenResult curricugen(const Grounding &g, TaskRegistry &tasks, const GenConfig &cfg = {});

std::string curriculum_to_json(const Grounding &g, const PlanTrace &trace,
                               const Curriculum &curriculum);
// Re-binds an exported curriculum against a grounding; validates the trace.
std::pair<PlanTrace, Curriculum> curriculum_from_json(const Grounding &g, TaskRegistry &tasks,
                                                      const std::string &json_text);

} // namespace curricula

#endif
