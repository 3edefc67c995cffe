#ifndef HTNLEARN_LEARN_HPP
#define HTNLEARN_LEARN_HPP

#include "curricula.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace learning {

using curricula::Curriculum;
using curricula::GroundTask;
using curricula::PlanTrace;
using curricula::TaskRegistry;
using ground::AtomId;
using ground::Grounding;

// Lifted decomposition rule. head_params are the variables standing for the
// task's arguments; method_vars are the remaining variables that only occur
// in preconditions or subtasks.
struct HtnMethod {
    struct Subtask {
        enum class Kind { Primitive, Task } kind;
        std::string name;
        std::vector<std::string> args; // variables
        bool operator==(const Subtask &o) const {
            return kind == o.kind && name == o.name && args == o.args;
        }
    };

    std::string id;
    std::string task_name;
    std::vector<pddl::Param> head_params;
    std::vector<pddl::Param> method_vars;
    std::vector<pddl::Literal> preconditions; // positive, sorted
    std::vector<Subtask> subtasks;

    std::string shop_str(const pddl::DisplayPool &pool) const;
};

// where a method came from, and how its span was covered
struct MethodProvenance {
    std::string problem;
    int begin = 0, end = 0;
    int ordinal = 0;
    struct CoverEntry {
        bool is_task = false;
        int begin = 0, end = 0; // trace span covered by this subtask
        std::string method_id;  // for task entries: the instance's method
    };
    std::vector<CoverEntry> cover;
    std::map<std::string, std::string> grounding; // var -> object
};

class MethodLibrary {
public:
    const std::vector<HtnMethod> &methods() const { return methods_; }
    const HtnMethod *find(const std::string &id) const;
    const MethodProvenance *provenance(const std::string &id) const;
    std::vector<const HtnMethod *> for_task(const std::string &task_name) const;

    // stores the method unless a rename-equivalent variant exists; returns
    // the surviving id and whether it was fresh
    std::pair<std::string, bool> add(HtnMethod m, MethodProvenance prov);

    std::size_t size() const { return methods_.size(); }

    std::string to_json() const;
    static MethodLibrary from_json(const std::string &text);
    std::string to_shop(const pddl::DisplayPool &pool) const;

private:
    std::vector<HtnMethod> methods_;
    std::map<std::string, MethodProvenance> provenance_;
};

bool rename_equivalent(const HtnMethod &a, const HtnMethod &b);

// One indexed method instance: the subtrace span it was learned over, its
// ground task and regressed preconditions, and the cover used. begin > end
// marks a trivial (empty) span.
struct Instance {
    std::string method_id;
    int ordinal = 0;
    int begin = 0, end = 0;
    GroundTask task;
    std::vector<AtomId> ground_pre;
    struct CoverEntry {
        bool is_task = false;
        int pos_begin = 0, pos_end = 0;
        int child = -1; // index into the instance log for task entries
    };
    std::vector<CoverEntry> cover;
};

using InstanceLog = std::vector<Instance>;

struct LearnStats {
    int new_methods = 0;
    int duplicate_steps = 0;
    int skipped_goal_unsat = 0;
    int skipped_inconsistent = 0;
};

// CurricuLearn: walk the curriculum in order; for each step, cover the
// subtrace with previously indexed instances, regress the task's goals
// through the cover, lift the result into a method, and index the instance.
LearnStats curriculearn(const Grounding &g, TaskRegistry &tasks, const PlanTrace &trace,
                        const Curriculum &curriculum, MethodLibrary &library,
                        const std::string &problem_name, InstanceLog *instance_log = nullptr);

// Provenance-guided decomposition of one logged instance back into the exact
// subtrace it was learned from.
std::vector<ground::ActionId> reconstruct(const InstanceLog &log, int instance_index,
                                          const PlanTrace &trace);

} // namespace learning

#endif
