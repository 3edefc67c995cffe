#include "curricula.hpp"

#include "../vendor/json.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace curricula {

using nlohmann::ordered_json;

std::string GroundTask::str(const pddl::DisplayPool &pool) const {
    std::string out = pool.display(name) + "(";
    for (std::size_t i = 0; i < args.size(); ++i)
        out += (i ? " " : "") + pool.display(args[i]);
    return out + ")";
}

std::string TaskRegistry::task_name_for(const std::string &predicate) {
    return "achieve-" + predicate;
}

std::string TaskRegistry::predicate_for(const std::string &task_name) {
    if (task_name.rfind("achieve-", 0) == 0)
        return task_name.substr(8);
    return "";
}

const AnnotatedTask &TaskRegistry::make_annotated_task(const pddl::DomainModel &dom,
                                                       const std::string &predicate) {
    std::string name = task_name_for(predicate);
    auto it = tasks_.find(name);
    if (it != tasks_.end())
        return it->second;
    const pddl::PredicateSchema *schema = dom.find_predicate(predicate);
    if (!schema)
        throw std::runtime_error("no predicate schema for task " + name);
    AnnotatedTask t;
    t.name = name;
    t.params = schema->params;
    pddl::Literal goal;
    goal.pred = predicate;
    for (const auto &p : schema->params)
        goal.args.push_back(p.var);
    t.goals.push_back(std::move(goal));
    return tasks_.emplace(name, std::move(t)).first->second;
}

GroundTask TaskRegistry::ground_instance(const Grounding &g, AtomId landmark) {
    const pddl::GroundAtom &atom = g.atom(landmark);
    make_annotated_task(g.domain(), atom.pred);
    GroundTask inst;
    inst.name = task_name_for(atom.pred);
    inst.args = atom.args;
    return inst;
}

const AnnotatedTask *TaskRegistry::find(const std::string &task_name) const {
    auto it = tasks_.find(task_name);
    return it == tasks_.end() ? nullptr : &it->second;
}

std::vector<pddl::GroundAtom> TaskRegistry::instance_goals(const GroundTask &t) const {
    const AnnotatedTask *task = find(t.name);
    if (!task)
        throw std::runtime_error("unknown task " + t.name);
    if (task->params.size() != t.args.size())
        throw std::runtime_error("arity mismatch for task " + t.name);
    std::vector<pddl::GroundAtom> out;
    for (const auto &lit : task->goals) {
        pddl::GroundAtom a;
        a.pred = lit.pred;
        for (const auto &var : lit.args) {
            bool found = false;
            for (std::size_t i = 0; i < task->params.size(); ++i)
                if (task->params[i].var == var) {
                    a.args.push_back(t.args[i]);
                    found = true;
                    break;
                }
            assert(found);
            (void)found;
        }
        out.push_back(std::move(a));
    }
    return out;
}

namespace {

void emit_block(Curriculum &curriculum, int end, const GroundTask &task, int max_len) {
    for (int k = end; k >= 1; --k) {
        if (max_len > 0 && end - k + 1 > max_len)
            break;
        curriculum.steps.push_back({k, end, task});
    }
}

// extends the trace with a freshly planned segment; returns the new length
int extend_trace(const Grounding &g, PlanTrace &trace, const std::vector<ActionId> &segment) {
    for (ActionId a : segment) {
        trace.trajectory.push_back(gamma_apply(g, trace.trajectory.back(), g.actions()[a]));
        trace.actions.push_back(a);
    }
    return trace.length();
}

} // namespace

GenResult curricugen(const Grounding &g, TaskRegistry &tasks, const GenConfig &cfg) {
    GenResult out;
    util::Stopwatch sw;

    out.graph = landmarks::extract_landmarks(g);
    if (cfg.reasonable_orders)
        out.graph = landmarks::add_reasonable_orders(g, out.graph);
    out.sequence = landmarks::topo_sequence(g, out.graph);
    out.timing.landmark_seconds = sw.seconds();

    sw.restart();
    out.trace.trajectory.push_back(g.initial_state());
    std::set<std::string> blocked_goals; // goal atoms that got a step of any kind

    auto plan_to = [&](AtomId v) {
        search::SearchResult r =
            search::classical_plan(g, out.trace.trajectory.back(), {v}, cfg.search);
        if (r.status == search::SearchStatus::BudgetExceeded)
            throw CurricugenError(CurricugenError::Kind::BudgetExceeded,
                                  "search budget exceeded while planning to " + g.atom_str(v));
        if (!r.solved())
            throw CurricugenError(CurricugenError::Kind::LandmarkUnreachable,
                                  "no plan reaches landmark " + g.atom_str(v));
        return r.plan;
    };

    auto is_goal_atom = [&](AtomId v) {
        return std::find(g.goal_atoms().begin(), g.goal_atoms().end(), v) != g.goal_atoms().end();
    };

    for (AtomId v : out.sequence) {
        GroundTask task = tasks.ground_instance(g, v);
        if (out.trace.trajectory.back().contains(v)) {
            // landmark incidentally achieved: no block, but goals still need
            // a decomposition entry point
            if (is_goal_atom(v)) {
                out.curriculum.steps.push_back({out.trace.length() + 1, out.trace.length(), task});
                blocked_goals.insert(g.atom_str(v));
            }
            continue;
        }
        std::vector<ActionId> segment = plan_to(v);
        int i = extend_trace(g, out.trace, segment);
        emit_block(out.curriculum, i, task, cfg.max_subtrace_len);
        if (is_goal_atom(v))
            blocked_goals.insert(g.atom_str(v));
    }

    if (cfg.repair_goal) {
        // later subplans may have clobbered an earlier goal atom; re-achieve
        // them in dependency order until the conjunction holds
        std::vector<AtomId> goal_order = landmarks::topo_goal_order(g, out.graph);
        int rounds = 0;
        const int max_rounds = 2 * static_cast<int>(g.goal_atoms().size()) + 2;
        while (true) {
            AtomId pending = -1;
            for (AtomId v : goal_order)
                if (!out.trace.trajectory.back().contains(v)) {
                    pending = v;
                    break;
                }
            if (pending < 0)
                break;
            if (++rounds > max_rounds)
                throw CurricugenError(CurricugenError::Kind::GoalUnreachable,
                                      "goal conjunction not restored: " + g.atom_str(pending));
            std::vector<ActionId> segment = plan_to(pending);
            int i = extend_trace(g, out.trace, segment);
            GroundTask task = tasks.ground_instance(g, pending);
            emit_block(out.curriculum, i, task, cfg.max_subtrace_len);
            blocked_goals.insert(g.atom_str(pending));
        }
    }

    // goal atoms already true in s0 never enter the sequence; give each one a
    // trivial step so the learner mints an empty-subtask method for it
    for (AtomId v : landmarks::topo_goal_order(g, out.graph)) {
        if (blocked_goals.count(g.atom_str(v)))
            continue;
        GroundTask task = tasks.ground_instance(g, v);
        out.curriculum.steps.push_back({1, 0, task});
    }
    out.timing.plan_seconds = sw.seconds();
    return out;
}

std::string curriculum_to_json(const Grounding &g, const PlanTrace &trace,
                               const Curriculum &curriculum) {
    ordered_json j;
    j["trace"] = ordered_json::array();
    for (ActionId a : trace.actions)
        j["trace"].push_back(g.actions()[a].str(g.display()));
    j["steps"] = ordered_json::array();
    for (const auto &s : curriculum.steps) {
        ordered_json step;
        step["begin"] = s.begin;
        step["end"] = s.end;
        step["task"] = {{"name", s.task.name}, {"args", s.task.args}};
        j["steps"].push_back(step);
    }
    return j.dump(2) + "\n";
}

std::pair<PlanTrace, Curriculum> curriculum_from_json(const Grounding &g, TaskRegistry &tasks,
                                                      const std::string &json_text) {
    ordered_json j = ordered_json::parse(json_text);
    PlanTrace trace;
    trace.trajectory.push_back(g.initial_state());
    std::string plan_text;
    for (const auto &line : j.at("trace"))
        plan_text += line.get<std::string>() + "\n";
    std::vector<ActionId> plan = ground::resolve_plan(g, pddl::parse_plan_lines(plan_text));
    extend_trace(g, trace, plan);

    Curriculum curriculum;
    for (const auto &step : j.at("steps")) {
        CurriculumStep s;
        s.begin = step.at("begin").get<int>();
        s.end = step.at("end").get<int>();
        s.task.name = util::lowercase(step.at("task").at("name").get<std::string>());
        for (const auto &a : step.at("task").at("args"))
            s.task.args.push_back(util::lowercase(a.get<std::string>()));
        std::string pred = TaskRegistry::predicate_for(s.task.name);
        if (pred.empty() || !g.domain().find_predicate(pred))
            throw std::runtime_error("cannot derive goals for task " + s.task.name);
        tasks.make_annotated_task(g.domain(), pred);
        if (s.end > trace.length() || s.begin < 1 || s.begin > s.end + 1)
            throw std::runtime_error("curriculum step out of range");
        curriculum.steps.push_back(std::move(s));
    }
    return {std::move(trace), std::move(curriculum)};
}

} // namespace curricula
