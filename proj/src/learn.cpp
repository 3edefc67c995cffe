#include "learn.hpp"

#include "../vendor/json.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace learning {

using nlohmann::ordered_json;

std::string HtnMethod::shop_str(const pddl::DisplayPool &pool) const {
    std::ostringstream os;
    os << "(:method (" << pool.display(task_name);
    for (const auto &p : head_params)
        os << " " << p.var;
    os << ")\n  :preconditions (and";
    for (const auto &l : preconditions) {
        os << " (" << pool.display(l.pred);
        for (const auto &a : l.args)
            os << " " << a;
        os << ")";
    }
    os << ")\n  :subtasks (";
    for (std::size_t i = 0; i < subtasks.size(); ++i) {
        const auto &s = subtasks[i];
        os << (i ? " (" : "(") << (s.kind == Subtask::Kind::Primitive ? "!" : "")
           << pool.display(s.name);
        for (const auto &a : s.args)
            os << " " << a;
        os << ")";
    }
    os << "))";
    return os.str();
}

const HtnMethod *MethodLibrary::find(const std::string &id) const {
    for (const auto &m : methods_)
        if (m.id == id)
            return &m;
    return nullptr;
}

const MethodProvenance *MethodLibrary::provenance(const std::string &id) const {
    auto it = provenance_.find(id);
    return it == provenance_.end() ? nullptr : &it->second;
}

std::vector<const HtnMethod *> MethodLibrary::for_task(const std::string &task_name) const {
    std::vector<const HtnMethod *> out;
    for (const auto &m : methods_)
        if (m.task_name == task_name)
            out.push_back(&m);
    return out;
}

std::pair<std::string, bool> MethodLibrary::add(HtnMethod m, MethodProvenance prov) {
    for (const auto &existing : methods_)
        if (existing.task_name == m.task_name && rename_equivalent(existing, m))
            return {existing.id, false};
    char buf[16];
    std::snprintf(buf, sizeof buf, "m-%04d", static_cast<int>(methods_.size() + 1));
    m.id = buf;
    prov.ordinal = static_cast<int>(methods_.size());
    provenance_.emplace(m.id, std::move(prov));
    methods_.push_back(std::move(m));
    return {methods_.back().id, true};
}

namespace {

struct Renaming {
    std::map<std::string, std::string> fwd, rev;

    bool bind(const std::string &a, const std::string &b) {
        auto f = fwd.find(a);
        if (f != fwd.end())
            return f->second == b;
        auto r = rev.find(b);
        if (r != rev.end())
            return false; // bijectivity
        fwd.emplace(a, b);
        rev.emplace(b, a);
        return true;
    }
};

bool match_literals(const std::vector<pddl::Literal> &a, const std::vector<pddl::Literal> &b,
                    std::size_t idx, std::vector<char> &used, Renaming &sigma) {
    if (idx == a.size())
        return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (used[j] || a[idx].pred != b[j].pred || a[idx].args.size() != b[j].args.size())
            continue;
        Renaming saved = sigma;
        bool ok = true;
        for (std::size_t k = 0; k < a[idx].args.size() && ok; ++k)
            ok = sigma.bind(a[idx].args[k], b[j].args[k]);
        if (ok) {
            used[j] = 1;
            if (match_literals(a, b, idx + 1, used, sigma))
                return true;
            used[j] = 0;
        }
        sigma = saved;
    }
    return false;
}

} // namespace

bool rename_equivalent(const HtnMethod &a, const HtnMethod &b) {
    if (a.task_name != b.task_name || a.head_params.size() != b.head_params.size() ||
        a.method_vars.size() != b.method_vars.size() ||
        a.preconditions.size() != b.preconditions.size() || a.subtasks.size() != b.subtasks.size())
        return false;
    Renaming sigma;
    for (std::size_t i = 0; i < a.head_params.size(); ++i) {
        if (a.head_params[i].type != b.head_params[i].type)
            return false;
        if (!sigma.bind(a.head_params[i].var, b.head_params[i].var))
            return false;
    }
    for (std::size_t i = 0; i < a.subtasks.size(); ++i) {
        const auto &sa = a.subtasks[i];
        const auto &sb = b.subtasks[i];
        if (sa.kind != sb.kind || sa.name != sb.name || sa.args.size() != sb.args.size())
            return false;
        for (std::size_t k = 0; k < sa.args.size(); ++k)
            if (!sigma.bind(sa.args[k], sb.args[k]))
                return false;
    }
    std::vector<char> used(b.preconditions.size(), 0);
    return match_literals(a.preconditions, b.preconditions, 0, used, sigma);
}

namespace {

// variable assignment used while lifting one method
class Lifting {
public:
    explicit Lifting(const Grounding &g) : g_(g) {}

    const std::string &var_for(const std::string &object) {
        auto it = map_.find(object);
        if (it != map_.end())
            return it->second;
        std::string v = "?v" + std::to_string(map_.size());
        auto res = map_.emplace(object, std::move(v));
        order_.push_back(res.first->first);
        return res.first->second;
    }

    pddl::Param param_for(const std::string &object) {
        std::string v = var_for(object);
        return {v, g_.object_type(object)};
    }

    const std::vector<std::string> &objects_in_order() const { return order_; }

private:
    const Grounding &g_;
    std::map<std::string, std::string> map_;
    std::vector<std::string> order_;
};

} // namespace

LearnStats curriculearn(const Grounding &g, TaskRegistry &tasks, const PlanTrace &trace,
                        const Curriculum &curriculum, MethodLibrary &library,
                        const std::string &problem_name, InstanceLog *instance_log) {
    LearnStats stats;
    InstanceLog index; // X, initialized empty per call

    for (const auto &step : curriculum.steps) {
        const int b = step.begin, e = step.end;
        if (b < 1 || e > trace.length() || b > e + 1)
            throw std::runtime_error("curriculum step does not index the trace");

        std::vector<AtomId> goal_ids;
        bool goals_ok = true;
        for (const auto &atom : tasks.instance_goals(step.task)) {
            AtomId id = g.find_atom(atom);
            if (id < 0 || !trace.state(e).contains(id)) {
                goals_ok = false;
                break;
            }
            goal_ids.push_back(id);
        }
        if (!goals_ok) {
            ++stats.skipped_goal_unsat;
            continue;
        }

        // cover [b, e] left to right, preferring the widest indexed instance
        // that starts at the current position (never the span itself)
        std::vector<Instance::CoverEntry> cover;
        for (int p = b; p <= e;) {
            int chosen = -1;
            for (std::size_t x = 0; x < index.size(); ++x) {
                const Instance &inst = index[x];
                if (inst.begin != p || inst.begin > inst.end || inst.end > e)
                    continue;
                if (inst.begin == b && inst.end == e)
                    continue;
                if (chosen < 0 || inst.end > index[chosen].end ||
                    (inst.end == index[chosen].end && inst.ordinal < index[chosen].ordinal))
                    chosen = static_cast<int>(x);
            }
            if (chosen >= 0) {
                cover.push_back({true, p, index[chosen].end, chosen});
                p = index[chosen].end + 1;
            } else {
                cover.push_back({false, p, p, -1});
                ++p;
            }
        }

        // goal regression right-to-left through the cover
        bool inconsistent = false;
        std::set<AtomId> R(goal_ids.begin(), goal_ids.end());
        for (auto it = cover.rbegin(); it != cover.rend() && !inconsistent; ++it) {
            if (!it->is_task) {
                const ground::GroundAction &a = g.actions()[trace.action(it->pos_begin)];
                for (AtomId d : a.del)
                    if (R.count(d)) {
                        inconsistent = true; // needed after this step but clobbered by it
                        break;
                    }
                if (inconsistent)
                    break;
                for (AtomId x : a.add)
                    R.erase(x);
                R.insert(a.pre.begin(), a.pre.end());
            } else {
                const Instance &inst = index[it->child];
                const ground::State &before = trace.state(inst.begin - 1);
                const ground::State &after = trace.state(inst.end);
                std::vector<AtomId> current(R.begin(), R.end());
                for (AtomId r : current) {
                    if (after.contains(r) && !before.contains(r))
                        R.erase(r); // provided by the instance's net effect
                    else if (!after.contains(r) && before.contains(r))
                        inconsistent = true;
                }
                if (inconsistent)
                    break;
                R.insert(inst.ground_pre.begin(), inst.ground_pre.end());
            }
        }
        if (!inconsistent)
            for (AtomId r : R)
                if (!trace.state(b - 1).contains(r)) {
                    inconsistent = true; // regression must land in the start state
                    break;
                }
        if (inconsistent) {
            ++stats.skipped_inconsistent;
            continue;
        }

        // lift: constants become typed variables, consistently across the
        // head, the subtasks and the preconditions
        Lifting lift(g);
        HtnMethod m;
        m.task_name = step.task.name;
        for (const auto &obj : step.task.args)
            m.head_params.push_back(lift.param_for(obj));
        for (const auto &entry : cover) {
            HtnMethod::Subtask st;
            if (entry.is_task) {
                const Instance &inst = index[entry.child];
                st.kind = HtnMethod::Subtask::Kind::Task;
                st.name = inst.task.name;
                for (const auto &obj : inst.task.args)
                    st.args.push_back(lift.var_for(obj));
            } else {
                const ground::GroundAction &a = g.actions()[trace.action(entry.pos_begin)];
                st.kind = HtnMethod::Subtask::Kind::Primitive;
                st.name = a.schema;
                for (const auto &obj : a.args)
                    st.args.push_back(lift.var_for(obj));
            }
            m.subtasks.push_back(std::move(st));
        }
        std::vector<AtomId> pre_sorted(R.begin(), R.end());
        std::sort(pre_sorted.begin(), pre_sorted.end(),
                  [&](AtomId x, AtomId y) { return g.atom_str(x) < g.atom_str(y); });
        for (AtomId r : pre_sorted) {
            const pddl::GroundAtom &atom = g.atom(r);
            pddl::Literal lit;
            lit.pred = atom.pred;
            for (const auto &obj : atom.args)
                lit.args.push_back(lift.var_for(obj));
            m.preconditions.push_back(std::move(lit));
        }
        std::sort(m.preconditions.begin(), m.preconditions.end());
        std::set<std::string> head_vars;
        for (const auto &p : m.head_params)
            head_vars.insert(p.var);
        for (const auto &obj : lift.objects_in_order()) {
            std::string v = lift.var_for(obj);
            if (!head_vars.count(v)) {
                m.method_vars.push_back(lift.param_for(obj));
                head_vars.insert(v);
            }
        }

        MethodProvenance prov;
        prov.problem = problem_name;
        prov.begin = b;
        prov.end = e;
        for (const auto &obj : lift.objects_in_order())
            prov.grounding[lift.var_for(obj)] = obj;
        for (const auto &entry : cover) {
            MethodProvenance::CoverEntry pe;
            pe.is_task = entry.is_task;
            pe.begin = entry.pos_begin;
            pe.end = entry.pos_end;
            if (entry.is_task)
                pe.method_id = index[entry.child].method_id;
            prov.cover.push_back(std::move(pe));
        }

        auto [id, fresh] = library.add(std::move(m), std::move(prov));
        if (fresh)
            ++stats.new_methods;
        else
            ++stats.duplicate_steps;

        // index the instance either way: the span is reusable as a subtask
        // regardless of whether its method was novel
        Instance inst;
        inst.method_id = id;
        inst.ordinal = library.provenance(id)->ordinal;
        inst.begin = b;
        inst.end = e;
        inst.task = step.task;
        inst.ground_pre.assign(R.begin(), R.end());
        inst.cover = cover;
        index.push_back(std::move(inst));
    }

    if (instance_log)
        *instance_log = std::move(index);
    return stats;
}

std::vector<ground::ActionId> reconstruct(const InstanceLog &log, int instance_index,
                                          const PlanTrace &trace) {
    std::vector<ground::ActionId> out;
    const Instance &inst = log.at(static_cast<std::size_t>(instance_index));
    for (const auto &entry : inst.cover) {
        if (entry.is_task) {
            auto sub = reconstruct(log, entry.child, trace);
            out.insert(out.end(), sub.begin(), sub.end());
        } else {
            out.push_back(trace.action(entry.pos_begin));
        }
    }
    return out;
}

namespace {

std::string literal_str(const pddl::Literal &l) {
    std::string out = "(" + l.pred;
    for (const auto &a : l.args)
        out += " " + a;
    return out + ")";
}

pddl::Literal literal_parse(const std::string &s) {
    pddl::Literal l;
    std::string body = s;
    if (!body.empty() && body.front() == '(')
        body = body.substr(1, body.size() - 2);
    std::istringstream is(body);
    is >> l.pred;
    std::string tok;
    while (is >> tok)
        l.args.push_back(tok);
    return l;
}

} // namespace

std::string MethodLibrary::to_json() const {
    ordered_json j;
    j["methods"] = ordered_json::array();
    for (const auto &m : methods_) {
        ordered_json jm;
        jm["id"] = m.id;
        jm["head"]["name"] = m.task_name;
        jm["head"]["params"] = ordered_json::array();
        for (const auto &p : m.head_params)
            jm["head"]["params"].push_back({{"var", p.var}, {"type", p.type}});
        jm["vars"] = ordered_json::array();
        for (const auto &p : m.method_vars)
            jm["vars"].push_back({{"var", p.var}, {"type", p.type}});
        jm["preconditions"] = ordered_json::array();
        for (const auto &l : m.preconditions)
            jm["preconditions"].push_back(literal_str(l));
        jm["subtasks"] = ordered_json::array();
        for (const auto &s : m.subtasks)
            jm["subtasks"].push_back(
                {{"kind", s.kind == HtnMethod::Subtask::Kind::Primitive ? "primitive" : "task"},
                 {"name", s.name},
                 {"args", s.args}});
        const MethodProvenance &prov = provenance_.at(m.id);
        jm["provenance"]["problem"] = prov.problem;
        jm["provenance"]["begin"] = prov.begin;
        jm["provenance"]["end"] = prov.end;
        jm["provenance"]["ordinal"] = prov.ordinal;
        jm["provenance"]["grounding"] = prov.grounding;
        jm["provenance"]["cover"] = ordered_json::array();
        for (const auto &c : prov.cover)
            jm["provenance"]["cover"].push_back({{"kind", c.is_task ? "task" : "primitive"},
                                                 {"begin", c.begin},
                                                 {"end", c.end},
                                                 {"method", c.method_id}});
        j["methods"].push_back(std::move(jm));
    }
    return j.dump(2) + "\n";
}

MethodLibrary MethodLibrary::from_json(const std::string &text) {
    MethodLibrary lib;
    ordered_json j = ordered_json::parse(text);
    for (const auto &jm : j.at("methods")) {
        HtnMethod m;
        m.id = jm.at("id").get<std::string>();
        m.task_name = jm.at("head").at("name").get<std::string>();
        for (const auto &p : jm.at("head").at("params"))
            m.head_params.push_back(
                {p.at("var").get<std::string>(), p.at("type").get<std::string>()});
        for (const auto &p : jm.at("vars"))
            m.method_vars.push_back(
                {p.at("var").get<std::string>(), p.at("type").get<std::string>()});
        for (const auto &l : jm.at("preconditions"))
            m.preconditions.push_back(literal_parse(l.get<std::string>()));
        for (const auto &s : jm.at("subtasks")) {
            HtnMethod::Subtask st;
            st.kind = s.at("kind").get<std::string>() == "primitive"
                          ? HtnMethod::Subtask::Kind::Primitive
                          : HtnMethod::Subtask::Kind::Task;
            st.name = s.at("name").get<std::string>();
            for (const auto &a : s.at("args"))
                st.args.push_back(a.get<std::string>());
            m.subtasks.push_back(std::move(st));
        }
        MethodProvenance prov;
        const auto &jp = jm.at("provenance");
        prov.problem = jp.at("problem").get<std::string>();
        prov.begin = jp.at("begin").get<int>();
        prov.end = jp.at("end").get<int>();
        prov.ordinal = jp.at("ordinal").get<int>();
        for (const auto &[k, v] : jp.at("grounding").items())
            prov.grounding[k] = v.get<std::string>();
        for (const auto &c : jp.at("cover")) {
            MethodProvenance::CoverEntry pe;
            pe.is_task = c.at("kind").get<std::string>() == "task";
            pe.begin = c.at("begin").get<int>();
            pe.end = c.at("end").get<int>();
            pe.method_id = c.at("method").get<std::string>();
            prov.cover.push_back(std::move(pe));
        }
        lib.provenance_.emplace(m.id, std::move(prov));
        lib.methods_.push_back(std::move(m));
    }
    return lib;
}

std::string MethodLibrary::to_shop(const pddl::DisplayPool &pool) const {
    std::string out;
    for (const auto &m : methods_) {
        out += "; " + m.id + "\n";
        out += m.shop_str(pool) + "\n\n";
    }
    return out;
}

} // namespace learning
