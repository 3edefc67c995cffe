#ifndef HTNLEARN_PDDL_HPP
#define HTNLEARN_PDDL_HPP

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pddl {

enum class ErrorKind {
    Syntax,
    UnsupportedRequirement,
    UndeclaredType,
    UndeclaredPredicate,
    UndeclaredObject,
    DomainMismatch,
    IllTyped,
    Duplicate,
    Arity,
};

class PddlError : public std::runtime_error {
public:
    PddlError(ErrorKind kind, std::string msg, int line = 0, int col = 0)
        : std::runtime_error(format(msg, line, col)), kind(kind), line(line), col(col) {}

    ErrorKind kind;
    int line;
    int col;

private:
    static std::string format(const std::string &msg, int line, int col) {
        if (line <= 0)
            return msg;
        return std::to_string(line) + ":" + std::to_string(col) + ": " + msg;
    }
};

// All identifiers are stored lowercase; the pool remembers the first-seen
// spelling for printing.
class DisplayPool {
public:
    void remember(const std::string &lc, const std::string &seen) {
        display_.emplace(lc, seen);
    }
    const std::string &display(const std::string &lc) const {
        auto it = display_.find(lc);
        return it == display_.end() ? lc : it->second;
    }

private:
    std::unordered_map<std::string, std::string> display_;
};

struct Param {
    std::string var;  // includes leading '?'
    std::string type;

    bool operator==(const Param &o) const { return var == o.var && type == o.type; }
};

// Positive literal; args are variables ('?'-prefixed) or constants.
struct Literal {
    std::string pred;
    std::vector<std::string> args;

    bool operator==(const Literal &o) const { return pred == o.pred && args == o.args; }
    bool operator<(const Literal &o) const {
        if (pred != o.pred)
            return pred < o.pred;
        return args < o.args;
    }
};

struct GroundAtom {
    std::string pred;
    std::vector<std::string> args;

    bool operator==(const GroundAtom &o) const { return pred == o.pred && args == o.args; }
    bool operator<(const GroundAtom &o) const {
        if (pred != o.pred)
            return pred < o.pred;
        return args < o.args;
    }
    std::string str() const;
    std::string str(const DisplayPool &pool) const;
};

struct GroundAtomHash {
    std::size_t operator()(const GroundAtom &a) const {
        std::size_t h = std::hash<std::string>()(a.pred);
        for (const auto &s : a.args)
            h = h * 1000003 + std::hash<std::string>()(s);
        return h;
    }
};

struct PredicateSchema {
    std::string name;
    std::vector<Param> params;
};

struct ActionSchema {
    std::string name;
    std::vector<Param> params;
    std::vector<Literal> preconditions;
    std::vector<Literal> add_effects;
    std::vector<Literal> del_effects;
};

struct TypeHierarchy {
    // every type except "object" has exactly one parent
    std::map<std::string, std::string> parent;

    bool declared(const std::string &t) const {
        return t == "object" || parent.count(t);
    }
    bool is_subtype(const std::string &t, const std::string &ancestor) const {
        std::string cur = t;
        while (true) {
            if (cur == ancestor)
                return true;
            if (cur == "object")
                return false;
            auto it = parent.find(cur);
            if (it == parent.end())
                return false;
            cur = it->second;
        }
    }
};

struct DomainModel {
    std::string name;
    TypeHierarchy types;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;
    DisplayPool display;

    const PredicateSchema *find_predicate(const std::string &lc) const;
    const ActionSchema *find_action(const std::string &lc) const;
};

struct TypedObject {
    std::string name;
    std::string type;
};

struct ProblemModel {
    std::string name;
    std::string domain_name;
    std::vector<TypedObject> objects;
    std::vector<GroundAtom> init;
    std::vector<GroundAtom> goal;
    DisplayPool display;

    const TypedObject *find_object(const std::string &lc) const;
};

DomainModel parse_domain(const std::string &text);
ProblemModel parse_problem(const std::string &text, const DomainModel &dom);

std::string print_domain(const DomainModel &dom);
std::string print_problem(const ProblemModel &prob, const DomainModel &dom);

// Plan files: one action per line, "(!name arg1 arg2 ...)".
std::vector<GroundAtom> parse_plan_lines(const std::string &text);

} // namespace pddl

#endif
