#include "pddl.hpp"

#include "util.hpp"

#include <cassert>
#include <set>
#include <sstream>

namespace pddl {

namespace {

struct Token {
    enum Kind { LParen, RParen, Symbol, End } kind;
    std::string text; // as seen in the input
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string &text) : text_(text) {}

    Token next() {
        skip_ws();
        if (pos_ >= text_.size())
            return {Token::End, "", line_, col_};
        char c = text_[pos_];
        if (c == '(') {
            Token t{Token::LParen, "(", line_, col_};
            advance();
            return t;
        }
        if (c == ')') {
            Token t{Token::RParen, ")", line_, col_};
            advance();
            return t;
        }
        Token t{Token::Symbol, "", line_, col_};
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';') {
            t.text += text_[pos_];
            advance();
        }
        return t;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string &text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct SExpr {
    bool is_list = false;
    std::string atom; // original spelling
    std::vector<SExpr> items;
    int line = 0, col = 0;

    const std::string lc() const { return util::lowercase(atom); }
};

SExpr parse_sexpr(Lexer &lex, const Token &first) {
    if (first.kind == Token::Symbol) {
        SExpr e;
        e.atom = first.text;
        e.line = first.line;
        e.col = first.col;
        return e;
    }
    if (first.kind != Token::LParen)
        throw PddlError(ErrorKind::Syntax, "expected '(' or symbol", first.line, first.col);
    SExpr e;
    e.is_list = true;
    e.line = first.line;
    e.col = first.col;
    while (true) {
        Token t = lex.next();
        if (t.kind == Token::RParen)
            return e;
        if (t.kind == Token::End)
            throw PddlError(ErrorKind::Syntax, "unexpected end of input, missing ')'", t.line, t.col);
        e.items.push_back(parse_sexpr(lex, t));
    }
}

SExpr parse_top(const std::string &text) {
    Lexer lex(text);
    Token t = lex.next();
    if (t.kind == Token::End)
        throw PddlError(ErrorKind::Syntax, "empty input", t.line, t.col);
    SExpr e = parse_sexpr(lex, t);
    Token rest = lex.next();
    if (rest.kind != Token::End)
        throw PddlError(ErrorKind::Syntax, "trailing content after top-level form", rest.line, rest.col);
    if (!e.is_list)
        throw PddlError(ErrorKind::Syntax, "expected a list at top level", e.line, e.col);
    return e;
}

void expect_keyword(const SExpr &e, const char *kw) {
    if (e.items.empty() || e.items[0].is_list || e.items[0].lc() != kw)
        throw PddlError(ErrorKind::Syntax, std::string("expected ") + kw, e.line, e.col);
}

// Parse a PDDL typed list "a b - t c d - u e": untyped trailing entries
// default to "object".
std::vector<std::pair<SExpr, std::string>> parse_typed_list(const std::vector<SExpr> &items,
                                                            std::size_t from) {
    std::vector<std::pair<SExpr, std::string>> out;
    std::vector<SExpr> pending;
    for (std::size_t i = from; i < items.size(); ++i) {
        const SExpr &e = items[i];
        if (!e.is_list && e.atom == "-") {
            if (i + 1 >= items.size())
                throw PddlError(ErrorKind::Syntax, "dangling '-' in typed list", e.line, e.col);
            const SExpr &ty = items[++i];
            if (ty.is_list)
                throw PddlError(ErrorKind::Syntax, "expected type name after '-'", ty.line, ty.col);
            for (auto &p : pending)
                out.emplace_back(p, ty.lc());
            pending.clear();
        } else {
            pending.push_back(e);
        }
    }
    for (auto &p : pending)
        out.emplace_back(p, "object");
    return out;
}

class DomainBuilder {
public:
    DomainModel build(const SExpr &top) {
        expect_keyword(top, "define");
        if (top.items.size() < 2 || !top.items[1].is_list || top.items[1].items.size() != 2 ||
            top.items[1].items[0].lc() != "domain")
            throw PddlError(ErrorKind::Syntax, "expected (domain <name>)", top.line, top.col);
        dom_.name = top.items[1].items[1].lc();
        dom_.display.remember(dom_.name, top.items[1].items[1].atom);

        for (std::size_t i = 2; i < top.items.size(); ++i) {
            const SExpr &sec = top.items[i];
            if (!sec.is_list || sec.items.empty() || sec.items[0].is_list)
                throw PddlError(ErrorKind::Syntax, "expected a domain section", sec.line, sec.col);
            const std::string kw = sec.items[0].lc();
            if (kw == ":requirements")
                parse_requirements(sec);
            else if (kw == ":types")
                parse_types(sec);
            else if (kw == ":constants")
                throw PddlError(ErrorKind::UnsupportedRequirement,
                                "domain constants are not supported", sec.line, sec.col);
            else if (kw == ":predicates")
                parse_predicates(sec);
            else if (kw == ":action")
                parse_action(sec);
            else
                throw PddlError(ErrorKind::Syntax, "unknown domain section " + kw, sec.line, sec.col);
        }
        return std::move(dom_);
    }

private:
    void parse_requirements(const SExpr &sec) {
        for (std::size_t i = 1; i < sec.items.size(); ++i) {
            const std::string req = sec.items[i].lc();
            if (req != ":strips" && req != ":typing")
                throw PddlError(ErrorKind::UnsupportedRequirement,
                                "unsupported requirement " + req, sec.items[i].line,
                                sec.items[i].col);
        }
    }

    void parse_types(const SExpr &sec) {
        auto typed = parse_typed_list(sec.items, 1);
        for (auto &[e, parent] : typed) {
            const std::string t = e.lc();
            if (t == "object")
                continue;
            if (dom_.types.parent.count(t))
                throw PddlError(ErrorKind::Duplicate, "type declared twice: " + t, e.line, e.col);
            dom_.types.parent[t] = parent;
            dom_.display.remember(t, e.atom);
        }
        // parents must themselves be declared (or be "object"); forward
        // references within one :types section are allowed
        for (auto &[t, p] : dom_.types.parent)
            if (!dom_.types.declared(p))
                throw PddlError(ErrorKind::UndeclaredType, "undeclared parent type " + p);
        // reject cycles
        for (auto &[t, p] : dom_.types.parent) {
            std::string cur = t;
            std::set<std::string> seen;
            while (cur != "object") {
                if (!seen.insert(cur).second)
                    throw PddlError(ErrorKind::UndeclaredType, "type hierarchy cycle at " + cur);
                cur = dom_.types.parent.at(cur);
            }
        }
    }

    std::vector<Param> parse_params(const SExpr &list) {
        std::vector<Param> params;
        auto typed = parse_typed_list(list.items, 0);
        std::set<std::string> seen;
        for (auto &[e, ty] : typed) {
            if (e.is_list || e.atom.empty() || e.atom[0] != '?')
                throw PddlError(ErrorKind::Syntax, "expected variable", e.line, e.col);
            std::string v = e.lc();
            if (!seen.insert(v).second)
                throw PddlError(ErrorKind::Duplicate, "repeated parameter " + v, e.line, e.col);
            if (!dom_.types.declared(ty))
                throw PddlError(ErrorKind::UndeclaredType, "undeclared type " + ty, e.line, e.col);
            params.push_back({v, ty});
        }
        return params;
    }

    void parse_predicates(const SExpr &sec) {
        for (std::size_t i = 1; i < sec.items.size(); ++i) {
            const SExpr &p = sec.items[i];
            if (!p.is_list || p.items.empty() || p.items[0].is_list)
                throw PddlError(ErrorKind::Syntax, "expected predicate declaration", p.line, p.col);
            PredicateSchema schema;
            schema.name = p.items[0].lc();
            if (dom_.find_predicate(schema.name))
                throw PddlError(ErrorKind::Duplicate, "predicate declared twice: " + schema.name,
                                p.line, p.col);
            dom_.display.remember(schema.name, p.items[0].atom);
            SExpr rest;
            rest.is_list = true;
            rest.items.assign(p.items.begin() + 1, p.items.end());
            schema.params = parse_params(rest);
            dom_.predicates.push_back(std::move(schema));
        }
    }

    Literal parse_literal(const SExpr &e, const std::vector<Param> &params) {
        if (!e.is_list || e.items.empty() || e.items[0].is_list)
            throw PddlError(ErrorKind::Syntax, "expected atom", e.line, e.col);
        Literal lit;
        lit.pred = e.items[0].lc();
        const PredicateSchema *schema = dom_.find_predicate(lit.pred);
        if (!schema)
            throw PddlError(ErrorKind::UndeclaredPredicate, "undeclared predicate " + lit.pred,
                            e.line, e.col);
        if (e.items.size() - 1 != schema->params.size())
            throw PddlError(ErrorKind::Arity, "wrong arity for " + lit.pred, e.line, e.col);
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const SExpr &arg = e.items[i];
            if (arg.is_list)
                throw PddlError(ErrorKind::Syntax, "expected argument", arg.line, arg.col);
            std::string v = arg.lc();
            if (v.empty() || v[0] != '?')
                throw PddlError(ErrorKind::UnsupportedRequirement,
                                "constants in action schemas are not supported", arg.line, arg.col);
            bool found = false;
            std::string vtype;
            for (const Param &p : params)
                if (p.var == v) {
                    found = true;
                    vtype = p.type;
                }
            if (!found)
                throw PddlError(ErrorKind::Syntax, "variable not in parameters: " + v, arg.line,
                                arg.col);
            if (!dom_.types.is_subtype(vtype, schema->params[i - 1].type))
                throw PddlError(ErrorKind::IllTyped,
                                "argument " + v + " of " + lit.pred + " has incompatible type",
                                arg.line, arg.col);
            lit.args.push_back(v);
        }
        return lit;
    }

    // precondition / effect formula: atom, (and ...), (not atom) in effects
    void parse_formula(const SExpr &e, const std::vector<Param> &params, bool allow_negation,
                       std::vector<Literal> &pos, std::vector<Literal> *neg) {
        if (!e.is_list || e.items.empty())
            throw PddlError(ErrorKind::Syntax, "expected formula", e.line, e.col);
        const std::string head = e.items[0].is_list ? "" : e.items[0].lc();
        if (head == "and") {
            for (std::size_t i = 1; i < e.items.size(); ++i)
                parse_formula(e.items[i], params, allow_negation, pos, neg);
        } else if (head == "not") {
            if (!allow_negation || !neg)
                throw PddlError(ErrorKind::UnsupportedRequirement,
                                "negative preconditions are not supported (:negative-preconditions)",
                                e.line, e.col);
            if (e.items.size() != 2)
                throw PddlError(ErrorKind::Syntax, "(not ...) takes one atom", e.line, e.col);
            neg->push_back(parse_literal(e.items[1], params));
        } else if (head == "or" || head == "forall" || head == "exists" || head == "when" ||
                   head == "imply") {
            throw PddlError(ErrorKind::UnsupportedRequirement,
                            "unsupported connective " + head + " (requires :adl)", e.line, e.col);
        } else {
            pos.push_back(parse_literal(e, params));
        }
    }

    void parse_action(const SExpr &sec) {
        ActionSchema a;
        if (sec.items.size() < 2 || sec.items[1].is_list)
            throw PddlError(ErrorKind::Syntax, "expected action name", sec.line, sec.col);
        a.name = sec.items[1].lc();
        if (dom_.find_action(a.name))
            throw PddlError(ErrorKind::Duplicate, "action declared twice: " + a.name, sec.line,
                            sec.col);
        dom_.display.remember(a.name, sec.items[1].atom);
        for (std::size_t i = 2; i + 1 < sec.items.size(); i += 2) {
            const std::string kw = sec.items[i].is_list ? "" : sec.items[i].lc();
            const SExpr &val = sec.items[i + 1];
            if (kw == ":parameters") {
                if (!val.is_list)
                    throw PddlError(ErrorKind::Syntax, "expected parameter list", val.line, val.col);
                a.params = parse_params(val);
            } else if (kw == ":precondition") {
                parse_formula(val, a.params, false, a.preconditions, nullptr);
            } else if (kw == ":effect") {
                parse_formula(val, a.params, true, a.add_effects, &a.del_effects);
            } else {
                throw PddlError(ErrorKind::Syntax, "unknown action keyword " + kw, sec.items[i].line,
                                sec.items[i].col);
            }
        }
        // syntactic add/del overlap is always a modelling error
        for (const Literal &l : a.add_effects)
            for (const Literal &d : a.del_effects)
                if (l == d)
                    throw PddlError(ErrorKind::Duplicate,
                                    "atom both added and deleted in " + a.name, sec.line, sec.col);
        dom_.actions.push_back(std::move(a));
    }

    DomainModel dom_;
};

class ProblemBuilder {
public:
    explicit ProblemBuilder(const DomainModel &dom) : dom_(dom) {}

    ProblemModel build(const SExpr &top) {
        expect_keyword(top, "define");
        if (top.items.size() < 2 || !top.items[1].is_list || top.items[1].items.size() != 2 ||
            top.items[1].items[0].lc() != "problem")
            throw PddlError(ErrorKind::Syntax, "expected (problem <name>)", top.line, top.col);
        prob_.name = top.items[1].items[1].lc();
        prob_.display.remember(prob_.name, top.items[1].items[1].atom);

        for (std::size_t i = 2; i < top.items.size(); ++i) {
            const SExpr &sec = top.items[i];
            if (!sec.is_list || sec.items.empty() || sec.items[0].is_list)
                throw PddlError(ErrorKind::Syntax, "expected a problem section", sec.line, sec.col);
            const std::string kw = sec.items[0].lc();
            if (kw == ":domain") {
                if (sec.items.size() != 2)
                    throw PddlError(ErrorKind::Syntax, "expected (:domain <name>)", sec.line, sec.col);
                if (sec.items[1].lc() != dom_.name)
                    throw PddlError(ErrorKind::DomainMismatch,
                                    "problem references domain " + sec.items[1].lc() +
                                        " but was parsed against " + dom_.name,
                                    sec.line, sec.col);
            } else if (kw == ":objects") {
                parse_objects(sec);
            } else if (kw == ":init") {
                for (std::size_t k = 1; k < sec.items.size(); ++k)
                    add_unique(prob_.init, parse_ground_atom(sec.items[k]));
            } else if (kw == ":goal") {
                if (sec.items.size() != 2)
                    throw PddlError(ErrorKind::Syntax, "expected one goal formula", sec.line, sec.col);
                parse_goal(sec.items[1]);
            } else {
                throw PddlError(ErrorKind::Syntax, "unknown problem section " + kw, sec.line,
                                sec.col);
            }
        }
        return std::move(prob_);
    }

private:
    void parse_objects(const SExpr &sec) {
        auto typed = parse_typed_list(sec.items, 1);
        for (auto &[e, ty] : typed) {
            if (e.is_list)
                throw PddlError(ErrorKind::Syntax, "expected object name", e.line, e.col);
            if (!dom_.types.declared(ty))
                throw PddlError(ErrorKind::UndeclaredType, "undeclared type " + ty, e.line, e.col);
            std::string name = e.lc();
            if (prob_.find_object(name))
                throw PddlError(ErrorKind::Duplicate, "object declared twice: " + name, e.line,
                                e.col);
            prob_.objects.push_back({name, ty});
            prob_.display.remember(name, e.atom);
        }
    }

    GroundAtom parse_ground_atom(const SExpr &e) {
        if (!e.is_list || e.items.empty() || e.items[0].is_list)
            throw PddlError(ErrorKind::Syntax, "expected ground atom", e.line, e.col);
        GroundAtom atom;
        atom.pred = e.items[0].lc();
        const PredicateSchema *schema = dom_.find_predicate(atom.pred);
        if (!schema)
            throw PddlError(ErrorKind::UndeclaredPredicate, "undeclared predicate " + atom.pred,
                            e.line, e.col);
        if (e.items.size() - 1 != schema->params.size())
            throw PddlError(ErrorKind::Arity, "wrong arity for " + atom.pred, e.line, e.col);
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const SExpr &arg = e.items[i];
            std::string name = arg.lc();
            const TypedObject *obj = prob_.find_object(name);
            if (!obj)
                throw PddlError(ErrorKind::UndeclaredObject, "unknown object " + name, arg.line,
                                arg.col);
            if (!dom_.types.is_subtype(obj->type, schema->params[i - 1].type))
                throw PddlError(ErrorKind::IllTyped,
                                "object " + name + " has type " + obj->type +
                                    ", incompatible with " + atom.pred,
                                arg.line, arg.col);
            atom.args.push_back(name);
        }
        return atom;
    }

    void parse_goal(const SExpr &e) {
        if (!e.is_list || e.items.empty())
            throw PddlError(ErrorKind::Syntax, "expected goal formula", e.line, e.col);
        if (!e.items[0].is_list && e.items[0].lc() == "and") {
            for (std::size_t i = 1; i < e.items.size(); ++i)
                parse_goal(e.items[i]);
        } else if (!e.items[0].is_list && (e.items[0].lc() == "not" || e.items[0].lc() == "or")) {
            throw PddlError(ErrorKind::UnsupportedRequirement,
                            "only conjunctive positive goals are supported", e.line, e.col);
        } else {
            add_unique(prob_.goal, parse_ground_atom(e));
        }
    }

    static void add_unique(std::vector<GroundAtom> &v, GroundAtom a) {
        for (const auto &x : v)
            if (x == a)
                return;
        v.push_back(std::move(a));
    }

    const DomainModel &dom_;
    ProblemModel prob_;
};

std::string print_typed(const std::string &name, const std::string &type,
                        const DisplayPool &pool) {
    return pool.display(name) + " - " + pool.display(type);
}

} // namespace

std::string GroundAtom::str() const {
    std::string out = "(" + pred;
    for (const auto &a : args)
        out += " " + a;
    return out + ")";
}

std::string GroundAtom::str(const DisplayPool &pool) const {
    std::string out = "(" + pool.display(pred);
    for (const auto &a : args)
        out += " " + pool.display(a);
    return out + ")";
}

const PredicateSchema *DomainModel::find_predicate(const std::string &lc) const {
    for (const auto &p : predicates)
        if (p.name == lc)
            return &p;
    return nullptr;
}

const ActionSchema *DomainModel::find_action(const std::string &lc) const {
    for (const auto &a : actions)
        if (a.name == lc)
            return &a;
    return nullptr;
}

const TypedObject *ProblemModel::find_object(const std::string &lc) const {
    for (const auto &o : objects)
        if (o.name == lc)
            return &o;
    return nullptr;
}

DomainModel parse_domain(const std::string &text) {
    return DomainBuilder().build(parse_top(text));
}

ProblemModel parse_problem(const std::string &text, const DomainModel &dom) {
    return ProblemBuilder(dom).build(parse_top(text));
}

std::string print_domain(const DomainModel &dom) {
    const DisplayPool &dp = dom.display;
    std::ostringstream os;
    os << "(define (domain " << dp.display(dom.name) << ")\n";
    os << "  (:requirements :strips :typing)\n";
    if (!dom.types.parent.empty()) {
        os << "  (:types";
        for (const auto &[t, p] : dom.types.parent)
            os << " " << print_typed(t, p, dp);
        os << ")\n";
    }
    os << "  (:predicates";
    for (const auto &pr : dom.predicates) {
        os << "\n    (" << dp.display(pr.name);
        for (const auto &pa : pr.params)
            os << " " << print_typed(pa.var, pa.type, dp);
        os << ")";
    }
    os << ")\n";
    auto lit = [&](const Literal &l) {
        std::string out = "(" + dp.display(l.pred);
        for (const auto &a : l.args)
            out += " " + dp.display(a);
        return out + ")";
    };
    for (const auto &a : dom.actions) {
        os << "  (:action " << dp.display(a.name) << "\n    :parameters (";
        for (std::size_t i = 0; i < a.params.size(); ++i)
            os << (i ? " " : "") << print_typed(a.params[i].var, a.params[i].type, dp);
        os << ")\n    :precondition (and";
        for (const auto &l : a.preconditions)
            os << " " << lit(l);
        os << ")\n    :effect (and";
        for (const auto &l : a.add_effects)
            os << " " << lit(l);
        for (const auto &l : a.del_effects)
            os << " (not " << lit(l) << ")";
        os << "))\n";
    }
    os << ")\n";
    return os.str();
}

std::string print_problem(const ProblemModel &prob, const DomainModel &dom) {
    const DisplayPool &dp = prob.display;
    std::ostringstream os;
    os << "(define (problem " << dp.display(prob.name) << ")\n";
    os << "  (:domain " << dom.display.display(dom.name) << ")\n";
    os << "  (:objects";
    for (const auto &o : prob.objects)
        os << " " << dp.display(o.name) << " - " << dom.display.display(o.type);
    os << ")\n  (:init";
    for (const auto &a : prob.init)
        os << " " << a.str(dp);
    os << ")\n  (:goal (and";
    for (const auto &a : prob.goal)
        os << " " << a.str(dp);
    os << ")))\n";
    return os.str();
}

std::vector<GroundAtom> parse_plan_lines(const std::string &text) {
    std::vector<GroundAtom> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string trimmed;
        for (char c : line) {
            if (c == ';')
                break;
            trimmed += c;
        }
        Lexer lex(trimmed);
        Token t = lex.next();
        if (t.kind == Token::End)
            continue;
        SExpr e = parse_sexpr(lex, t);
        if (!e.is_list || e.items.empty() || e.items[0].is_list)
            throw PddlError(ErrorKind::Syntax, "expected (!action args...)", lineno, 1);
        GroundAtom a;
        a.pred = e.items[0].lc();
        if (!a.pred.empty() && a.pred[0] == '!')
            a.pred = a.pred.substr(1);
        for (std::size_t i = 1; i < e.items.size(); ++i)
            a.args.push_back(e.items[i].lc());
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace pddl
