#include "afv/formula.hpp"

#include <algorithm>

namespace afv {

TermPtr mk_var(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Var;
    t->name = std::move(name);
    return t;
}

TermPtr mk_const(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Const;
    t->name = std::move(name);
    return t;
}

TermPtr mk_app(std::string head, std::vector<TermPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::App;
    t->name = std::move(head);
    t->args = std::move(args);
    return t;
}

TermPtr mk_bool_ref(long long index) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::BoolRef;
    t->index = index;
    return t;
}

TermPtr mk_bool_of(FormulaPtr shell) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::BoolOf;
    t->shell = std::move(shell);
    return t;
}

FormulaPtr mk_atom(std::string rel, std::vector<TermPtr> terms, long long param) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Atom;
    f->rel = std::move(rel);
    f->param = param;
    f->terms = std::move(terms);
    return f;
}

FormulaPtr mk_true() { return mk_atom("true", {}); }
FormulaPtr mk_false() { return mk_atom("false", {}); }

bool is_true(const FormulaPtr& f) {
    return f->kind == Formula::Kind::Atom && f->rel == "true";
}
bool is_false(const FormulaPtr& f) {
    return f->kind == Formula::Kind::Atom && f->rel == "false";
}

FormulaPtr mk_eq(TermPtr a, TermPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Eq;
    f->terms = {std::move(a), std::move(b)};
    return f;
}

namespace {
FormulaPtr mk_node(Formula::Kind k, std::vector<FormulaPtr> kids) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->kids = std::move(kids);
    return f;
}
}  // namespace

FormulaPtr mk_not(FormulaPtr a) { return mk_node(Formula::Kind::Not, {std::move(a)}); }
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b) {
    return mk_node(Formula::Kind::And, {std::move(a), std::move(b)});
}
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b) {
    return mk_node(Formula::Kind::Or, {std::move(a), std::move(b)});
}
FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b) {
    return mk_node(Formula::Kind::Implies, {std::move(a), std::move(b)});
}

FormulaPtr mk_exists(std::string var, std::string sort, FormulaPtr body) {
    auto f = mk_node(Formula::Kind::Exists, {std::move(body)});
    auto g = std::const_pointer_cast<Formula>(f);
    g->var = std::move(var);
    g->sort = std::move(sort);
    return f;
}

FormulaPtr mk_forall(std::string var, std::string sort, FormulaPtr body) {
    auto f = mk_node(Formula::Kind::Forall, {std::move(body)});
    auto g = std::const_pointer_cast<Formula>(f);
    g->var = std::move(var);
    g->sort = std::move(sort);
    return f;
}

FormulaPtr mk_and_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return mk_true();
    FormulaPtr acc = fs[0];
    for (size_t i = 1; i < fs.size(); ++i) acc = mk_and(acc, fs[i]);
    return acc;
}

FormulaPtr mk_or_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return mk_false();
    FormulaPtr acc = fs[0];
    for (size_t i = 1; i < fs.size(); ++i) acc = mk_or(acc, fs[i]);
    return acc;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Term::Kind::Var:
        case Term::Kind::Const:
            return a->name == b->name;
        case Term::Kind::BoolRef:
            return a->index == b->index;
        case Term::Kind::BoolOf:
            return formula_equal(a->shell, b->shell);
        case Term::Kind::App: {
            if (a->name != b->name || a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i) {
                if (!term_equal(a->args[i], b->args[i])) return false;
            }
            return true;
        }
    }
    return false;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->rel != b->rel || a->param != b->param) return false;
    if (a->var != b->var || a->sort != b->sort) return false;
    if (a->terms.size() != b->terms.size() || a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->terms.size(); ++i) {
        if (!term_equal(a->terms[i], b->terms[i])) return false;
    }
    for (size_t i = 0; i < a->kids.size(); ++i) {
        if (!formula_equal(a->kids[i], b->kids[i])) return false;
    }
    return true;
}

namespace {

void term_free_vars(const TermPtr& t, std::vector<std::string>& out, std::set<std::string>& seen,
                    const std::set<std::string>& bound);

void formula_free_vars(const FormulaPtr& f, std::vector<std::string>& out,
                       std::set<std::string>& seen, std::set<std::string> bound) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            for (const auto& t : f->terms) term_free_vars(t, out, seen, bound);
            break;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            bound.insert(f->var);
            formula_free_vars(f->kids[0], out, seen, bound);
            break;
        default:
            for (const auto& k : f->kids) formula_free_vars(k, out, seen, bound);
            break;
    }
}

void term_free_vars(const TermPtr& t, std::vector<std::string>& out, std::set<std::string>& seen,
                    const std::set<std::string>& bound) {
    switch (t->kind) {
        case Term::Kind::Var:
            if (!bound.count(t->name) && seen.insert(t->name).second) out.push_back(t->name);
            break;
        case Term::Kind::App:
            for (const auto& a : t->args) term_free_vars(a, out, seen, bound);
            break;
        case Term::Kind::BoolOf:
            formula_free_vars(t->shell, out, seen, bound);
            break;
        default:
            break;
    }
}

}  // namespace

std::vector<std::string> free_vars(const FormulaPtr& f) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    formula_free_vars(f, out, seen, {});
    return out;
}

std::vector<std::string> free_vars(const TermPtr& t) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    term_free_vars(t, out, seen, {});
    return out;
}

namespace {

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
    std::string cand = base + "'";
    while (avoid.count(cand)) cand += "'";
    return cand;
}

}  // namespace

TermPtr substitute_term(const TermPtr& t, const std::map<std::string, TermPtr>& bindings) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = bindings.find(t->name);
            return it == bindings.end() ? t : it->second;
        }
        case Term::Kind::App: {
            std::vector<TermPtr> args;
            args.reserve(t->args.size());
            bool changed = false;
            for (const auto& a : t->args) {
                args.push_back(substitute_term(a, bindings));
                changed = changed || args.back() != a;
            }
            return changed ? mk_app(t->name, std::move(args)) : t;
        }
        case Term::Kind::BoolOf: {
            FormulaPtr s = substitute(t->shell, bindings);
            return s == t->shell ? t : mk_bool_of(s);
        }
        default:
            return t;
    }
}

FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, TermPtr>& bindings) {
    if (bindings.empty()) return f;
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq: {
            std::vector<TermPtr> terms;
            terms.reserve(f->terms.size());
            bool changed = false;
            for (const auto& t : f->terms) {
                terms.push_back(substitute_term(t, bindings));
                changed = changed || terms.back() != t;
            }
            if (!changed) return f;
            if (f->kind == Formula::Kind::Eq) return mk_eq(terms[0], terms[1]);
            return mk_atom(f->rel, std::move(terms), f->param);
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::map<std::string, TermPtr> inner = bindings;
            inner.erase(f->var);
            std::string var = f->var;
            FormulaPtr body = f->kids[0];
            // Rename the binder if an inserted term would capture it.
            std::set<std::string> incoming;
            for (const auto& [k, v] : inner) {
                for (const auto& n : free_vars(v)) incoming.insert(n);
            }
            if (incoming.count(var)) {
                std::set<std::string> avoid = incoming;
                for (const auto& n : free_vars(body)) avoid.insert(n);
                for (const auto& [k, v] : inner) avoid.insert(k);
                std::string renamed = fresh_name(var, avoid);
                std::map<std::string, TermPtr> rename{{var, mk_var(renamed)}};
                body = substitute(body, rename);
                var = renamed;
            }
            FormulaPtr nb = substitute(body, inner);
            if (nb == f->kids[0] && var == f->var) return f;
            return f->kind == Formula::Kind::Exists ? mk_exists(var, f->sort, nb)
                                                    : mk_forall(var, f->sort, nb);
        }
        default: {
            std::vector<FormulaPtr> kids;
            kids.reserve(f->kids.size());
            bool changed = false;
            for (const auto& k : f->kids) {
                kids.push_back(substitute(k, bindings));
                changed = changed || kids.back() != k;
            }
            if (!changed) return f;
            auto g = std::make_shared<Formula>(*f);
            g->kids = std::move(kids);
            return g;
        }
    }
}

FormulaPtr relativize(const FormulaPtr& f, const std::map<std::string, FormulaPtr>& guards) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            return f;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            auto it = guards.find(f->sort);
            if (it == guards.end()) {
                throw std::invalid_argument("relativize: no guard for quantified sort '" + f->sort + "'");
            }
            const FormulaPtr& guard = it->second;
            std::vector<std::string> gv = free_vars(guard);
            if (gv.size() != 1) {
                throw std::invalid_argument("relativize: guard for sort '" + f->sort +
                                            "' must have exactly one free variable");
            }
            FormulaPtr instantiated = substitute(guard, {{gv[0], mk_var(f->var)}});
            FormulaPtr body = relativize(f->kids[0], guards);
            if (f->kind == Formula::Kind::Exists) {
                return mk_exists(f->var, f->sort, mk_and(instantiated, body));
            }
            return mk_forall(f->var, f->sort, mk_implies(instantiated, body));
        }
        default: {
            std::vector<FormulaPtr> kids;
            kids.reserve(f->kids.size());
            for (const auto& k : f->kids) kids.push_back(relativize(k, guards));
            auto g = std::make_shared<Formula>(*f);
            g->kids = std::move(kids);
            return g;
        }
    }
}

int quantifier_count(const FormulaPtr& f) {
    int n = (f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::Forall) ? 1 : 0;
    for (const auto& k : f->kids) n += quantifier_count(k);
    for (const auto& t : f->terms) {
        if (t->kind == Term::Kind::BoolOf) n += quantifier_count(t->shell);
    }
    return n;
}

int quantifier_depth(const FormulaPtr& f) {
    int self = (f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::Forall) ? 1 : 0;
    int deepest = 0;
    for (const auto& k : f->kids) deepest = std::max(deepest, quantifier_depth(k));
    for (const auto& t : f->terms) {
        if (t->kind == Term::Kind::BoolOf) deepest = std::max(deepest, quantifier_depth(t->shell));
    }
    return self + deepest;
}

namespace {

Signature make_boolean_signature() {
    Signature s;
    s.name = "boolean";
    s.default_sort = "bool";
    return s;
}

Signature make_ring_signature() {
    Signature s;
    s.name = "ring";
    s.sorts = {"field"};
    s.functions["+"] = {{{"field", "field"}, "field"}};
    s.functions["-"] = {{{"field", "field"}, "field"}, {{"field"}, "field"}};
    s.functions["*"] = {{{"field", "field"}, "field"}};
    s.constants["0"] = "field";
    s.constants["1"] = "field";
    s.relations["V"] = {"field"};
    s.literal_sort = "field";
    s.default_sort = "field";
    return s;
}

Signature make_hyper_signature() {
    Signature s;
    s.name = "hyper";
    s.sorts = {"hyper"};
    s.functions["*"] = {{{"hyper", "hyper"}, "hyper"}};
    s.functions["inv"] = {{{"hyper"}, "hyper"}};
    s.constants["0"] = "hyper";
    s.constants["1"] = "hyper";
    s.relations["Sigma"] = {"hyper", "hyper", "hyper"};
    s.relations["Pdelta"] = {"hyper"};
    s.default_sort = "hyper";
    return s;
}

Signature make_monoid_signature() {
    Signature s;
    s.name = "monoid";
    s.sorts = {"mon"};
    s.functions["+"] = {{{"mon", "mon"}, "mon"}};
    s.functions["meet"] = {{{"mon", "mon"}, "mon"}};
    s.functions["join"] = {{{"mon", "mon"}, "mon"}};
    s.constants["0"] = "mon";
    s.constants["inf"] = "mon";
    s.literal_sort = "mon";
    s.default_sort = "mon";
    return s;
}

}  // namespace

const Signature& Signature::ring() {
    static const Signature s = make_ring_signature();
    return s;
}
const Signature& Signature::hyper() {
    static const Signature s = make_hyper_signature();
    return s;
}
const Signature& Signature::monoid() {
    static const Signature s = make_monoid_signature();
    return s;
}
const Signature& Signature::boolean() {
    static const Signature s = make_boolean_signature();
    return s;
}

}  // namespace afv
