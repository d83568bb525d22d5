#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace afv {

// Many-sorted first-order syntax shared by every engine module. One unified
// tree covers ring-sorted, hyperring-sorted, monoid-sorted and Boolean-sorted
// formulas; the Boolean sort is built into every signature because reduced
// forms mix Boolean conditions with local-sort subformulas.

struct Term;
struct Formula;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Term {
    enum class Kind {
        Var,      // named variable
        Const,    // named constant or numeric literal
        App,      // function application
        BoolRef,  // slot reference naming a local-condition value: (bv i)
        BoolOf,   // Boolean value of a local formula: (bv-of phi)
    };
    Kind kind;
    std::string name;           // Var name, Const name, App head
    std::vector<TermPtr> args;  // App only
    long long index = 0;        // BoolRef slot
    FormulaPtr shell;           // BoolOf payload
};

struct Formula {
    enum class Kind { Atom, Eq, Not, And, Or, Implies, Exists, Forall };
    Kind kind;
    std::string rel;             // Atom: relation name ("fin", "cj", "le", "V", "Sigma", ...)
    long long param = 0;         // Atom: numeric parameter (the j of cj, the k of pow-atoms)
    std::vector<TermPtr> terms;  // Atom arguments; Eq stores {lhs, rhs}
    std::vector<FormulaPtr> kids;  // Not: 1; And/Or/Implies: 2; quantifiers: 1
    std::string var, sort;       // quantifier binder
};

TermPtr mk_var(std::string name);
TermPtr mk_const(std::string name);
TermPtr mk_app(std::string head, std::vector<TermPtr> args);
TermPtr mk_bool_ref(long long index);
TermPtr mk_bool_of(FormulaPtr shell);

FormulaPtr mk_atom(std::string rel, std::vector<TermPtr> terms, long long param = 0);
FormulaPtr mk_true();
FormulaPtr mk_false();
FormulaPtr mk_eq(TermPtr a, TermPtr b);
FormulaPtr mk_not(FormulaPtr a);
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_exists(std::string var, std::string sort, FormulaPtr body);
FormulaPtr mk_forall(std::string var, std::string sort, FormulaPtr body);
FormulaPtr mk_and_all(const std::vector<FormulaPtr>& fs);  // empty conjunction = true
FormulaPtr mk_or_all(const std::vector<FormulaPtr>& fs);   // empty disjunction = false

bool is_true(const FormulaPtr& f);
bool is_false(const FormulaPtr& f);

bool term_equal(const TermPtr& a, const TermPtr& b);
bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

// Free variables, in first-occurrence order.
std::vector<std::string> free_vars(const FormulaPtr& f);
std::vector<std::string> free_vars(const TermPtr& t);

// Capture-avoiding substitution; bound variables that would capture a free
// variable of an inserted term are renamed with prime suffixes.
TermPtr substitute_term(const TermPtr& t, const std::map<std::string, TermPtr>& bindings);
FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, TermPtr>& bindings);

// Guarding every quantifier of a sort: Exists(y, s, B) becomes
// Exists(y, s, guard_s(y) AND B) and Forall dually with Implies. Each guard is
// a formula with exactly one free variable, which is substituted by the bound
// variable. Throws std::invalid_argument when a quantified sort has no guard.
FormulaPtr relativize(const FormulaPtr& f, const std::map<std::string, FormulaPtr>& guards);

int quantifier_count(const FormulaPtr& f);
int quantifier_depth(const FormulaPtr& f);

// Signature: declared sorts/relations/functions/constants used by the parser
// for well-sortedness. The Boolean layer (sort "bool", terms bzero/bone/
// meet/join/compl, relations fin/le and the parameterized cj) is built in.
struct Signature {
    struct Fn {
        std::vector<std::string> args;
        std::string result;
    };
    std::string name;
    std::set<std::string> sorts;  // user sorts; "bool" is implicit
    std::map<std::string, std::vector<std::string>> relations;
    std::map<std::string, std::vector<Fn>> functions;  // overload sets
    std::map<std::string, std::string> constants;
    std::string literal_sort;  // sort given to numeric literals ("" = disallowed)
    std::string default_sort;  // sort inferred for otherwise unconstrained variables

    static const Signature& ring();      // sort "field": + - *, constants 0 1, relations V, (pk k .)
    static const Signature& hyper();     // sort "hyper": * inv, constants 0 1, relations Sigma Pdelta
    static const Signature& monoid();    // sort "mon": + meet join, constants 0 inf
    static const Signature& boolean();   // the pure Boolean-algebra language
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// S-expression reader; returns a well-sorted formula or throws ParseError /
// SortError. Bound variables that would shadow a visible variable are renamed
// with prime suffixes during parsing.
FormulaPtr parse_formula(const std::string& text, const Signature& sig);
TermPtr parse_term(const std::string& text, const Signature& sig);

// Canonical s-expression rendering; parse_formula(render_formula(f)) is
// structurally equal to f.
std::string render_formula(const FormulaPtr& f);
std::string render_term(const TermPtr& t);

// Well-sortedness check used by the parser and available on programmatically
// built trees; var_sorts carries known sorts of free variables and is extended
// by inference.
void check_sorts(const FormulaPtr& f, const Signature& sig,
                 std::map<std::string, std::string>& var_sorts);

}  // namespace afv
