#include <map>
#include <random>
#include <string>
#include <vector>

#include "afv/formula.hpp"
#include "doctest.h"

using namespace afv;

TEST_CASE("parse/render round-trip over the ring language") {
    const Signature& ring = Signature::ring();
    for (const char* s : {
             "(exists (x field) (= (* x x) x))",
             "(forall (x field) (implies (V x) (V (* x x))))",
             "(= (+ x y) 1)",
             "(V (- x))",
             "(= (- x y) (+ x (- y)))",
             "(= (pow 3 x) 1)",
             "(and (V x) (or (V y) (not (V z))))",
             "(= x 5/7)",
             "(= x -2)",
             "true",
             "false",
             "(implies false (V x))",
         }) {
        FormulaPtr f = parse_formula(s, ring);
        CHECK(render_formula(f) == s);
        CHECK(formula_equal(parse_formula(render_formula(f), ring), f));
    }
}

TEST_CASE("parse/render round-trip over the Boolean language") {
    const Signature& boolean = Signature::boolean();
    for (const char* s : {
             "(fin (bv 0))",
             "(exists (x bool) (and (fin x) (cj 2 x)))",
             "(exists (x bool) (and (le x y) (and (cj 1 x) (fin x))))",
             "(forall (x bool) (implies (fin (meet x y)) (fin x)))",
             "(cj 2 (meet x (compl y)))",
             "(= (join x bzero) x)",
             "(le (meet (bv 0) (bv 1)) (join x bone))",
         }) {
        FormulaPtr f = parse_formula(s, boolean);
        CHECK(render_formula(f) == s);
        CHECK(formula_equal(parse_formula(render_formula(f), boolean), f));
    }
}

TEST_CASE("Boolean layer and local shells are available inside the ring language") {
    const Signature& ring = Signature::ring();
    const char* s = "(fin (bv-of (not (V y))))";
    FormulaPtr f = parse_formula(s, ring);
    CHECK(render_formula(f) == s);

    // The shell's variable is visible from outside.
    std::vector<std::string> fv = free_vars(f);
    REQUIRE(fv.size() == 1);
    CHECK(fv[0] == "y");

    // Shell contents are sort-checked in the same signature.
    CHECK_THROWS_AS(parse_formula("(fin (bv-of (V (fin x))))", ring), SortError);
}

TEST_CASE("sort errors are detected") {
    const Signature& ring = Signature::ring();
    const Signature& boolean = Signature::boolean();
    // A relation cannot be used as a term.
    CHECK_THROWS_AS(parse_formula("(= x (cj 2 y))", ring), SortError);
    CHECK_THROWS_AS(parse_formula("(= x (fin y))", ring), SortError);
    // Sort clash across =.
    CHECK_THROWS_AS(parse_formula("(= 1 (meet x y))", ring), SortError);
    // Boolean-only operations on field-sorted terms.
    CHECK_THROWS_AS(parse_formula("(fin (+ x y))", ring), SortError);
    // One variable cannot carry two sorts.
    CHECK_THROWS_AS(parse_formula("(and (V x) (fin x))", ring), SortError);
    // Numeric literals have no home in the pure Boolean language.
    CHECK_THROWS_AS(parse_formula("(fin 3)", boolean), SortError);
}

TEST_CASE("parse errors carry positions and reject malformed input") {
    const Signature& ring = Signature::ring();
    CHECK_THROWS_AS(parse_formula("(V x", ring), ParseError);
    CHECK_THROWS_AS(parse_formula("(V x))", ring), ParseError);
    CHECK_THROWS_AS(parse_formula("(frob x)", ring), ParseError);
    CHECK_THROWS_AS(parse_formula("(cj -1 x)", Signature::boolean()), ParseError);
    CHECK_THROWS_AS(parse_formula("(pow 1 x)", ring), ParseError);
    CHECK_THROWS_AS(parse_formula("", ring), ParseError);
    try {
        parse_formula("(and (V x) (V y)", ring);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

TEST_CASE("substitution avoids capture") {
    const Signature& ring = Signature::ring();
    FormulaPtr f = parse_formula("(exists (x field) (= x y))", ring);
    FormulaPtr g = substitute(f, {{"y", mk_var("x")}});
    CHECK(render_formula(g) == "(exists (x' field) (= x' x))");

    // No capture risk: plain replacement.
    FormulaPtr h = substitute(parse_formula("(= x y)", ring), {{"y", mk_const("0")}});
    CHECK(render_formula(h) == "(= x 0)");

    // Bound occurrences are untouched.
    FormulaPtr k = substitute(parse_formula("(exists (x field) (= x 1))", ring),
                              {{"x", mk_const("0")}});
    CHECK(render_formula(k) == "(exists (x field) (= x 1))");
}

TEST_CASE("relativization inserts one guard per quantifier") {
    const Signature& ring = Signature::ring();
    std::map<std::string, FormulaPtr> guards;
    guards["field"] = parse_formula("(fin (bv-of (not (V w))))", ring);

    FormulaPtr ex = parse_formula("(exists (y field) (= y 0))", ring);
    CHECK(render_formula(relativize(ex, guards)) ==
          "(exists (y field) (and (fin (bv-of (not (V y)))) (= y 0)))");

    FormulaPtr fa = parse_formula("(forall (y field) (V y))", ring);
    CHECK(render_formula(relativize(fa, guards)) ==
          "(forall (y field) (implies (fin (bv-of (not (V y)))) (V y)))");

    // Quantifier-free formulas pass through unchanged.
    FormulaPtr qf = parse_formula("(V x)", ring);
    CHECK(formula_equal(relativize(qf, guards), qf));

    // Nested quantifiers each get their own guard copy.
    FormulaPtr nested = parse_formula("(exists (a field) (forall (b field) (= a b)))", ring);
    FormulaPtr rel = relativize(nested, guards);
    CHECK(render_formula(rel) ==
          "(exists (a field) (and (fin (bv-of (not (V a)))) "
          "(forall (b field) (implies (fin (bv-of (not (V b)))) (= a b)))))");

    // A quantified sort without a guard is an error.
    std::map<std::string, FormulaPtr> empty;
    CHECK_THROWS_AS(relativize(ex, empty), std::invalid_argument);
}

TEST_CASE("free variables come back in first-occurrence order") {
    const Signature& ring = Signature::ring();
    FormulaPtr f = parse_formula("(and (V z) (= y (+ z x)))", ring);
    std::vector<std::string> fv = free_vars(f);
    REQUIRE(fv.size() == 3);
    CHECK(fv[0] == "z");
    CHECK(fv[1] == "y");
    CHECK(fv[2] == "x");

    FormulaPtr g = parse_formula("(exists (x field) (= x y))", ring);
    std::vector<std::string> gv = free_vars(g);
    REQUIRE(gv.size() == 1);
    CHECK(gv[0] == "y");
}

TEST_CASE("shadowing binders are renamed during parsing") {
    const Signature& ring = Signature::ring();
    FormulaPtr f = parse_formula(
        "(exists (x field) (and (V x) (exists (x field) (= x 0))))", ring);
    CHECK(render_formula(f) ==
          "(exists (x field) (and (V x) (exists (x' field) (= x' 0))))");

    FormulaPtr g = parse_formula("(and (V x) (exists (x field) (= x 1)))", ring);
    CHECK(render_formula(g) == "(and (V x) (exists (x' field) (= x' 1)))");

    // Without shadowing the binder keeps its name.
    FormulaPtr h = parse_formula("(exists (y field) (= y 0))", ring);
    CHECK(render_formula(h) == "(exists (y field) (= y 0))");
}

TEST_CASE("quantifier statistics") {
    const Signature& ring = Signature::ring();
    FormulaPtr f = parse_formula(
        "(and (exists (a field) (V a)) (forall (b field) (exists (c field) (= b c))))", ring);
    CHECK(quantifier_count(f) == 3);
    CHECK(quantifier_depth(f) == 2);
    CHECK(quantifier_count(parse_formula("(V x)", ring)) == 0);
    CHECK(quantifier_depth(parse_formula("(V x)", ring)) == 0);
}

namespace {

// Random well-sorted formula generator for the round-trip property.
struct Gen {
    std::mt19937 rng;
    const Signature& sig = Signature::ring();
    std::vector<std::string> field_vars{"x", "y", "z"};
    std::vector<std::string> bool_vars{"u", "v"};
    explicit Gen(unsigned seed) : rng(seed) {}

    int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

    TermPtr field_term(int depth) {
        if (depth <= 0 || pick(3) == 0) {
            switch (pick(4)) {
                case 0: return mk_var(field_vars[static_cast<std::size_t>(pick(3))]);
                case 1: return mk_const("0");
                case 2: return mk_const("1");
                default: return mk_const("2/3");
            }
        }
        switch (pick(4)) {
            case 0: return mk_app("+", {field_term(depth - 1), field_term(depth - 1)});
            case 1: return mk_app("*", {field_term(depth - 1), field_term(depth - 1)});
            case 2: return mk_app("-", {field_term(depth - 1)});
            default: return mk_app("pow", {mk_const("2"), field_term(depth - 1)});
        }
    }

    TermPtr bool_term(int depth) {
        if (depth <= 0 || pick(3) == 0) {
            switch (pick(4)) {
                case 0: return mk_var(bool_vars[static_cast<std::size_t>(pick(2))]);
                case 1: return mk_const("bzero");
                case 2: return mk_const("bone");
                default: return mk_bool_ref(pick(3));
            }
        }
        switch (pick(3)) {
            case 0: return mk_app("meet", {bool_term(depth - 1), bool_term(depth - 1)});
            case 1: return mk_app("join", {bool_term(depth - 1), bool_term(depth - 1)});
            default: return mk_app("compl", {bool_term(depth - 1)});
        }
    }

    FormulaPtr atom() {
        switch (pick(6)) {
            case 0: return mk_atom("V", {field_term(2)});
            case 1: return mk_eq(field_term(2), field_term(2));
            case 2: return mk_atom("fin", {bool_term(2)});
            case 3: return mk_atom("cj", {bool_term(2)}, 1 + pick(3));
            case 4: return mk_atom("le", {bool_term(1), bool_term(1)});
            default: return mk_eq(bool_term(1), bool_term(1));
        }
    }

    FormulaPtr formula(int depth) {
        if (depth <= 0 || pick(4) == 0) return atom();
        switch (pick(5)) {
            case 0: return mk_not(formula(depth - 1));
            case 1: return mk_and(formula(depth - 1), formula(depth - 1));
            case 2: return mk_or(formula(depth - 1), formula(depth - 1));
            case 3: return mk_implies(formula(depth - 1), formula(depth - 1));
            default: {
                // fresh binder name, never clashing with the free pools
                std::string b = "q" + std::to_string(pick(100));
                return mk_exists(b, "field", mk_eq(mk_var(b), field_term(1)));
            }
        }
    }
};

}  // namespace

TEST_CASE("render o parse is the identity on random well-sorted formulas") {
    Gen gen(20260822);
    for (int trial = 0; trial < 300; ++trial) {
        FormulaPtr f = gen.formula(3);
        std::string text = render_formula(f);
        FormulaPtr back;
        CAPTURE(text);
        REQUIRE_NOTHROW(back = parse_formula(text, Signature::ring()));
        CHECK(formula_equal(back, f));
        CHECK(render_formula(back) == text);
    }
}

TEST_CASE("check_sorts works on programmatically built trees") {
    std::map<std::string, std::string> var_sorts;
    FormulaPtr good = mk_atom("fin", {mk_app("meet", {mk_var("a"), mk_var("b")})});
    check_sorts(good, Signature::boolean(), var_sorts);
    CHECK(var_sorts.at("a") == "bool");

    std::map<std::string, std::string> var_sorts2;
    FormulaPtr bad = mk_atom("V", {mk_app("meet", {mk_var("a"), mk_var("b")})});
    CHECK_THROWS_AS(check_sorts(bad, Signature::ring(), var_sorts2), SortError);
}
