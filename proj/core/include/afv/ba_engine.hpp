#pragma once

// Decision machinery for atomic Boolean algebras of prime sets equipped with
// the finiteness predicate fin and the cardinality thresholds (cj j x),
// meaning |x| >= j.
//
// Evaluation (ba_eval) interprets quantifier-free formulas over concrete
// PrimeSet environments.  Quantifier elimination (ba_qe) and sentence decision
// (ba_decide) work symbolically, and are valid in every infinite atomic
// Boolean algebra; the intended model, Powerset(primes), is one of them.
//
// === How elimination works, and why the chosen thresholds are complete ===
//
// Fix one innermost quantifier (exists x) B(x, y1..yk) with k <= 2 other
// variables in scope.  The minterms ("cells") over {x, y1..yk} partition the
// unit, and every atom of B speaks only about cell cardinalities:
//
//   (cj j r)   ->  sum of cardinalities of the cells inside region r is >= j
//   (fin r)    ->  no cell inside r is infinite
//   (le r s)   ->  every cell of r \ s is empty     (via r /\ ~s empty)
//   (= r s)    ->  both difference regions are empty
//
// Let S be the weight of B: the sum of all thresholds j over its cj atoms
// plus the number of its le and = atoms.  Two cardinal numbers that are both
// finite and > S are indistinguishable by every atom of B: a cj atom with
// threshold j <= S is already saturated by any summand > S, and emptiness
// tests only separate 0 from nonzero.  Hence the abstract value alphabet
//
//   { exactly 0, exactly 1, ..., exactly S, LARGE (finite, > S), INF }
//
// is complete for the truth of B: replacing any cell cardinality by its
// abstract representative never changes any atom, and every abstract vector
// is realized by actual sets.  The engine enumerates all satisfying abstract
// vectors of B over the cells of {x, y1..yk} by depth-first search with
// partial-evaluation pruning.
//
// Choosing x inside a parent cell c (a minterm over y1..yk) splits c into the
// two child cells c /\ x and c /\ ~x, and conversely any assignment of the
// child cardinalities with  child0 + child1 = |c|  is realized by some choice
// of x, independently across parent cells.  So (exists x) B holds at a parent
// vector iff some satisfying child vector projects to it, where the
// projection adds the two child values of each parent cell:
//
//   exact a + exact b   = exactly a+b                    (a+b <= 2S)
//   exact a + LARGE     = any finite value  > S + a
//   LARGE  + LARGE      = any finite value >= 2S + 2
//   INF    + anything   = INF
//
// Sums of two child values therefore live in the parent alphabet
// { exactly 0 .. exactly 2S+1, LARGE_P (finite, >= 2S+2), INF }, and the same
// homogeneity argument (2S+1 >= S) makes that alphabet complete for any
// formula of weight <= S over the parent cells.  The set of good parent
// vectors is rendered back into syntax cell by cell: a set of abstract values
// becomes a union of intervals, an interval [lo, hi] becomes
// (and (cj lo r) (not (cj hi+1 r))), an interval [lo, inf-of-finites] becomes
// (and (cj lo r) (fin r)), the INF point becomes (not (fin r)), and the whole
// upper set [lo, ..] including INF collapses to (cj lo r); (cj 0 r) is true.
// Vectors are first merged into multi-valued cubes to keep the output small.
//
// Rendered thresholds are bounded by 2S+2 for one elimination.  Note that
// the maximum threshold of the input plus the number of eliminated variables
// is NOT a correct bound: (exists x) (and (cj 2 (meet x y))
// (cj 2 (meet (compl x) y))) is equivalent to (cj 4 y), while that bound
// would cap thresholds at 3.  Outer quantifiers recompute S from the formula
// they actually see, so nesting stays sound at the price of larger alphabets.
//
// (forall x) B is eliminated as (not (exists x) (not B)).  At most 3
// variables may be in scope at any single elimination step.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "afv/formula.hpp"
#include "afv/prime_set.hpp"
#include "afv/tri.hpp"

namespace afv {

// Abstract cardinality of one minterm.
struct CardConstraint {
    enum class Kind { Exactly, AtLeast, FiniteUnbounded, Infinite };
    Kind kind = Kind::Exactly;
    long long n = 0;  // payload of Exactly / AtLeast

    static CardConstraint exactly(long long n);
    static CardConstraint at_least(long long n);
    static CardConstraint finite_unbounded();
    static CardConstraint infinite();

    bool operator==(const CardConstraint& o) const { return kind == o.kind && n == o.n; }
    bool operator!=(const CardConstraint& o) const { return !(*this == o); }
    std::string to_string() const;
};

// Cardinality profile of all 2^k minterms over k named sets.  Entry m
// describes the minterm whose i-th variable appears positively iff bit i of
// m is set.
struct MintermTable {
    std::vector<std::string> vars;
    std::vector<CardConstraint> entries;

    void validate() const;  // shape and payload sanity; throws std::invalid_argument
    std::string to_string() const;
};

// Exact table for concrete finite/cofinite sets (frontier sets are rejected:
// their minterm cardinalities are not computable).
MintermTable minterm_table(const std::vector<std::pair<std::string, PrimeSet>>& env);

// Abstract cardinality of a single concrete cell.
CardConstraint cell_card(const PrimeSet& cell);

using BaEnv = std::map<std::string, PrimeSet>;

// Interpret a Boolean-sorted term over concrete sets.
PrimeSet eval_bool_term(const TermPtr& t, const BaEnv& env);

// Three-valued truth of a quantifier-free formula over concrete sets.
// Frontier-set indeterminacy propagates by Kleene logic.
Tri ba_eval(const FormulaPtr& f, const BaEnv& env);

// Quantifier elimination, sound and complete in every infinite atomic
// Boolean algebra.  Slot references (bv i) are treated as opaque free
// variables.  Throws std::invalid_argument if more than 3 variables are in
// scope at some elimination step, or on (bv-of ...) shells, which have no
// set semantics here.
FormulaPtr ba_qe(const FormulaPtr& f);

// Truth of a sentence in every infinite atomic Boolean algebra (they all
// agree on this fragment): runs ba_qe, then evaluates the ground remainder
// with an infinite unit.
bool ba_decide(const FormulaPtr& f);

}  // namespace afv
