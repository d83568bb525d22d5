#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afv/formula.hpp"
#include "afv/hyper.hpp"
#include "afv/prime_set.hpp"
#include "afv/rational.hpp"

// Restricted products over the primes, in the eventually-constant
// representation: an element stores one default coordinate plus a finite
// exception map, which covers every finitely-describable element — diagonals,
// idempotents e_S supported on a finite or cofinite set of primes, and any
// finite modification.  The restrictedness condition (coordinate valuations
// >= 0 at all but finitely many primes) is automatic: a rational default has
// negative valuation only at the primes dividing its denominator.
//
// Boolean values.  For a quantifier-free formula phi in the ring language
// (+, -, *, 0, 1, V, pk) and eventually-constant arguments, [[phi(args)]] is
// the set of primes at which the coordinatewise statement holds.  The
// computation splits:
//   - at each exception prime the coordinates are explicit rationals and the
//     formula is evaluated exactly via the local predicates;
//   - on the default tuple, terms evaluate to fixed rationals independent of
//     the prime, so polynomial (in)equalities are constant, V(q) holds except
//     at the primes dividing den(q) (an explicitly computed finite set), and
//     pk-atoms at a value that is not a rational k-th power are genuine
//     number-theoretic sets carried as Frontier oracles over the local
//     k-th-power test.
// The result is therefore Finite/Cofinite whenever no pk atom forces a
// Frontier, and set algebra over the pieces is exact.
//
// Class families.  An AdeleHFamily is the class-level analogue at a fixed
// precision level: per prime p its coordinate is a quotient class in the
// p-component.  The default is stored symbolically as the pair (gamma, u) and
// materialized at each prime as the class of the rational p^gamma * u — the
// only total reading, since a fixed residue u cannot be a unit modulo every
// prime at once.  A term in the class language (*, inv, 0, 1) then evaluates
// on the default tuple to the class of p^G * U for a fixed exponent G and a
// fixed rational U, and every atom on such monomial values is eventually
// constant in p with a computable exceptional set:
//   - Pdelta(p^G * U) holds iff G >= 0 once p divides neither num nor den
//     of U;
//   - two monomial classes are equal iff their (G, U) pairs are equal, once p
//     is off the divisors of U1, U2, and num(U1 - U2): distinct units stay
//     incongruent mod p at almost all primes;
//   - a Sigma membership reduces, off the divisors of the handful of rational
//     combinations the closed forms compare (U1, U2, U3, U1 + U2, U3 - U1,
//     U3 - U2, U3 - U1 - U2), to a case split on the exponents: the deeper
//     summand perturbs the shallower one below precision when the exponent
//     gap reaches the level, an exact cancellation U1 + U2 = 0 yields a ball
//     whose membership is an exponent comparison, and a sub-level gap makes
//     membership of any fixed monomial eventually false.
// h_boolean_value therefore returns an exact Finite/Cofinite set for every
// quantifier-free formula of the class language on eventually-constant
// families: the generic truth value is a constant, and the finitely many
// special primes (exception primes, divisors of the combinations above) are
// evaluated concretely.  No Frontier classification is ever needed at this
// representation — a strengthening of the minimum contract, which only
// promises exactness for valuation-decidable atoms.

namespace afv {

// ---------------------------------------------------------------------------
// Finite adeles of Q
// ---------------------------------------------------------------------------

struct FiniteAdele {
    Rat def;                               // default coordinate
    std::map<long long, Rat> exceptions;   // prime -> coordinate != def
    bool operator==(const FiniteAdele&) const = default;
};

// Normalizes: exception entries equal to the default are dropped; keys are
// validated prime.
FiniteAdele make_adele(Rat def, std::map<long long, Rat> exceptions = {});
FiniteAdele diagonal_adele(Rat q);

// The idempotent e_S: coordinate 1 on S, 0 off S. S must be Finite/Cofinite.
FiniteAdele idempotent_adele(const PrimeSet& s);

// The coordinate at p.
Rat stalk_project(const FiniteAdele& a, const Prime& p);

FiniteAdele adele_add(const FiniteAdele& a, const FiniteAdele& b);
FiniteAdele adele_sub(const FiniteAdele& a, const FiniteAdele& b);
FiniteAdele adele_mul(const FiniteAdele& a, const FiniteAdele& b);
FiniteAdele adele_neg(const FiniteAdele& a);

// {p : a_p != 0}: Finite when the default is 0, Cofinite otherwise.
PrimeSet supp(const FiniteAdele& a);

// The unique p with a = e_{p}, if any.
std::optional<Prime> is_min_idempotent(const FiniteAdele& a);

// Literals: {"default":"1/6","exceptions":{"2":"4","5":"0"}}.
FiniteAdele adele_from_json(const std::string& text);
std::string adele_to_json(const FiniteAdele& a);

// ---------------------------------------------------------------------------
// Ring-formula evaluation
// ---------------------------------------------------------------------------

// Value of a ring term at a rational environment (prime-independent).
Rat ring_term_eval(const TermPtr& t, const std::map<std::string, Rat>& env);

// Exact truth of a quantifier-free ring formula at rational coordinates in
// the p-component.  Throws std::invalid_argument on quantifiers or unbound
// variables.
bool eval_ring_formula_at(const FormulaPtr& f, const std::map<std::string, Rat>& env,
                          const Prime& p);

// [[phi(args)]] for quantifier-free phi over the ring signature.
PrimeSet boolean_value(const FormulaPtr& phi, const std::map<std::string, FiniteAdele>& args);

// ---------------------------------------------------------------------------
// Class families
// ---------------------------------------------------------------------------

struct AdeleHFamily {
    int level = 1;
    bool def_zero = false;
    long long def_gamma = 0;  // default coordinate: class of p^def_gamma * def_unit
    long long def_unit = 1;   // any nonzero integer; renormalized per prime
    std::map<long long, HClass> exceptions;  // prime -> class in HyperCtx(p, level)
    bool operator==(const AdeleHFamily&) const = default;
};

// Validates level >= 1, def_gamma >= 0 and def_unit != 0 for a nonzero
// default (so every materialized default satisfies in_Pdelta), and drops
// exception entries equal to the materialized default.
AdeleHFamily make_hfamily(int level, bool def_zero, long long def_gamma, long long def_unit,
                          std::map<long long, HClass> exceptions = {});

// The coordinate class at p: the exception, or the materialized default
// project(p^def_gamma * def_unit) in HyperCtx(p, level).
HClass h_stalk_project(const AdeleHFamily& f, const Prime& p);

// [[phi(args)]] for quantifier-free phi over the class signature
// (*, inv, 0, 1, Sigma, Pdelta).  All families must share one level.  Always
// exact Finite/Cofinite per the scheme above.  inv of a zero coordinate is an
// error.
PrimeSet h_boolean_value(const FormulaPtr& phi,
                         const std::map<std::string, AdeleHFamily>& args);

// Literals: {"level":1,"default":"(0; 1)","exceptions":{"5":"(-1; 1)"}};
// default "0" for the zero family.
AdeleHFamily hfamily_from_json(const std::string& text);
std::string hfamily_to_json(const AdeleHFamily& f);

}  // namespace afv
