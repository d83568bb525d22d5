#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "afv/adele.hpp"
#include "afv/formula.hpp"
#include "afv/prime_set.hpp"
#include "afv/rational.hpp"
#include "afv/tri.hpp"

namespace afv {

// Reduction of first-order statements about the restricted product of the
// p-adic fields to statements about the Boolean algebra of prime sets.
//
// A formula phi(f_1..f_n) in the ring language (with the valuation-ring
// predicate V and the power predicates pk) is compiled into a ReducedForm:
//
//   * `locals`   - a list Psi_1..Psi_m of formulas in the same language, read
//                  in a single stalk Q_p, sharing the free variables of phi;
//   * `theta`    - a quantifier-free Boolean-sorted formula whose leaves are
//                  slot references (bv i) standing for the Boolean value
//                  [[Psi_i(args)]], the set of primes where Psi_i holds.
//
// phi holds at arguments a-bar exactly when theta holds of the slot values
// [[Psi_1(a-bar)]] .. [[Psi_m(a-bar)]] in the algebra of prime sets with the
// finiteness predicate Fin and the counting predicates C_j. The translation
// is by structural induction; the only interesting step is a quantifier.
//
// Quantifier step. For `exists y body`, first reduce the body to
// (Theta; Psi_1..Psi_m). A witness y assigns to every prime p the subset
// s = { i : Q_p |= Psi_i(y(p), ...) } of local conditions it realizes, so the
// primes split into cells z_s indexed by s, one cell per realized type, and
//
//     z_s <= [[Phi_s]],   Phi_s := exists y ( /\_{i in s} Psi_i  /\
//                                             /\_{i not in s} not Psi_i ),
//
// with the z_s pairwise disjoint, covering every prime, and
// Theta(..., \/_{s containing i} z_s, ...) holding. Over the restricted
// product the quantifier ranges over families with V(y(p)) at almost every p,
// which adds the restriction formula to the Psi-list and the side condition
// that the union of the cells whose type omits it is finite.
//
// The cell variables are then eliminated, not kept: the existence of such a
// disjoint cover is a transportation problem (each prime independently picks
// one realized type from the menu of types available to it), and feasibility
// is characterized by Hall-style cut conditions that are themselves Fin/C_j
// statements about unions of the slots [[Phi_s]]. fv_reduce enumerates the
// satisfying cell-count profiles abstractly, merges them into interval cubes,
// and renders each cube as the conjunction of its cut conditions. The output
// theta is therefore already quantifier-free - the general Boolean-algebra
// eliminator (ba_qe) accepts it unchanged - and mentions slots only through
// Fin, C_j, emptiness, and equality-with-unit atoms.
//
// Types whose local formula Phi_s simplifies to `false` are dropped, and
// types whose Phi_s simplifies to `true` become the constant slot `bone`;
// the local simplifier (constant folding, ring identities, and root
// expansion of split polynomials, which is sound inside one stalk) does the
// pruning. Deduplication keeps the slot list short. Two caps guard the
// 2^m growth: a bound on quantifier alternations in the input and a bound on
// the surviving types per step; exceeding either raises FvCapError - a
// reported error, never a silent truncation.
//
// Slot values that cannot be computed exactly are carried as certified
// two-sided bounds (an inner set of confirmed primes and an outer envelope),
// and theta is evaluated over these bounds by interval Kleene logic: every
// determinate answer rests only on certified membership. Membership oracles
// that could over-claim are never consulted on their unverified side.

// A compiled product formula: theta over slot references into `locals`.
// Invariant: every (bv i) index in theta satisfies i < locals.size(), and
// theta contains no field-sort and no Boolean-sort quantifiers.
struct ReducedForm {
    FormulaPtr theta;
    std::vector<FormulaPtr> locals;
};

// Caps and search bounds for the reduction and the decision procedures.
struct FvOptions {
    int max_alternations = 4;     // quantifier alternation depth of the input
    int max_split_types = 16;     // surviving cover types per quantifier step
    int max_footprint = 10;       // cells enumerated abstractly per step
    long long max_enum_nodes = 2000000;  // abstract enumeration budget
    long long max_render_atoms = 20000;  // rendered cut-condition budget
    long long witness_height = 6;        // rational witness grid height
};

// Raised when a configured cap is exceeded; the message names the cap.
class FvCapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Certified two-sided bounds on a set of primes: lo subset-of X subset-of hi.
// Exactly known values are carried as point intervals (lo == hi).
struct SetBounds {
    PrimeSet lo = PrimeSet::finite({});
    PrimeSet hi = PrimeSet::cofinite({});
};

// Compile phi over the product of the stalk fields. `restriction` is the
// one-free-variable guard defining the restricted product support (pass
// parse_formula("(V x)", ...) for the finite adeles; nullptr for the full
// product). Throws SortError on ill-sorted input, std::invalid_argument on
// Boolean-sorted input or a non-field quantifier, FvCapError on a cap.
ReducedForm fv_reduce(const FormulaPtr& phi, const FormulaPtr& restriction = nullptr,
                      const FvOptions& opts = {});

// Decide a closed formula over the restricted (restricted=true, guard V) or
// full product of all Q_p. Runs fv_reduce, computes certified bounds for each
// closed local by exact evaluation and bounded witness search, and evaluates
// theta over the bounds. When that route is indeterminate (or hits a cap), a
// certified direct-witness search over simple product elements (diagonals and
// idempotent mixtures such as the indicator of a single prime) refines the
// answer where it can: an existential is reported true only when a concrete
// element is verified to satisfy it, a universal false only when a concrete
// counterexample is verified. Indeterminate when both routes fall outside the
// decidable fragment; a determinate answer is always certified.
Tri decide_sentence(const FormulaPtr& phi, bool restricted = true, const FvOptions& opts = {});

// Evaluate a reduced form at explicit arguments: each local receives the
// Boolean value [[Psi_i(args)]] (exact for quantifier-free locals, certified
// bounds for existential ones) and theta is evaluated over the results.
Tri eval_reduced(const ReducedForm& r, const std::map<std::string, FiniteAdele>& args,
                 const FvOptions& opts = {});

// Evaluate a quantifier-free theta over explicit slot bounds (index i of
// `slots` resolves (bv i)). Exposed for direct normal-form queries.
Tri eval_theta(const FormulaPtr& theta, const std::vector<SetBounds>& slots);

// Specialize a reduced form to the stalk at p: the internal stalk at p
// consists of the families vanishing away from p, so every Fin atom becomes a
// constant and every C_j atom either becomes a constant or reduces to the
// local formula at p, decided by counting the zero-substituted value away
// from p. `params` supplies pinned arguments; the remaining free variables
// stay free in the returned stalk formula. Requires quantifier-free locals
// and classified (non-Frontier) parameter values; throws invalid_argument
// otherwise.
FormulaPtr localize(const ReducedForm& nf, const Prime& p,
                    const std::map<std::string, FiniteAdele>& params = {});

// Simplification sound in every commutative ring containing 0 and 1 - and
// hence over the product: ring-identity and ground-constant folding,
// substitution of explicitly defined quantified variables, and coefficient
// matching for universally quantified polynomial identities.
FormulaPtr simplify_product_formula(const FormulaPtr& f);

// Simplification sound in a single stalk Q_p (a field): everything above
// plus root expansion of existential quantifiers over polynomial equations
// that split into rational linear factors.
FormulaPtr simplify_local_formula(const FormulaPtr& f);

// Certified bounds for the Boolean value of a formula at given arguments
// (empty map for a closed formula): exact for quantifier-free input,
// witness-grid inner bounds under existential quantifiers, complemented
// bounds under negation. Never over-claims on either side.
SetBounds formula_value_bounds(const FormulaPtr& f, const std::map<std::string, FiniteAdele>& args,
                               const FvOptions& opts = {});

// A named product sentence with its hand-analyzed truth value over the
// finite adeles. `require_determinate` marks the sentences the decision
// procedure must decide; the others may honestly return Indeterminate.
struct FvCorpusEntry {
    std::string name;
    std::string text;
    bool restricted = true;
    Tri expected = Tri::Indet;
    bool require_determinate = false;
};

// The built-in sentence corpus used by the decision-procedure checks.
const std::vector<FvCorpusEntry>& fv_corpus();

}  // namespace afv
