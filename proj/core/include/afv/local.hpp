#pragma once

#include <string>
#include <vector>

#include "afv/rational.hpp"
#include "afv/tri.hpp"

namespace afv {

// Decidable predicates on rational points of the p-adic field Q_p. Elements
// are restricted to rationals: they are dense in Q_p and every quotient datum
// the engine needs (valuations, unit residues) is exact on them.

// True iff x is a square in Q_p. Criterion: even valuation, and the unit part
// is a quadratic residue mod p (p odd) resp. congruent to 1 mod 8 (p = 2).
bool is_square(const Rat& x, const Prime& p);

// True iff x is a k-th power in Q_p (k >= 2). The valuation must be divisible
// by k and the unit part u must satisfy y^k = u mod p^(2e+1) for some unit y,
// where e is the exponent of p in k; by a Newton-lift argument that congruence
// precision is exact in both directions.
bool is_kth_power(const Rat& x, const Prime& p, long long k);

// True iff x = r^k for some rational r (k >= 2); then x is a k-th power in
// every Q_p at once.
bool is_rational_kth_power(const Rat& x, long long k);

// True iff y^2 + y = x has a solution y in Q_p. Completing the square in
// characteristic zero, this is equivalent to 1 + 4x being a square.
bool p2as(const Rat& x, const Prime& p);

// The unit-sphere predicate: x != 0, and neither x nor 1/x is of the form
// y^2 + y. Its truth forces v_p(x) = 0, which is asserted at runtime.
bool tplus(const Rat& x, const Prime& p);

// Which clause of the three-clause valuation-ring description fired, and the
// witness tuple found, rendered as "key=value" pairs.
struct ValRingReport {
    std::string clause;   // "sum01" or "power-shift"; empty when Unknown
    std::string witness;  // e.g. "delta=1 a=-1 b=-1 c=4 d=1"
};

// Semi-decides membership of x in the valuation ring Z_p through its
// first-order description: either x - delta = a + b + c*d with delta in {0,1}
// and a,b,c,d all satisfying tplus, or x^l - 1 + y and y both satisfy tplus
// for some y. Witnesses are searched among rationals of height <= search_bound.
// Returns True when a witness is found (sound: every reported witness is
// re-checked), Indet otherwise; the search is documented incomplete.
Tri in_valuation_ring_bounded(const Rat& x, const Prime& p, long long search_bound,
                              int l = 2, ValRingReport* report = nullptr);

// True iff the monic polynomial x^n + c_1 x^(n-1) + ... + c_n has a root in
// the residue field F_p. All coefficients must be p-integral.
bool sol_k(const std::vector<Rat>& coeffs, const Prime& p);

// Reduction of a p-integral rational mod p, as a residue in [0, p).
long long residue_mod_p(const Rat& x, const Prime& p);

}  // namespace afv
