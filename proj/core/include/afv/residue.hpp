#pragma once

#include "afv/hyper.hpp"

#include <string>
#include <vector>

// The residue ring Z/p^level recovered inside the quotient hyperfield from its
// additive relation alone.
//
// Restrict to classes of nonnegative valuation.  Two such classes g, h are
// identified when h lies in g + z for some z in the zero fiber, where the zero
// fiber (everything that adds to 1 without moving it: sigma(1, z, 1)) is exactly
// {Zero} u {valuation >= level}.  Each equivalence class carries one residue:
// psi(g) = p^gamma * u mod p^level for g = (gamma; u) with gamma < level, and 0
// for the zero fiber.  The induced operations — add by picking any member of the
// multi-valued sum, multiply by the class product — are well defined on
// equivalence classes and make psi a ring isomorphism onto Z/p^level.
//
// EClass stores the canonical representative: Zero for the zero fiber, and
// otherwise (gamma; u mod p^(level-gamma)) with 0 <= gamma < level and the unit
// reduced to its least positive residue at the precision that survives the
// factor p^gamma.  Units congruent modulo p^(level-gamma) differ by a zero-fiber
// translate ((u - u') p^gamma has valuation >= level), so the reduction stays in
// the class, and distinct canonical representatives have distinct psi images.
//
// e_equiv searches the witness z over Zero plus the valuations
// [level, max(level, gamma(g), gamma(h)) + level], every unit — enough because a
// witness deeper than gamma(g) + level perturbs g below precision (that case is
// already covered by z = Zero), while h itself is the only possible witness when
// g is in the zero fiber.

namespace afv {

struct EClass {
    HClass rep;  // Zero, or 0 <= gamma < level with unit reduced mod p^(level-gamma)

    friend bool operator==(const EClass& a, const EClass& b) { return a.rep == b.rep; }
    friend bool operator!=(const EClass& a, const EClass& b) { return !(a == b); }
    friend bool operator<(const EClass& a, const EClass& b) { return a.rep < b.rep; }
};

// Canonical class of g; requires h_val(g) >= 0 (throws std::invalid_argument).
EClass eclass_of(const HClass& g, const HyperCtx& cx);

// Whether g adds to 1 without moving it — true exactly on Zero and valuations
// >= level.
bool in_zero_fiber(const HClass& g, const HyperCtx& cx);

// Whether g and h are identified (same residue); both must have valuation >= 0.
bool e_equiv(const HClass& g, const HClass& h, const HyperCtx& cx);

// The residue of g in Z/p^level; requires h_val(g) >= 0.
long long psi(const HClass& g, const HyperCtx& cx);

// Induced ring operations on equivalence classes.  Addition picks a member of
// the multi-valued sum and canonicalizes; every choice lands in the same class,
// which is cross-checked on a second witness whenever the sum has one.
EClass eclass_add(const EClass& a, const EClass& b, const HyperCtx& cx);
EClass eclass_mul(const EClass& a, const EClass& b, const HyperCtx& cx);

struct RingIsoReport {
    long long p = 0;
    int level = 0;
    long long classes_checked = 0;
    bool pass = true;
    std::vector<std::string> failures;  // capped
    std::string to_string() const;
};

// Verifies, over all classes with 0 <= gamma <= gamma_bound plus Zero, that psi
// is a bijection from equivalence classes onto Z/p^level and a ring isomorphism
// for the induced operations.  Requires gamma_bound >= level.
RingIsoReport check_ring_iso(const HyperCtx& cx, long long gamma_bound);

}  // namespace afv
