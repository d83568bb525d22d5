#include "afv/hyper.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "afv/local.hpp"
#include "doctest.h"

using namespace afv;

namespace {

// ---------------------------------------------------------------------------
// Representative-sampling oracle.
//
// A class (gamma; u) at level l collects exactly the rationals
// p^gamma * (u + p^l * k), k ranging over integers prime to nothing (the
// bracket is automatically a unit).  The oracle never looks at how hyper_add
// computes its answer: it projects explicit representative sums with plain
// rational arithmetic and compares against the claimed set from both sides —
// every sampled sum must land inside the claim (soundness), and every member
// of the claim must be hit by an explicitly constructed representative pair
// (completeness).
// ---------------------------------------------------------------------------

Int ipow_int(long long p, long long e) {
    Int r = 1;
    for (long long i = 0; i < e; ++i) r *= p;
    return r;
}

Rat p_power(long long p, long long g) {
    if (g >= 0) return Rat(ipow_int(p, g));
    return Rat{Int(1), ipow_int(p, -g)};
}

// The representative p^gamma * (unit + p^level * k).
Rat class_rep(const HClass& x, const HyperCtx& cx, long long k) {
    REQUIRE(!x.is_zero());
    Rat bracket{Int(x.unit) + ipow_int(cx.p.value(), cx.level) * k, Int(1)};
    return bracket * p_power(cx.p.value(), x.gamma);
}

HClass cls(long long g, long long u, const HyperCtx& cx) { return make_cls(g, u, cx); }

// Claimed members, a ball truncated to its two shallowest unit layers plus Zero.
std::vector<HClass> truncated_members(const ClassSet& s, const HyperCtx& cx) {
    if (s.kind != ClassSet::Kind::Ball) return class_set_members(s, cx);
    std::vector<HClass> out;
    out.push_back(HClass::zero_class());
    for (long long c = s.ball_min; c <= s.ball_min + 2; ++c)
        for (long long u : unit_residues(cx)) out.push_back(HClass{false, c, u});
    return out;
}

void oracle_check_add(const HClass& x, const HClass& y, const HyperCtx& cx,
                      std::mt19937_64& rng) {
    ClassSet claimed = hyper_add(x, y, cx);
    CAPTURE(hclass_to_string(x));
    CAPTURE(hclass_to_string(y));
    CAPTURE(class_set_to_string(claimed));

    if (x.is_zero() || y.is_zero()) {
        const HClass& other = x.is_zero() ? y : x;
        REQUIRE(claimed.kind == ClassSet::Kind::Single);
        REQUIRE(claimed.single == other);
        return;
    }

    // Soundness on random representative pairs.
    std::uniform_int_distribution<long long> kd(-60, 60);
    for (int round = 0; round < 24; ++round) {
        Rat xa = class_rep(x, cx, kd(rng));
        Rat ya = class_rep(y, cx, kd(rng));
        HClass sum = project(xa + ya, cx);
        REQUIRE(class_set_member(claimed, sum, cx));
    }

    // Adversarial soundness: representative pairs engineered to cancel to a
    // prescribed depth (sum exactly p^c * t), whenever the second stays a
    // genuine representative of y.
    for (long long c = x.gamma + 1; c <= x.gamma + cx.level + 2; ++c) {
        for (long long t : {1LL, 2LL, -1LL}) {
            Rat xa = class_rep(x, cx, kd(rng));
            Rat ya = Rat(Int(t)) * p_power(cx.p.value(), c) - xa;
            if (ya == 0 || project(ya, cx) != y) continue;
            HClass sum = project(xa + ya, cx);
            REQUIRE(class_set_member(claimed, sum, cx));
        }
    }

    // Completeness: subtract the deeper summand's privileged representative
    // from each claimed target; the difference must be a genuine
    // representative of the shallower summand.
    const HClass& hi = (y.gamma >= x.gamma) ? y : x;
    const HClass& lo = (y.gamma >= x.gamma) ? x : y;
    Rat hihat = class_rep(hi, cx, 0);
    for (const HClass& t : truncated_members(claimed, cx)) {
        Rat that = t.is_zero() ? Rat(0) : class_rep(t, cx, 0);
        Rat diff = that - hihat;
        CAPTURE(hclass_to_string(t));
        REQUIRE(diff != 0);
        REQUIRE(project(diff, cx) == lo);
        REQUIRE(project(diff + hihat, cx) == t);
    }
}

// Independent square-plus decision by wide brute force: search y over a
// valuation range far beyond anything the production window uses.
bool brute_square_plus(const HClass& x, const HyperCtx& cx, long long reach) {
    if (class_set_member(hyper_add(HClass::zero_class(), HClass::zero_class(), cx), x, cx))
        return true;  // y = Zero
    for (long long c = -reach; c <= reach; ++c)
        for (long long u : unit_residues(cx)) {
            HClass y{false, c, u};
            if (class_set_member(hyper_add(h_mul(y, y, cx), y, cx), x, cx)) return true;
        }
    return false;
}

std::vector<HyperCtx> ctx_matrix(std::vector<long long> ps, std::vector<int> levels) {
    std::vector<HyperCtx> out;
    for (long long p : ps)
        for (int l : levels) out.emplace_back(Prime(p), l);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Classes, literals, unary operations
// ---------------------------------------------------------------------------

TEST_CASE("projection to classes") {
    HyperCtx c51(Prime(5), 1);
    CHECK(project(Rat(50), c51) == cls(2, 2, c51));
    CHECK(project(Rat(0), c51) == HClass::zero_class());
    HyperCtx c23(Prime(2), 3);
    CHECK(project(Rat{Int(1), Int(3)}, c23) == cls(0, 3, c23));
    HyperCtx c32(Prime(3), 2);
    CHECK(project(Rat(-1), c32) == cls(0, 8, c32));
    CHECK(project(Rat{Int(18), Int(5)}, c32) == cls(2, 4, c32));  // 18/5 = 9 * 2/5; 2*5^-1 = 2*2 = 4 mod 9
}

TEST_CASE("class products, inverses, negation") {
    HyperCtx c32(Prime(3), 2);
    CHECK(h_mul(cls(1, 1, c32), cls(1, 2, c32), c32) == cls(2, 2, c32));
    HyperCtx c51(Prime(5), 1);
    CHECK(h_inv(cls(2, 3, c51), c51) == cls(-2, 2, c51));
    CHECK(h_neg(cls(0, 1, c51), c51) == cls(0, 4, c51));
    CHECK(h_neg(HClass::zero_class(), c51) == HClass::zero_class());
    CHECK(h_mul(HClass::zero_class(), cls(3, 2, c51), c51) == HClass::zero_class());
    CHECK_THROWS_AS(h_inv(HClass::zero_class(), c51), std::domain_error);
    CHECK(h_pow(cls(1, 2, c32), 3, c32) == cls(3, 8, c32));
    CHECK_THROWS_AS(h_pow(cls(0, 1, c32), 0, c32), std::invalid_argument);

    CHECK(h_val(cls(-3, 2, c51)) == Val::of(-3));
    CHECK(h_val(HClass::zero_class()) == Val::inf());
    CHECK(in_Pdelta(HClass::zero_class()));
    CHECK(!in_Udelta(cls(1, 1, c51)));
    CHECK(in_Udelta(cls(0, 4, c51)));
    CHECK(!in_Pdelta(cls(-1, 1, c51)));
}

TEST_CASE("class literals") {
    HyperCtx c32(Prime(3), 2);
    CHECK(hclass_to_string(cls(2, 4, c32)) == "(2; 4)");
    CHECK(hclass_to_string(HClass::zero_class()) == "0");
    CHECK(parse_hclass("(2; 4)", c32) == cls(2, 4, c32));
    CHECK(parse_hclass(" ( -1 ;  10 ) ", c32) == cls(-1, 1, c32));  // 10 = 1 mod 9
    CHECK(parse_hclass("0", c32) == HClass::zero_class());
    CHECK(parse_hclass("(0; -1)", c32) == cls(0, 8, c32));
    CHECK_THROWS_AS(parse_hclass("(0; 3)", c32), std::invalid_argument);  // 3 not a unit mod 9
    CHECK_THROWS_AS(parse_hclass("(1)", c32), std::invalid_argument);
    CHECK_THROWS_AS(parse_hclass("x", c32), std::invalid_argument);
    CHECK_THROWS_AS(parse_hclass("(1; 2", c32), std::invalid_argument);
    CHECK_THROWS_AS(parse_hclass("0 junk", c32), std::invalid_argument);
    CHECK_THROWS_AS(make_cls(0, 6, c32), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// The multi-valued sum against the oracle
// ---------------------------------------------------------------------------

TEST_CASE("hypersum closed forms: pinned shapes") {
    HyperCtx c51(Prime(5), 1);
    ClassSet a = hyper_add(cls(0, 1, c51), cls(1, 2, c51), c51);
    REQUIRE(a.kind == ClassSet::Kind::Single);
    CHECK(a.single == cls(0, 1, c51));

    HyperCtx c32(Prime(3), 2);
    ClassSet b = hyper_add(cls(0, 1, c32), cls(0, 2, c32), c32);
    REQUIRE(b.kind == ClassSet::Kind::Sphere);
    CHECK(b.gamma == 1);
    CHECK(b.z0 == 1);
    CHECK(b.m == 1);
    std::vector<HClass> bm = class_set_members(b, c32);
    CHECK(bm == std::vector<HClass>{cls(1, 1, c32), cls(1, 4, c32), cls(1, 7, c32)});
    CHECK(class_set_size(b, c32) == 3);

    ClassSet c = hyper_add(cls(0, 1, c51), cls(0, 4, c51), c51);
    REQUIRE(c.kind == ClassSet::Kind::Ball);
    CHECK(c.ball_min == 1);
    CHECK(!class_set_size(c, c51).has_value());
    CHECK_THROWS_AS(class_set_members(c, c51), std::logic_error);
}

TEST_CASE("sigma membership") {
    HyperCtx c51(Prime(5), 1);
    CHECK(sigma(cls(0, 1, c51), cls(0, 4, c51), HClass::zero_class(), c51));
    CHECK(sigma(cls(0, 1, c51), HClass::zero_class(), cls(0, 1, c51), c51));
    CHECK(!sigma(cls(0, 1, c51), cls(0, 1, c51), cls(5, 1, c51), c51));
    CHECK(sigma(cls(0, 1, c51), cls(0, 1, c51), cls(0, 2, c51), c51));
    CHECK(sigma(cls(0, 1, c51), cls(0, 4, c51), cls(7, 3, c51), c51));
}

TEST_CASE("hypersum oracle: exhaustive windows") {
    std::mt19937_64 rng(20260822);
    struct Window {
        long long p;
        int level;
        long long lo, hi;
    };
    for (const Window& w : {Window{2, 1, -2, 2}, Window{3, 1, -2, 2}, Window{5, 1, -2, 2},
                            Window{2, 2, -1, 1}, Window{3, 2, -1, 1}, Window{5, 2, -1, 1},
                            Window{2, 3, 0, 1}, Window{3, 3, 0, 1}}) {
        HyperCtx cx(Prime(w.p), w.level);
        std::vector<HClass> classes;
        classes.push_back(HClass::zero_class());
        for (long long g = w.lo; g <= w.hi; ++g)
            for (long long u : unit_residues(cx)) classes.push_back(HClass{false, g, u});
        for (const HClass& x : classes)
            for (const HClass& y : classes) oracle_check_add(x, y, cx, rng);
    }
}

TEST_CASE("hypersum oracle: scattered deep pairs") {
    std::mt19937_64 rng(424242);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2, 3})) {
        std::vector<long long> units = unit_residues(cx);
        std::uniform_int_distribution<long long> gd(-5, 5);
        std::uniform_int_distribution<std::size_t> ud(0, units.size() - 1);
        for (int i = 0; i < 30; ++i) {
            HClass x{false, gd(rng), units[ud(rng)]};
            HClass y{false, gd(rng), units[ud(rng)]};
            oracle_check_add(x, y, cx, rng);
            oracle_check_add(x, h_neg(x, cx), cx, rng);  // forced cancellation
        }
    }
}

TEST_CASE("ultrametric bound on every sum") {
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5}, {1, 2})) {
        std::vector<HClass> classes;
        classes.push_back(HClass::zero_class());
        for (long long g = -4; g <= 4; ++g)
            for (long long u : unit_residues(cx)) classes.push_back(HClass{false, g, u});
        for (const HClass& x : classes) {
            for (const HClass& y : classes) {
                ClassSet s = hyper_add(x, y, cx);
                Val floor = val_min(h_val(x), h_val(y));
                switch (s.kind) {
                    case ClassSet::Kind::Single:
                        CHECK(h_val(s.single) >= floor);
                        break;
                    case ClassSet::Kind::Sphere:
                        CHECK(Val::of(s.gamma) >= floor);
                        break;
                    case ClassSet::Kind::Ball:
                        CHECK(Val::of(s.ball_min) >= floor);
                        break;
                }
            }
        }
    }
}

TEST_CASE("projection is multiplicative and sum-compatible") {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<long long> num(-500, 500);
    std::uniform_int_distribution<long long> den(1, 500);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2, 3})) {
        for (int i = 0; i < 1000 / 12 + 1; ++i) {
            Rat x{Int(num(rng)), Int(den(rng))};
            Rat y{Int(num(rng)), Int(den(rng))};
            CHECK(project(x * y, cx) == h_mul(project(x, cx), project(y, cx), cx));
            CHECK(sigma(project(x, cx), project(y, cx), project(x + y, cx), cx));
        }
    }
}

// ---------------------------------------------------------------------------
// Set translation and the ternary sum
// ---------------------------------------------------------------------------

TEST_CASE("ball translation closed forms: pinned examples") {
    HyperCtx c51(Prime(5), 1);
    ClassUnion u1 = classset_add(ClassSet::ball(1), cls(0, 1, c51), c51);
    CHECK(u1 == class_union(ClassSet::single_of(cls(0, 1, c51)), c51));
    ClassUnion u2 = classset_add(ClassSet::ball(1), cls(2, 1, c51), c51);
    CHECK(u2 == class_union(ClassSet::ball(1), c51));
    ClassUnion u3 = classset_add(ClassSet::single_of(cls(0, 2, c51)), cls(0, 3, c51), c51);
    CHECK(u3 == class_union(ClassSet::ball(1), c51));

    HyperCtx c33(Prime(3), 3);
    // Gap strictly inside the precision: a sphere pinned to z modulo p^gap.
    ClassUnion u4 = classset_add(ClassSet::ball(2), cls(0, 5, c33), c33);
    ClassUnion want;
    cu_insert(want, ClassSet::sphere(0, 5 % 9, 1, c33), c33);
    CHECK(u4 == want);
}

TEST_CASE("ball translation against representatives") {
    std::mt19937_64 rng(1618);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5}, {1, 2, 3})) {
        std::vector<long long> units = unit_residues(cx);
        std::vector<long long> some_units;
        for (std::size_t i = 0; i < units.size() && some_units.size() < 6; i += (units.size() / 6) + 1)
            some_units.push_back(units[i]);
        const long long g = 1;
        for (long long dv = -3; dv <= cx.level + 2; ++dv) {
            for (long long w : some_units) {
                HClass z{false, g - dv, w};
                ClassUnion claimed = classset_add(ClassSet::ball(g), z, cx);
                CAPTURE(hclass_to_string(z));
                CAPTURE(class_union_to_string(claimed));
                Rat zhat = class_rep(z, cx, 0);

                // Soundness: explicit ball members, translated by rationals.
                std::uniform_int_distribution<long long> kd(-40, 40);
                for (long long c = g; c <= g + cx.level + 2; ++c) {
                    for (long long u : some_units) {
                        Rat ehat = class_rep(HClass{false, c, u}, cx, kd(rng));
                        CHECK(cu_member(claimed, project(ehat + zhat, cx)));
                    }
                }
                CHECK(cu_member(claimed, z));  // the Zero member of the ball

                // Completeness: each claimed target minus the translator must
                // land back inside the ball.
                ClassSet ball_claim = ClassSet::ball(g);
                std::vector<HClass> targets;
                if (claimed.zero) targets.push_back(HClass::zero_class());
                for (const auto& [cg, cu_] : claimed.cls) targets.push_back(HClass{false, cg, cu_});
                if (claimed.ball) {
                    targets.push_back(HClass::zero_class());
                    for (long long c = *claimed.ball; c <= *claimed.ball + 2; ++c)
                        for (long long u : some_units) targets.push_back(HClass{false, c, u});
                }
                for (const HClass& t : targets) {
                    Rat that = t.is_zero() ? Rat(0) : class_rep(t, cx, 0);
                    Rat ehat = that - zhat;
                    HClass e = project(ehat, cx);
                    CAPTURE(hclass_to_string(t));
                    CHECK(class_set_member(ball_claim, e, cx));
                    CHECK(project(ehat + zhat, cx) == t);
                }
            }
        }
    }
}

TEST_CASE("ternary sums agree with representative arithmetic") {
    std::mt19937_64 rng(5150);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5}, {1, 2})) {
        std::vector<long long> units = unit_residues(cx);
        std::uniform_int_distribution<long long> gd(-3, 3);
        std::uniform_int_distribution<std::size_t> ud(0, units.size() - 1);
        std::uniform_int_distribution<long long> kd(-50, 50);
        for (int i = 0; i < 120; ++i) {
            HClass x{false, gd(rng), units[ud(rng)]};
            HClass y = (i % 3 == 0) ? h_neg(x, cx) : HClass{false, gd(rng), units[ud(rng)]};
            HClass z{false, gd(rng), units[ud(rng)]};
            Rat sum = class_rep(x, cx, kd(rng)) + class_rep(y, cx, kd(rng)) +
                      class_rep(z, cx, kd(rng));
            CHECK(sigma3(x, y, z, project(sum, cx), cx));
        }
        // Membership is not vacuous: nothing below every summand is reachable.
        HClass x{false, 0, units[0]};
        CHECK(!sigma3(x, x, x, HClass{false, -9, units[0]}, cx));
    }
}

TEST_CASE("class union normalization") {
    HyperCtx c51(Prime(5), 1);
    ClassUnion u;
    cu_insert(u, ClassSet::ball(2), c51);
    for (long long w : unit_residues(c51)) cu_insert(u, ClassSet::single_of(cls(1, w, c51)), c51);
    CHECK(u == class_union(ClassSet::ball(1), c51));
    CHECK(cu_member(u, HClass::zero_class()));
    CHECK(cu_member(u, cls(7, 2, c51)));
    CHECK(!cu_member(u, cls(0, 1, c51)));

    ClassUnion v;
    cu_insert(v, ClassSet::single_of(HClass::zero_class()), c51);
    cu_insert(v, ClassSet::single_of(cls(0, 2, c51)), c51);
    CHECK(v.zero);
    CHECK(cu_member(v, cls(0, 2, c51)));
    cu_insert(v, ClassSet::ball(0), c51);
    CHECK(v == class_union(ClassSet::ball(0), c51));

    ClassUnion w = classunion_add(class_union(ClassSet::ball(1), c51), cls(0, 1, c51), c51);
    CHECK(w == class_union(ClassSet::single_of(cls(0, 1, c51)), c51));
}

// ---------------------------------------------------------------------------
// Square-plus values and positive units
// ---------------------------------------------------------------------------

TEST_CASE("square-plus search: pinned values") {
    HyperCtx c51(Prime(5), 1);
    CHECK(p2as_kras(project(Rat(2), c51), c51));
    CHECK(p2as_kras(HClass::zero_class(), c51));
    // (0; 1) is a square-plus value here: y = (0; 2) has y^2 + y = (0; 4+2) = {(0; 1)}.
    CHECK(sigma(cls(0, 4, c51), cls(0, 2, c51), cls(0, 1, c51), c51));
    CHECK(p2as_kras(cls(0, 1, c51), c51));
    CHECK(!p2as_kras(cls(0, 3, c51), c51));
    CHECK(!tplus_kras(cls(0, 1, c51), c51));
    CHECK(tplus_kras(cls(0, 4, c51), c51));
    CHECK(!tplus_kras(project(Rat(2), c51), c51));
    CHECK(!tplus_kras(HClass::zero_class(), c51));
}

TEST_CASE("square-plus search matches wide brute force") {
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5}, {1, 2})) {
        for (long long g = -4; g <= 4; ++g)
            for (long long u : unit_residues(cx)) {
                HClass x{false, g, u};
                CAPTURE(cx.p.value());
                CAPTURE(cx.level);
                CAPTURE(hclass_to_string(x));
                CHECK(p2as_kras(x, cx) == brute_square_plus(x, cx, 9));
            }
        CHECK(p2as_kras(HClass::zero_class(), cx) ==
              brute_square_plus(HClass::zero_class(), cx, 9));
    }
}

TEST_CASE("positive units sit at valuation zero") {
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2})) {
        for (long long g = -3; g <= 3; ++g) {
            if (g == 0) continue;
            for (long long u : unit_residues(cx)) CHECK(!tplus_kras(HClass{false, g, u}, cx));
        }
        bool any = false;
        for (long long u : unit_residues(cx)) any = any || tplus_kras(HClass{false, 0, u}, cx);
        CHECK(any);
    }
}

TEST_CASE("positive units under projection: sound direction and the known gap") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<long long> num(-2000, 2000);
    std::uniform_int_distribution<long long> den(1, 2000);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2, 3})) {
        int tried = 0;
        while (tried < 500) {
            Rat x{Int(num(rng)), Int(den(rng))};
            if (x == 0) continue;
            ++tried;
            if (tplus_kras(project(x, cx), cx)) {
                CAPTURE(rat_to_string(x));
                CHECK(tplus(x, cx.p));
            }
        }
    }
    // The converse direction genuinely fails at level 1: 1 is a positive unit
    // of Q_5 (y^2 + y = 1 needs sqrt(5), and v(5) is odd), yet mod 5 the
    // witness w = 2 gives 4 + 2 = 1, so the class of 1 is a square-plus value.
    // Level 2 already repairs it: w^2 + w = 1 mod 25 has no solution (the only
    // root mod 5 is the double root w = 2, and f(2 + 5t) = 5 mod 25 never
    // vanishes), valuation-0 targets need exact unit witnesses, and higher
    // valuations cannot reach a unit.  Pin both behaviors.
    CHECK(tplus(Rat(1), Prime(5)));
    {
        HyperCtx cx(Prime(5), 1);
        CHECK(p2as_kras(project(Rat(1), cx), cx));
        CHECK(!tplus_kras(project(Rat(1), cx), cx));
    }
    for (int level : {2, 3}) {
        HyperCtx cx(Prime(5), level);
        CHECK(!p2as_kras(project(Rat(1), cx), cx));
        CHECK(tplus_kras(project(Rat(1), cx), cx));
    }
}

// ---------------------------------------------------------------------------
// The positivity formula
// ---------------------------------------------------------------------------

TEST_CASE("positivity formula: pinned values") {
    HyperCtx c51(Prime(5), 1);
    ThetaContext t = make_theta_context(c51);
    CHECK(theta_kras(cls(2, 3, c51), t));
    CHECK(!theta_kras(cls(-1, 1, c51), t));
    CHECK(theta_kras(HClass::zero_class(), t));
}

TEST_CASE("positivity formula matches the valuation ring") {
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2, 3})) {
        ThetaContext t = make_theta_context(cx);
        CAPTURE(cx.p.value());
        CAPTURE(cx.level);
        REQUIRE(!t.t_set.empty());
        for (const HClass& w : t.t_set) CHECK(in_Udelta(w));
        CHECK(theta_kras(HClass::zero_class(), t));
        for (long long g = -6; g <= 6; ++g)
            for (long long u : unit_residues(cx)) {
                HClass x{false, g, u};
                CAPTURE(hclass_to_string(x));
                CHECK(theta_kras(x, t) == in_Pdelta(x));
            }
    }
}

TEST_CASE("widening the search margin changes no answer") {
    std::mt19937_64 rng(31337);
    for (const HyperCtx& cx : ctx_matrix({2, 3, 5, 7}, {1, 2, 3})) {
        std::vector<long long> units = unit_residues(cx);
        std::uniform_int_distribution<long long> gd(-8, 8);
        std::uniform_int_distribution<std::size_t> ud(0, units.size() - 1);
        for (int i = 0; i < 60; ++i) {
            HClass x{false, gd(rng), units[ud(rng)]};
            CHECK(p2as_kras(x, cx, 2) == p2as_kras(x, cx, 5));
            CHECK(tplus_kras(x, cx, 2) == tplus_kras(x, cx, 5));
        }
        ThetaContext narrow = make_theta_context(cx, 0, 2);
        ThetaContext wide = make_theta_context(cx, 0, 5);
        std::vector<long long> probe_units{units.front(), units.back()};
        if (units.size() > 2) probe_units.push_back(units[units.size() / 2]);
        for (long long g = -4; g <= 4; ++g)
            for (long long u : probe_units) {
                HClass x{false, g, u};
                CHECK(theta_kras(x, narrow) == theta_kras(x, wide));
            }
        CHECK(theta_kras(HClass::zero_class(), narrow) ==
              theta_kras(HClass::zero_class(), wide));
    }
}

// ---------------------------------------------------------------------------
// Axiom verification
// ---------------------------------------------------------------------------

TEST_CASE("hypergroup axioms hold") {
    AxiomReport a = check_hypergroup_axioms(HyperCtx(Prime(5), 1), 3, 400, 11);
    CHECK(a.pass);
    CHECK(a.checks > 0);
    CHECK(a.failures.empty());
    AxiomReport b = check_hypergroup_axioms(HyperCtx(Prime(2), 2), 3, 400, 12);
    CHECK(b.pass);
    AxiomReport c = check_hypergroup_axioms(HyperCtx(Prime(3), 2), 2, 300, 13);
    CHECK(c.pass);
    CHECK(a.to_string().find("PASS") != std::string::npos);
}

TEST_CASE("axiom check catches a corrupted sum") {
    // Collapse every sphere to its first member: associativity and
    // distributivity must break with concrete counterexamples.
    HyperAddFn corrupt = [](const HClass& x, const HClass& y, const HyperCtx& cx) {
        ClassSet s = hyper_add(x, y, cx);
        if (s.kind == ClassSet::Kind::Sphere)
            return ClassSet::single_of(class_set_members(s, cx).front());
        return s;
    };
    AxiomReport r = check_hypergroup_axioms(HyperCtx(Prime(3), 2), 2, 600, 14, corrupt);
    CHECK(!r.pass);
    CHECK(!r.failures.empty());
    CHECK(r.to_string().find("FAIL") != std::string::npos);
}
