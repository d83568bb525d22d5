#include "afv/residue.hpp"

#include <set>
#include <vector>

#include "doctest.h"

using namespace afv;

namespace {

HClass cls(long long g, long long u, const HyperCtx& cx) { return make_cls(g, u, cx); }

// Domain used by the sweeps: Zero plus every class with 0 <= gamma <= bound,
// units thinned to at most max_units per level to keep big contexts desk-scale.
std::vector<HClass> domain(const HyperCtx& cx, long long bound, std::size_t max_units) {
    std::vector<long long> units = unit_residues(cx);
    std::vector<long long> picked;
    std::size_t step = units.size() / max_units + 1;
    for (std::size_t i = 0; i < units.size(); i += step) picked.push_back(units[i]);
    if (picked.back() != units.back()) picked.push_back(units.back());
    std::vector<HClass> out;
    out.push_back(HClass::zero_class());
    for (long long g = 0; g <= bound; ++g)
        for (long long u : picked) out.push_back(HClass{false, g, u});
    return out;
}

}  // namespace

TEST_CASE("zero fiber via the additive relation") {
    HyperCtx c51(Prime(5), 1);
    for (long long u : unit_residues(c51)) CHECK(in_zero_fiber(cls(2, u, c51), c51));
    CHECK(!in_zero_fiber(cls(0, 2, c51), c51));
    CHECK(in_zero_fiber(HClass::zero_class(), c51));

    // The relationally-defined fiber coincides with {Zero} u {gamma >= level}.
    for (const HyperCtx& cx :
         {HyperCtx(Prime(2), 2), HyperCtx(Prime(3), 2), HyperCtx(Prime(5), 1),
          HyperCtx(Prime(3), 3), HyperCtx(Prime(2), 3)}) {
        CHECK(in_zero_fiber(HClass::zero_class(), cx));
        for (long long g = -2; g <= cx.level + 3; ++g)
            for (long long u : unit_residues(cx)) {
                CAPTURE(g);
                CHECK(in_zero_fiber(HClass{false, g, u}, cx) == (g >= cx.level));
            }
    }
}

TEST_CASE("equivalence: pinned values") {
    HyperCtx c32(Prime(3), 2);
    for (long long u : unit_residues(c32))
        CHECK(e_equiv(cls(c32.level, u, c32), HClass::zero_class(), c32));
    CHECK(!e_equiv(cls(0, 1, c32), cls(0, 2, c32), c32));
    CHECK(e_equiv(cls(0, 1, c32), cls(0, 1, c32), c32));
    CHECK(e_equiv(HClass::zero_class(), HClass::zero_class(), c32));
    // Units agreeing below the surviving precision are identified: 3*1 = 3*4 = 3 mod 9.
    CHECK(e_equiv(cls(1, 1, c32), cls(1, 4, c32), c32));
    CHECK(!e_equiv(cls(1, 1, c32), cls(1, 2, c32), c32));
    CHECK_THROWS_AS(e_equiv(cls(-1, 1, c32), cls(0, 1, c32), c32), std::invalid_argument);
}

TEST_CASE("residue map") {
    HyperCtx c32(Prime(3), 2);
    CHECK(psi(cls(0, 1, c32), c32) == 1);
    CHECK(psi(cls(1, 2, c32), c32) == 6);
    CHECK(psi(cls(3, 2, c32), c32) == 0);
    CHECK(psi(HClass::zero_class(), c32) == 0);
    CHECK_THROWS_AS(psi(cls(-1, 1, c32), c32), std::invalid_argument);

    // Surjectivity at every context in the matrix.
    for (const HyperCtx& cx :
         {HyperCtx(Prime(2), 3), HyperCtx(Prime(3), 2), HyperCtx(Prime(5), 2)}) {
        std::set<long long> seen{0};
        for (long long g = 0; g < cx.level; ++g)
            for (long long u : unit_residues(cx)) seen.insert(psi(HClass{false, g, u}, cx));
        CHECK(static_cast<long long>(seen.size()) == cx.mod);
    }
}

TEST_CASE("canonical representatives") {
    HyperCtx c32(Prime(3), 2);
    CHECK(eclass_of(cls(1, 4, c32), c32).rep == cls(1, 1, c32));
    CHECK(eclass_of(cls(1, 1, c32), c32).rep == cls(1, 1, c32));
    CHECK(eclass_of(cls(0, 7, c32), c32).rep == cls(0, 7, c32));
    CHECK(eclass_of(cls(2, 2, c32), c32).rep == HClass::zero_class());
    CHECK(eclass_of(cls(5, 1, c32), c32).rep == HClass::zero_class());
    CHECK(eclass_of(HClass::zero_class(), c32).rep == HClass::zero_class());
    CHECK_THROWS_AS(eclass_of(cls(-1, 1, c32), c32), std::invalid_argument);

    // Canonicalization never moves the residue and always stays equivalent.
    for (const HyperCtx& cx :
         {HyperCtx(Prime(2), 3), HyperCtx(Prime(3), 2), HyperCtx(Prime(5), 2)}) {
        for (const HClass& g : domain(cx, cx.level + 2, 50)) {
            EClass e = eclass_of(g, cx);
            CHECK(psi(e.rep, cx) == psi(g, cx));
            CHECK(e_equiv(g, e.rep, cx));
        }
    }
}

TEST_CASE("induced ring operations") {
    HyperCtx c32(Prime(3), 2);
    EClass a = eclass_of(cls(0, 1, c32), c32);
    EClass b = eclass_of(cls(0, 2, c32), c32);
    CHECK(psi(eclass_add(a, b, c32).rep, c32) == 3);
    EClass p1 = eclass_of(cls(1, 1, c32), c32);
    EClass p2 = eclass_of(cls(1, 2, c32), c32);
    CHECK(eclass_mul(p1, p2, c32).rep == HClass::zero_class());
    EClass z = eclass_of(HClass::zero_class(), c32);
    for (const HClass& g : domain(c32, 3, 50)) {
        EClass e = eclass_of(g, c32);
        CHECK(eclass_add(z, e, c32) == e);
        CHECK(eclass_add(e, z, c32) == e);
    }
    // A cancelling pair exercises the ball path of the witness picker.
    EClass m = eclass_of(cls(0, 8, c32), c32);  // -1 mod 9
    EClass one = eclass_of(cls(0, 1, c32), c32);
    CHECK(eclass_add(one, m, c32).rep == HClass::zero_class());
}

TEST_CASE("equivalence matches residue equality") {
    for (long long p : {2LL, 3LL, 5LL}) {
        for (int level : {1, 2, 3}) {
            HyperCtx cx(Prime(p), level);
            std::size_t max_units = (p == 5 && level == 3) ? 15 : 100;
            std::vector<HClass> dom = domain(cx, cx.level + 2, max_units);
            for (const HClass& g : dom) {
                CHECK(e_equiv(g, g, cx));  // reflexive
                for (const HClass& h : dom) {
                    bool e = e_equiv(g, h, cx);
                    CAPTURE(hclass_to_string(g));
                    CAPTURE(hclass_to_string(h));
                    CHECK(e == (psi(g, cx) == psi(h, cx)));
                    CHECK(e == e_equiv(h, g, cx));  // symmetric
                }
            }
        }
    }
    // Transitivity, exhaustively on one mid-size context.
    HyperCtx cx(Prime(3), 2);
    std::vector<HClass> dom = domain(cx, cx.level + 2, 100);
    for (const HClass& a : dom)
        for (const HClass& b : dom)
            for (const HClass& c : dom)
                if (e_equiv(a, b, cx) && e_equiv(b, c, cx)) CHECK(e_equiv(a, c, cx));
}

TEST_CASE("fiber sizes over residues") {
    for (long long p : {2LL, 3LL, 5LL}) {
        for (int level : {1, 2, 3}) {
            HyperCtx cx(Prime(p), level);
            for (long long a = 0; a < cx.level; ++a) {
                long long pa = pow_ll(p, static_cast<int>(a));
                // Pick a residue of valuation a and count its preimages among
                // the classes at that valuation.
                long long r = pa % cx.mod;
                long long count = 0;
                for (long long u : unit_residues(cx))
                    if (psi(HClass{false, a, u}, cx) == r) ++count;
                CHECK(count == pa);
            }
        }
    }
}

TEST_CASE("ring isomorphism reports") {
    RingIsoReport a = check_ring_iso(HyperCtx(Prime(3), 2), 4);
    CHECK(a.pass);
    CHECK(a.classes_checked == 9);
    RingIsoReport b = check_ring_iso(HyperCtx(Prime(2), 3), 5);
    CHECK(b.pass);
    CHECK(b.classes_checked == 8);
    RingIsoReport c = check_ring_iso(HyperCtx(Prime(5), 1), 2);
    CHECK(c.pass);
    CHECK(c.classes_checked == 5);
    CHECK(c.to_string().find("PASS") != std::string::npos);
    CHECK(c.to_string().find("classes=5") != std::string::npos);
    CHECK_THROWS_AS(check_ring_iso(HyperCtx(Prime(3), 2), 1), std::invalid_argument);

    RingIsoReport d = check_ring_iso(HyperCtx(Prime(5), 2), 3);
    CHECK(d.pass);
    CHECK(d.classes_checked == 25);
}
