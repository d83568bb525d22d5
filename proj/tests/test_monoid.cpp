#include "doctest.h"

#include <random>
#include <vector>

#include "afv/monoid.hpp"
#include "afv/prime_set.hpp"

using namespace afv;

namespace {

FormulaPtr mon_f(const std::string& s) { return parse_formula(s, Signature::monoid()); }

MonoidElement elem(Val def, std::map<long long, Val> exc) {
    return make_monoid(def, std::move(exc));
}

const std::vector<long long> kPrimes = {2, 3, 5, 7, 11};

MonoidElement random_element(std::mt19937& rng, MonoidVersion v) {
    Val def = Val::of(0);
    if (v == MonoidVersion::TotallyDefined) {
        int pick = rng() % 4;
        def = pick == 3 ? Val::inf() : Val::of(pick);
    } else if (v == MonoidVersion::InfinityFree) {
        def = Val::of(rng() % 3);
    }
    std::map<long long, Val> exc;
    for (long long p : kPrimes) {
        if (rng() % 3 != 0) continue;
        if (v == MonoidVersion::TotallyDefined && rng() % 5 == 0)
            exc.emplace(p, Val::inf());
        else
            exc.emplace(p, Val::of(static_cast<long long>(rng() % 9) - 3));
    }
    return make_monoid(def, std::move(exc));
}

}  // namespace

TEST_CASE("coordinatewise operations and the infinite element") {
    MonoidElement zero = elem(Val::of(0), {});
    MonoidElement top = elem(Val::inf(), {});
    CHECK(m_add(zero, top) == top);
    CHECK(m_add(top, top) == top);
    CHECK(m_meet(top, elem(Val::of(2), {{3, Val::of(-1)}})) ==
          elem(Val::of(2), {{3, Val::of(-1)}}));
    CHECK(m_join(top, elem(Val::of(2), {{3, Val::of(-1)}})) == top);

    CHECK(m_join(monoid_atom(Prime(2)), monoid_atom(Prime(3))) ==
          elem(Val::of(0), {{2, Val::of(1)}, {3, Val::of(1)}}));

    SUBCASE("meet with zero detects nonnegativity") {
        CHECK(m_meet(elem(Val::of(1), {{2, Val::of(3)}}), zero) == zero);
        CHECK(m_meet(elem(Val::of(0), {{2, Val::of(-1)}}), zero) ==
              elem(Val::of(0), {{2, Val::of(-1)}}));
    }
    SUBCASE("construction is canonical") {
        CHECK(elem(Val::of(1), {{5, Val::of(1)}}) == elem(Val::of(1), {}));
        CHECK_THROWS_AS(make_monoid(Val::of(-1)), std::invalid_argument);
        CHECK_THROWS_AS(make_monoid(Val::of(0), {{4, Val::of(1)}}), std::invalid_argument);
    }
    SUBCASE("stalks") {
        MonoidElement a = elem(Val::of(2), {{7, Val::inf()}});
        CHECK(m_stalk(a, Prime(7)) == Val::inf());
        CHECK(m_stalk(a, Prime(13)) == Val::of(2));
    }
}

TEST_CASE("atoms") {
    auto a7 = is_atom(monoid_atom(Prime(7)));
    REQUIRE(a7.has_value());
    CHECK(a7->value() == 7);
    CHECK_FALSE(is_atom(elem(Val::of(1), {})).has_value());
    CHECK_FALSE(is_atom(elem(Val::of(0), {{5, Val::of(2)}})).has_value());
    CHECK_FALSE(is_atom(elem(Val::of(0), {})).has_value());
    CHECK_FALSE(is_atom(elem(Val::of(0), {{2, Val::of(1)}, {3, Val::of(1)}})).has_value());
}

TEST_CASE("chain intervals") {
    MonoidElement e2 = monoid_atom(Prime(2));
    MonoidElement h2 = elem(Val::of(0), {{2, Val::of(3)}});
    CHECK(chain_interval(e2, m_add(h2, h2)));
    MonoidElement mixed = elem(Val::of(0), {{2, Val::of(4)}, {3, Val::of(2)}});
    CHECK_FALSE(chain_interval(e2, mixed));
    CHECK(chain_interval(mixed, mixed));
    CHECK_THROWS_AS(chain_interval(mixed, e2), std::invalid_argument);
    // Differing defaults vary in infinitely many coordinates.
    CHECK_FALSE(chain_interval(elem(Val::of(0), {}), elem(Val::of(1), {})));
}

TEST_CASE("internal stalk membership") {
    MonoidElement e2 = monoid_atom(Prime(2));
    CHECK(in_internal_stalk(elem(Val::of(0), {}), e2, MonoidVersion::TotallyDefined));
    CHECK(in_internal_stalk(elem(Val::of(0), {{2, Val::of(3)}}), e2,
                            MonoidVersion::TotallyDefined));
    CHECK_FALSE(in_internal_stalk(elem(Val::of(0), {{2, Val::of(3)}, {3, Val::of(1)}}), e2,
                                  MonoidVersion::TotallyDefined));
    SUBCASE("negative and infinite coordinates") {
        CHECK(in_internal_stalk(elem(Val::of(0), {{2, Val::of(-3)}}), e2, MonoidVersion::Idelic));
        CHECK_FALSE(in_internal_stalk(elem(Val::of(0), {{2, Val::of(-3)}, {5, Val::of(-1)}}), e2,
                                      MonoidVersion::Idelic));
        CHECK(in_internal_stalk(elem(Val::of(0), {{2, Val::inf()}}), e2,
                                MonoidVersion::TotallyDefined));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(in_internal_stalk(e2, elem(Val::of(0), {{2, Val::of(2)}}),
                                          MonoidVersion::TotallyDefined),
                        std::invalid_argument);
        CHECK_THROWS_AS(in_internal_stalk(elem(Val::inf(), {}), e2, MonoidVersion::InfinityFree),
                        std::invalid_argument);
        CHECK_THROWS_AS(in_internal_stalk(elem(Val::of(1), {}), e2, MonoidVersion::Idelic),
                        std::invalid_argument);
    }
    SUBCASE("order characterization equals support inspection at random") {
        std::mt19937 rng(4201);
        for (MonoidVersion v : {MonoidVersion::TotallyDefined, MonoidVersion::InfinityFree,
                                MonoidVersion::Idelic}) {
            for (int i = 0; i < 1000; ++i) {
                MonoidElement h = random_element(rng, v);
                Prime p(kPrimes[rng() % kPrimes.size()]);
                bool direct = h.def == Val::of(0);
                for (const auto& [q, val] : h.exceptions)
                    if (q != p.value()) direct = false;
                // The implementation throws if its two readings ever disagree.
                CHECK(in_internal_stalk(h, monoid_atom(p), v) == direct);
            }
        }
    }
}

TEST_CASE("equivalence at an atom") {
    MonoidElement e2 = monoid_atom(Prime(2));
    MonoidElement f = elem(Val::of(0), {{2, Val::of(5)}, {3, Val::of(1)}});
    MonoidElement g = elem(Val::of(0), {{2, Val::of(5)}, {7, Val::of(4)}});
    CHECK(equiv_at_atom(f, g, e2, true));
    CHECK_FALSE(equiv_at_atom(elem(Val::of(0), {{2, Val::of(1)}}),
                              elem(Val::of(0), {{2, Val::of(2)}}), e2, true));
    CHECK(equiv_at_atom(f, f, e2, true));
    SUBCASE("off-atom positive support does not blind the definable form") {
        // Both arguments dominate no internal-stalk element and are dominated
        // by none with the wrong orientation; the corrected reading still
        // separates them.
        MonoidElement a = elem(Val::of(0), {{2, Val::of(1)}, {3, Val::of(5)}});
        MonoidElement b = elem(Val::of(0), {{2, Val::of(2)}, {3, Val::of(7)}});
        CHECK_FALSE(equiv_at_atom(a, b, e2, true));
    }
    SUBCASE("mixed signs and infinities") {
        MonoidElement a = elem(Val::of(1), {{2, Val::of(-4)}, {5, Val::inf()}});
        MonoidElement b = elem(Val::of(2), {{2, Val::of(-4)}});
        CHECK(equiv_at_atom(a, b, e2, true));
        CHECK_FALSE(equiv_at_atom(a, b, monoid_atom(Prime(5)), true));
        CHECK(equiv_at_atom(elem(Val::inf(), {}), elem(Val::of(0), {{2, Val::inf()}}), e2, true));
    }
    SUBCASE("random debug verification") {
        std::mt19937 rng(515);
        for (MonoidVersion v : {MonoidVersion::TotallyDefined, MonoidVersion::InfinityFree,
                                MonoidVersion::Idelic}) {
            for (int i = 0; i < 1000; ++i) {
                MonoidElement f1 = random_element(rng, v);
                MonoidElement g1 = random_element(rng, v);
                Prime p(kPrimes[rng() % kPrimes.size()]);
                CHECK(equiv_at_atom(f1, g1, monoid_atom(p), true) ==
                      (m_stalk(f1, p) == m_stalk(g1, p)));
            }
        }
    }
}

TEST_CASE("finiteness of Boolean elements") {
    CHECK(is_finite_boolean(elem(Val::of(0), {{2, Val::of(1)}, {3, Val::of(1)}})));
    CHECK(is_finite_boolean(elem(Val::of(0), {})));
    CHECK_FALSE(is_finite_boolean(elem(Val::of(1), {})));
    CHECK_FALSE(is_finite_boolean(elem(Val::of(1), {{2, Val::of(0)}})));
    CHECK_THROWS_AS(is_finite_boolean(elem(Val::of(2), {})), std::invalid_argument);
    CHECK_THROWS_AS(is_finite_boolean(elem(Val::of(0), {{2, Val::inf()}})),
                    std::invalid_argument);
}

TEST_CASE("flagged pairs model the finite/cofinite algebra") {
    auto atoms_of = [](const std::vector<long long>& ps) {
        std::map<long long, Val> exc;
        for (long long p : ps) exc.emplace(p, Val::of(1));
        return make_monoid(Val::of(0), std::move(exc));
    };
    BBetaElement bottom = make_bbeta(atoms_of({}), false);
    BBetaElement top = make_bbeta(atoms_of({}), true);

    SUBCASE("defining equations") {
        BBetaElement x0 = make_bbeta(atoms_of({2, 3}), false);
        CHECK(bbeta_compl(x0) == make_bbeta(atoms_of({2, 3}), true));
        BBetaElement e20 = make_bbeta(atoms_of({2}), false);
        CHECK(bbeta_meet(e20, bbeta_compl(e20)) == bottom);
        CHECK_FALSE(bbeta_fin(make_bbeta(atoms_of({2, 3}), true)));
        CHECK(bbeta_fin(x0));
        BBetaElement y = make_bbeta(atoms_of({3, 5}), true);
        CHECK(bbeta_meet(bbeta_compl(x0), y) ==
              make_bbeta(m_join(atoms_of({2, 3}), atoms_of({3, 5})), true));
        CHECK(bbeta_join(bbeta_compl(x0), y) ==
              make_bbeta(m_meet(atoms_of({2, 3}), atoms_of({3, 5})), true));
        CHECK(bbeta_meet(x0, y) == make_bbeta(atoms_of({2}), false));
    }
    SUBCASE("component validation") {
        CHECK_THROWS_AS(make_bbeta(elem(Val::of(1), {}), false), std::invalid_argument);
        CHECK_THROWS_AS(make_bbeta(elem(Val::of(0), {{2, Val::of(2)}}), false),
                        std::invalid_argument);
    }

    // Exhaustive Boolean-algebra check over supports inside {2,3,5,7}.
    std::vector<BBetaElement> all;
    const std::vector<long long> base = {2, 3, 5, 7};
    for (int mask = 0; mask < 16; ++mask) {
        std::vector<long long> ps;
        for (int i = 0; i < 4; ++i)
            if (mask & (1 << i)) ps.push_back(base[i]);
        all.push_back(make_bbeta(atoms_of(ps), false));
        all.push_back(make_bbeta(atoms_of(ps), true));
    }
    SUBCASE("lattice axioms on all triples") {
        for (const BBetaElement& a : all)
            for (const BBetaElement& b : all) {
                CHECK(bbeta_meet(a, b) == bbeta_meet(b, a));
                CHECK(bbeta_join(a, b) == bbeta_join(b, a));
                CHECK(bbeta_meet(a, bbeta_join(a, b)) == a);
                CHECK(bbeta_join(a, bbeta_meet(a, b)) == a);
            }
        std::mt19937 rng(99);
        for (int i = 0; i < 4000; ++i) {
            const BBetaElement& a = all[rng() % all.size()];
            const BBetaElement& b = all[rng() % all.size()];
            const BBetaElement& c = all[rng() % all.size()];
            CHECK(bbeta_meet(a, bbeta_meet(b, c)) == bbeta_meet(bbeta_meet(a, b), c));
            CHECK(bbeta_join(a, bbeta_join(b, c)) == bbeta_join(bbeta_join(a, b), c));
            CHECK(bbeta_meet(a, bbeta_join(b, c)) ==
                  bbeta_join(bbeta_meet(a, b), bbeta_meet(a, c)));
            CHECK(bbeta_join(a, bbeta_meet(b, c)) ==
                  bbeta_meet(bbeta_join(a, b), bbeta_join(a, c)));
        }
    }
    SUBCASE("complement laws and bounds") {
        for (const BBetaElement& a : all) {
            CHECK(bbeta_meet(a, bbeta_compl(a)) == bottom);
            CHECK(bbeta_join(a, bbeta_compl(a)) == top);
            CHECK(bbeta_compl(bbeta_compl(a)) == a);
            CHECK(bbeta_meet(a, top) == a);
            CHECK(bbeta_join(a, bottom) == a);
            CHECK(bbeta_meet(a, bottom) == bottom);
            CHECK(bbeta_join(a, top) == top);
        }
    }
    SUBCASE("the encoding matches the set algebra") {
        for (const BBetaElement& a : all) {
            CHECK(bbeta_fin(a) == (eval_fin(bbeta_set(a)) == Tri::True));
            for (const BBetaElement& b : all) {
                CHECK(ps_equal(bbeta_set(bbeta_meet(a, b)), ps_meet(bbeta_set(a), bbeta_set(b))));
                CHECK(ps_equal(bbeta_set(bbeta_join(a, b)), ps_join(bbeta_set(a), bbeta_set(b))));
            }
            CHECK(ps_equal(bbeta_set(bbeta_compl(a)), ps_compl(bbeta_set(a))));
        }
    }
}

TEST_CASE("finiteness of direct-sum truth sets") {
    MonoidElement e2 = monoid_atom(Prime(2));
    CHECK(dsum_fin_check(mon_f("(not (= x 0))"), {{"x", e2}}));
    CHECK_FALSE(dsum_fin_check(mon_f("(= x 0)"), {{"x", e2}}));
    CHECK_FALSE(dsum_fin_check(mon_f("(= (meet x 0) 0)"), {{"x", e2}}));
    CHECK_FALSE(dsum_fin_check(mon_f("(= (meet x 0) 0)"),
                               {{"x", elem(Val::of(0), {{3, Val::of(-2)}})}}));
    CHECK(dsum_fin_check(mon_f("(not (= (meet x 0) 0))"),
                         {{"x", elem(Val::of(0), {{3, Val::of(-2)}})}}));
    CHECK(dsum_fin_check(mon_f("(= (+ x y) 3)"),
                         {{"x", elem(Val::of(0), {{2, Val::of(1)}})},
                          {"y", elem(Val::of(0), {{2, Val::of(2)}, {5, Val::of(3)}})}}));
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(dsum_fin_check(mon_f("(= x 0)"), {{"x", elem(Val::of(1), {})}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(dsum_fin_check(mon_f("(= x 0)"), {{"x", elem(Val::of(0), {{2, Val::inf()}})}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(dsum_fin_check(mon_f("(exists (y mon) (= y x))"), {{"x", e2}}),
                        std::invalid_argument);
    }
}

TEST_CASE("lattice-ordered monoid axioms at random") {
    std::mt19937 rng(2024);
    MonoidElement zero = elem(Val::of(0), {});
    for (MonoidVersion v : {MonoidVersion::TotallyDefined, MonoidVersion::InfinityFree,
                            MonoidVersion::Idelic}) {
        for (int i = 0; i < 3400; ++i) {
            MonoidElement a = random_element(rng, v);
            MonoidElement b = random_element(rng, v);
            MonoidElement c = random_element(rng, v);
            CHECK(m_add(a, b) == m_add(b, a));
            CHECK(m_add(a, m_add(b, c)) == m_add(m_add(a, b), c));
            CHECK(m_add(a, zero) == a);
            CHECK(m_meet(a, b) == m_meet(b, a));
            CHECK(m_join(a, b) == m_join(b, a));
            CHECK(m_meet(a, m_meet(b, c)) == m_meet(m_meet(a, b), c));
            CHECK(m_join(a, m_join(b, c)) == m_join(m_join(a, b), c));
            CHECK(m_meet(a, a) == a);
            CHECK(m_meet(a, m_join(a, b)) == a);
            CHECK(m_join(a, m_meet(a, b)) == a);
            // Translation distributes over meet and join.
            CHECK(m_add(a, m_meet(b, c)) == m_meet(m_add(a, b), m_add(a, c)));
            CHECK(m_add(a, m_join(b, c)) == m_join(m_add(a, b), m_add(a, c)));
        }
    }
}

TEST_CASE("linearity holds in stalks and fails in the product") {
    MonoidElement e2 = monoid_atom(Prime(2));
    MonoidElement e3 = monoid_atom(Prime(3));
    MonoidElement m = m_meet(e2, e3);
    CHECK(m != e2);
    CHECK(m != e3);  // the witness pair: neither meet-absorbs the other
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        Val a = rng() % 7 == 0 ? Val::inf() : Val::of(static_cast<long long>(rng() % 21) - 10);
        Val b = rng() % 7 == 0 ? Val::inf() : Val::of(static_cast<long long>(rng() % 21) - 10);
        Val m2 = val_min(a, b);
        CHECK((m2 == a || m2 == b));  // every stalk is a chain
    }
}

TEST_CASE("valuations of rational families") {
    FiniteAdele sixth = diagonal_adele(Rat{Int(1), Int(6)});
    CHECK(prod_val(sixth) == elem(Val::of(0), {{2, Val::of(-1)}, {3, Val::of(-1)}}));
    CHECK(prod_val(diagonal_adele(Rat(0))) == elem(Val::inf(), {}));
    FiniteAdele e2 = idempotent_adele(PrimeSet::finite({2}));
    CHECK(prod_val(e2) == elem(Val::inf(), {{2, Val::of(0)}}));

    std::mt19937 rng(606);
    std::vector<Rat> pool = {Rat(0),  Rat(1),  Rat{Int(1), Int(2)}, Rat(12), Rat{Int(9), Int(10)},
                             Rat(-6), Rat{Int(-1), Int(4)}};
    auto random_adele = [&]() {
        std::map<long long, Rat> exc;
        for (long long p : {2, 3, 5, 7})
            if (rng() % 3 == 0) exc.emplace(p, pool[rng() % pool.size()]);
        return make_adele(pool[rng() % pool.size()], std::move(exc));
    };
    for (int i = 0; i < 1000; ++i) {
        FiniteAdele f = random_adele();
        FiniteAdele g = random_adele();
        CHECK(prod_val(adele_mul(f, g)) == m_add(prod_val(f), prod_val(g)));
        CHECK(m_le(m_meet(prod_val(f), prod_val(g)), prod_val(adele_add(f, g))));
        // The stalkwise reading agrees with the symbolic one.
        for (long long p : {2, 3, 5, 7, 11}) {
            Prime pp(p);
            CHECK(m_stalk(prod_val(f), pp) == vp(stalk_project(f, pp), pp));
        }
    }
}

TEST_CASE("value element serialization") {
    MonoidElement a = elem(Val::of(0), {{2, Val::of(3)}, {7, Val::inf()}});
    CHECK(monoid_from_json(monoid_to_json(a)) == a);
    CHECK(monoid_from_json("{\"default\":0,\"exceptions\":{\"2\":3,\"7\":\"inf\"}}") == a);
    CHECK(monoid_from_json("{\"default\":\"inf\"}") == elem(Val::inf(), {}));
    CHECK_THROWS_AS(monoid_from_json("{}"), std::invalid_argument);
    CHECK_THROWS_AS(monoid_from_json("{\"default\":-2}"), std::invalid_argument);
    CHECK_THROWS_AS(monoid_from_json("nope"), std::invalid_argument);
}
