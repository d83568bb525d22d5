#include "afv/residue.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace afv {

namespace {

void require_nonneg(const HClass& g, const char* who) {
    if (!g.zero && g.gamma < 0)
        throw std::invalid_argument(std::string(who) + ": class " + hclass_to_string(g) +
                                    " has negative valuation");
}

}  // namespace

EClass eclass_of(const HClass& g, const HyperCtx& cx) {
    require_nonneg(g, "eclass_of");
    if (g.zero || g.gamma >= cx.level) return EClass{HClass::zero_class()};
    long long pml = pow_ll(cx.p.value(), cx.level - static_cast<int>(g.gamma));
    return EClass{HClass{false, g.gamma, g.unit % pml}};
}

bool in_zero_fiber(const HClass& g, const HyperCtx& cx) {
    HClass one{false, 0, 1};
    return sigma(one, g, one, cx);
}

bool e_equiv(const HClass& g, const HClass& h, const HyperCtx& cx) {
    require_nonneg(g, "e_equiv");
    require_nonneg(h, "e_equiv");
    if (in_zero_fiber(HClass::zero_class(), cx) && sigma(g, HClass::zero_class(), h, cx))
        return true;
    long long hi = cx.level;
    if (!g.zero) hi = std::max(hi, g.gamma);
    if (!h.zero) hi = std::max(hi, h.gamma);
    hi += cx.level;
    for (long long c = cx.level; c <= hi; ++c) {
        for (long long u : unit_residues(cx)) {
            HClass z{false, c, u};
            if (in_zero_fiber(z, cx) && sigma(g, z, h, cx)) return true;
        }
    }
    return false;
}

long long psi(const HClass& g, const HyperCtx& cx) {
    require_nonneg(g, "psi");
    if (g.zero || g.gamma >= cx.level) return 0;
    long long pg = pow_ll(cx.p.value(), static_cast<int>(g.gamma));
    return static_cast<long long>(static_cast<unsigned __int128>(pg) *
                                  static_cast<unsigned __int128>(g.unit) % cx.mod);
}

EClass eclass_add(const EClass& a, const EClass& b, const HyperCtx& cx) {
    ClassSet s = hyper_add(a.rep, b.rep, cx);
    std::vector<HClass> picks;
    switch (s.kind) {
        case ClassSet::Kind::Single:
            picks.push_back(s.single);
            break;
        case ClassSet::Kind::Sphere: {
            std::vector<HClass> ms = class_set_members(s, cx);
            picks.push_back(ms.front());
            picks.push_back(ms.back());
            break;
        }
        case ClassSet::Kind::Ball:
            picks.push_back(HClass::zero_class());
            picks.push_back(HClass{false, s.ball_min, 1});
            break;
    }
    EClass out = eclass_of(picks.front(), cx);
    for (std::size_t i = 1; i < picks.size(); ++i) {
        if (eclass_of(picks[i], cx) != out)
            throw std::logic_error("eclass_add: sum members disagree on the residue class");
    }
    return out;
}

EClass eclass_mul(const EClass& a, const EClass& b, const HyperCtx& cx) {
    return eclass_of(h_mul(a.rep, b.rep, cx), cx);
}

std::string RingIsoReport::to_string() const {
    std::ostringstream out;
    out << "residue ring check: p=" << p << " level=" << level << " classes="
        << classes_checked << " " << (pass ? "PASS" : "FAIL");
    for (const std::string& f : failures) out << "\n  " << f;
    return out.str();
}

RingIsoReport check_ring_iso(const HyperCtx& cx, long long gamma_bound) {
    if (gamma_bound < cx.level)
        throw std::invalid_argument("check_ring_iso: gamma_bound must be >= level");
    RingIsoReport rep;
    rep.p = cx.p.value();
    rep.level = cx.level;
    auto note = [&](const std::string& s) {
        rep.pass = false;
        if (rep.failures.size() < 10) rep.failures.push_back(s);
    };

    std::vector<HClass> domain;
    domain.push_back(HClass::zero_class());
    for (long long g = 0; g <= gamma_bound; ++g)
        for (long long u : unit_residues(cx)) domain.push_back(HClass{false, g, u});

    // Collapse the domain to equivalence classes; check the canonical map stays
    // within the class and that psi separates exactly the classes.
    std::set<EClass> classes;
    std::set<long long> residues;
    for (const HClass& g : domain) {
        EClass e = eclass_of(g, cx);
        if (!e_equiv(g, e.rep, cx))
            note("canonical representative of " + hclass_to_string(g) + " is not equivalent");
        if (psi(g, cx) != psi(e.rep, cx))
            note("canonicalization moved the residue of " + hclass_to_string(g));
        classes.insert(e);
        residues.insert(psi(g, cx));
    }
    rep.classes_checked = static_cast<long long>(classes.size());
    if (rep.classes_checked != cx.mod)
        note("expected " + std::to_string(cx.mod) + " classes, found " +
             std::to_string(rep.classes_checked));
    if (static_cast<long long>(residues.size()) != cx.mod)
        note("psi is not surjective onto Z/" + std::to_string(cx.mod));
    std::set<long long> canonical_residues;
    for (const EClass& e : classes) canonical_residues.insert(psi(e.rep, cx));
    if (canonical_residues.size() != classes.size())
        note("psi is not injective on canonical representatives");

    // Ring homomorphism on all pairs of canonical representatives.
    for (const EClass& a : classes) {
        for (const EClass& b : classes) {
            long long sum = (psi(a.rep, cx) + psi(b.rep, cx)) % cx.mod;
            long long prod = static_cast<long long>(
                static_cast<unsigned __int128>(psi(a.rep, cx)) *
                static_cast<unsigned __int128>(psi(b.rep, cx)) % cx.mod);
            if (psi(eclass_add(a, b, cx).rep, cx) != sum)
                note("additive: [" + hclass_to_string(a.rep) + "] + [" +
                     hclass_to_string(b.rep) + "]");
            if (psi(eclass_mul(a, b, cx).rep, cx) != prod)
                note("multiplicative: [" + hclass_to_string(a.rep) + "] * [" +
                     hclass_to_string(b.rep) + "]");
        }
    }
    return rep;
}

}  // namespace afv
