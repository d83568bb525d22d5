#include "afv/monoid.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "afv/prime_set.hpp"
#include "json.hpp"

namespace afv {

namespace {

Val val_max(const Val& a, const Val& b) { return a < b ? b : a; }

const MonoidElement& m_zero() {
    static const MonoidElement z{};
    return z;
}

std::set<long long> key_union(const MonoidElement& a, const MonoidElement& b) {
    std::set<long long> keys;
    for (const auto& [p, v] : a.exceptions) keys.insert(p);
    for (const auto& [p, v] : b.exceptions) keys.insert(p);
    return keys;
}

template <typename F>
MonoidElement m_pointwise(const MonoidElement& a, const MonoidElement& b, F op) {
    std::map<long long, Val> exc;
    for (long long p : key_union(a, b)) {
        Prime pp(p);
        exc.emplace(p, op(m_stalk(a, pp), m_stalk(b, pp)));
    }
    return make_monoid(op(a.def, b.def), std::move(exc));
}

}  // namespace

MonoidElement make_monoid(Val def, std::map<long long, Val> exceptions) {
    if (!def.is_inf() && def.finite() < 0)
        throw std::invalid_argument("value element: default must be >= 0 or infinite");
    MonoidElement a;
    a.def = def.is_inf() ? Val::inf() : def;  // canonical infinity
    for (auto& [p, v] : exceptions) {
        Prime check(p);  // validates
        Val canon = v.is_inf() ? Val::inf() : v;
        if (canon != a.def) a.exceptions.emplace(p, canon);
    }
    return a;
}

MonoidElement monoid_atom(const Prime& p) {
    return make_monoid(Val::of(0), {{p.value(), Val::of(1)}});
}

Val m_stalk(const MonoidElement& a, const Prime& p) {
    auto it = a.exceptions.find(p.value());
    return it == a.exceptions.end() ? a.def : it->second;
}

bool fits_version(const MonoidElement& a, MonoidVersion v) {
    switch (v) {
        case MonoidVersion::TotallyDefined:
            return true;
        case MonoidVersion::InfinityFree: {
            if (a.def.is_inf()) return false;
            for (const auto& [p, val] : a.exceptions)
                if (val.is_inf()) return false;
            return true;
        }
        case MonoidVersion::Idelic: {
            if (a.def != Val::of(0)) return false;
            for (const auto& [p, val] : a.exceptions)
                if (val.is_inf()) return false;
            return true;
        }
    }
    return false;
}

MonoidElement m_add(const MonoidElement& a, const MonoidElement& b) {
    return m_pointwise(a, b, [](const Val& x, const Val& y) { return x + y; });
}
MonoidElement m_meet(const MonoidElement& a, const MonoidElement& b) {
    return m_pointwise(a, b, val_min);
}
MonoidElement m_join(const MonoidElement& a, const MonoidElement& b) {
    return m_pointwise(a, b, val_max);
}

bool m_le(const MonoidElement& a, const MonoidElement& b) {
    if (!(a.def <= b.def)) return false;
    for (long long p : key_union(a, b)) {
        Prime pp(p);
        if (!(m_stalk(a, pp) <= m_stalk(b, pp))) return false;
    }
    return true;
}

std::optional<Prime> is_atom(const MonoidElement& a) {
    if (a.def != Val::of(0) || a.exceptions.size() != 1) return std::nullopt;
    const auto& [p, v] = *a.exceptions.begin();
    if (v != Val::of(1)) return std::nullopt;
    return Prime(p);
}

bool chain_interval(const MonoidElement& a, const MonoidElement& b) {
    if (!m_le(a, b)) throw std::invalid_argument("chain interval: need a <= b");
    if (a.def != b.def) return false;  // infinitely many varying coordinates
    int varying = 0;
    for (long long p : key_union(a, b)) {
        Prime pp(p);
        if (m_stalk(a, pp) != m_stalk(b, pp) && ++varying > 1) return false;
    }
    return true;
}

bool in_internal_stalk(const MonoidElement& h, const MonoidElement& e, MonoidVersion v) {
    auto atom = is_atom(e);
    if (!atom) throw std::invalid_argument("internal stalk: e must be an atom");
    if (!fits_version(h, v))
        throw std::invalid_argument("internal stalk: element outside this version");

    bool by_order;
    if (h == m_zero()) {
        by_order = true;
    } else if (m_le(e, h)) {
        by_order = chain_interval(e, m_add(h, h));
    } else {
        MonoidElement neg_e = make_monoid(Val::of(0), {{atom->value(), Val::of(-1)}});
        by_order = m_le(h, neg_e) && chain_interval(m_add(h, h), neg_e);
    }

    bool direct = h.def == Val::of(0);
    if (direct) {
        for (const auto& [p, val] : h.exceptions)
            if (p != atom->value()) {
                direct = false;
                break;
            }
    }
    if (by_order != direct)
        throw std::logic_error("internal stalk: order characterization diverged from support");
    return by_order;
}

namespace {

// Nonnegative / nonpositive parts of a coordinate value.
Val val_pos(const Val& x) { return x < Val::of(0) ? Val::of(0) : x; }
Val val_neg(const Val& x) { return x < Val::of(0) ? x : Val::of(0); }

MonoidElement part(const MonoidElement& f, Val (*sel)(const Val&)) {
    std::map<long long, Val> exc;
    for (const auto& [p, v] : f.exceptions) exc.emplace(p, sel(v));
    return make_monoid(sel(f.def), std::move(exc));
}

MonoidElement stalk_singleton(const Prime& p, const Val& c) {
    return make_monoid(Val::of(0), {{p.value(), c}});
}

}  // namespace

bool equiv_at_atom(const MonoidElement& f, const MonoidElement& g, const MonoidElement& e,
                   bool debug) {
    auto atom = is_atom(e);
    if (!atom) throw std::invalid_argument("equivalence at atom: e must be an atom");
    const Prime p = *atom;
    bool direct = m_stalk(f, p) == m_stalk(g, p);
    if (!debug) return direct;

    // Sign decompositions: f = f+ + f-, likewise g. Defaults are >= 0, so the
    // negative parts have default 0 (finite support), as required for the
    // decomposition to exist inside the restricted product.
    MonoidElement fp = part(f, val_pos), fm = part(f, val_neg);
    MonoidElement gp = part(g, val_pos), gm = part(g, val_neg);
    if (m_add(fp, fm) != f || m_add(gp, gm) != g)
        throw std::logic_error("equivalence at atom: decomposition failed");

    // Positive parts: h <= f+ iff h <= g+ for internal-stalk h. The window
    // covers every value that can separate the two down-sets, plus infinity.
    long long cap = 0;
    for (const Val& v : {m_stalk(fp, p), m_stalk(gp, p)})
        if (!v.is_inf()) cap = std::max(cap, v.finite());
    bool pos_ok = true;
    for (long long c = 0; c <= cap + 1 && pos_ok; ++c) {
        MonoidElement h = stalk_singleton(p, Val::of(c));
        pos_ok = m_le(h, fp) == m_le(h, gp);
    }
    if (pos_ok) {
        MonoidElement h = stalk_singleton(p, Val::inf());
        pos_ok = m_le(h, fp) == m_le(h, gp);
    }

    // Negative parts: order reversed, h >= f- iff h >= g-.
    long long ncap = 0;
    for (const Val& v : {m_stalk(fm, p), m_stalk(gm, p)})
        ncap = std::max(ncap, -v.finite());
    bool neg_ok = true;
    for (long long c = 0; c <= ncap + 1 && neg_ok; ++c) {
        MonoidElement h = stalk_singleton(p, Val::of(-c));
        neg_ok = m_le(fm, h) == m_le(gm, h);
    }

    if ((pos_ok && neg_ok) != direct)
        throw std::logic_error("equivalence at atom: definable form diverged from coordinates");
    return direct;
}

bool is_finite_boolean(const MonoidElement& b) {
    auto boolean = [](const Val& v) { return v == Val::of(0) || v == Val::of(1); };
    if (!boolean(b.def)) throw std::invalid_argument("finite test: element is not Boolean");
    for (const auto& [p, v] : b.exceptions)
        if (!boolean(v)) throw std::invalid_argument("finite test: element is not Boolean");

    bool finite = b.def == Val::of(0);
    if (finite) {
        // The additive inverse exists: negate the support and cancel.
        std::map<long long, Val> neg;
        for (const auto& [p, v] : b.exceptions)
            if (v == Val::of(1)) neg.emplace(p, Val::of(-1));
        if (m_add(b, make_monoid(Val::of(0), std::move(neg))) != m_zero())
            throw std::logic_error("finite test: inverse failed to cancel");
    }
    // An infinite-support element has no inverse: its inverse would need a
    // negative default, which restrictedness forbids.
    return finite;
}

// ---------------------------------------------------------------------------
// The interpreted finite/cofinite algebra
// ---------------------------------------------------------------------------

BBetaElement make_bbeta(MonoidElement x, bool beta) {
    if (x.def != Val::of(0))
        throw std::invalid_argument("flagged element: component must have finite support");
    for (const auto& [p, v] : x.exceptions)
        if (v != Val::of(1))
            throw std::invalid_argument("flagged element: component must be a join of atoms");
    return BBetaElement{std::move(x), beta};
}

BBetaElement bbeta_meet(const BBetaElement& a, const BBetaElement& b) {
    if (!a.beta && !b.beta) return make_bbeta(m_meet(a.x, b.x), false);
    if (a.beta && b.beta) return make_bbeta(m_join(a.x, b.x), true);
    // Mixed flags: the unflagged side survives away from the flagged support.
    const BBetaElement& plain = a.beta ? b : a;
    const BBetaElement& flagged = a.beta ? a : b;
    std::map<long long, Val> exc;
    for (const auto& [p, v] : plain.x.exceptions)
        if (flagged.x.exceptions.find(p) == flagged.x.exceptions.end()) exc.emplace(p, v);
    return make_bbeta(make_monoid(Val::of(0), std::move(exc)), false);
}

BBetaElement bbeta_compl(const BBetaElement& a) { return BBetaElement{a.x, !a.beta}; }

BBetaElement bbeta_join(const BBetaElement& a, const BBetaElement& b) {
    return bbeta_compl(bbeta_meet(bbeta_compl(a), bbeta_compl(b)));
}

bool bbeta_fin(const BBetaElement& a) {
    bool fin_x = is_finite_boolean(a.x);
    return a.beta ? !fin_x : fin_x;
}

PrimeSet bbeta_set(const BBetaElement& a) {
    std::vector<long long> base;
    for (const auto& [p, v] : a.x.exceptions) base.push_back(p);
    return a.beta ? PrimeSet::cofinite(std::move(base)) : PrimeSet::finite(std::move(base));
}

// ---------------------------------------------------------------------------
// Direct-sum Boolean values
// ---------------------------------------------------------------------------

namespace {

void require_qf(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            throw std::invalid_argument("direct-sum check: formula must be quantifier-free");
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            return;
        default:
            for (const FormulaPtr& k : f->kids) require_qf(k);
    }
}

Val monoid_term_eval(const TermPtr& t, const std::map<std::string, Val>& env) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = env.find(t->name);
            if (it == env.end())
                throw std::invalid_argument("value term: unbound variable '" + t->name + "'");
            return it->second;
        }
        case Term::Kind::Const: {
            if (t->name == "inf") return Val::inf();
            try {
                return Val::of(std::stoll(t->name));
            } catch (const std::exception&) {
                throw std::invalid_argument("value term: unknown constant '" + t->name + "'");
            }
        }
        case Term::Kind::App: {
            Val a = monoid_term_eval(t->args[0], env);
            Val b = monoid_term_eval(t->args[1], env);
            if (t->name == "+") return a + b;
            if (t->name == "meet") return val_min(a, b);
            if (t->name == "join") return val_max(a, b);
            throw std::invalid_argument("value term: unknown function '" + t->name + "'");
        }
        default:
            throw std::invalid_argument("value term: Boolean-sort term in a value position");
    }
}

bool eval_monoid_formula(const FormulaPtr& f, const std::map<std::string, Val>& env) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            if (f->rel == "true") return true;
            if (f->rel == "false") return false;
            throw std::invalid_argument("value formula: unknown relation '" + f->rel + "'");
        case Formula::Kind::Eq:
            return monoid_term_eval(f->terms[0], env) == monoid_term_eval(f->terms[1], env);
        case Formula::Kind::Not:
            return !eval_monoid_formula(f->kids[0], env);
        case Formula::Kind::And:
            return eval_monoid_formula(f->kids[0], env) && eval_monoid_formula(f->kids[1], env);
        case Formula::Kind::Or:
            return eval_monoid_formula(f->kids[0], env) || eval_monoid_formula(f->kids[1], env);
        case Formula::Kind::Implies:
            return !eval_monoid_formula(f->kids[0], env) || eval_monoid_formula(f->kids[1], env);
        default:
            throw std::invalid_argument("value formula: quantifier in quantifier-free evaluation");
    }
}

}  // namespace

bool dsum_fin_check(const FormulaPtr& phi, const std::map<std::string, MonoidElement>& args) {
    require_qf(phi);
    std::map<std::string, std::string> sorts;
    check_sorts(phi, Signature::monoid(), sorts);
    for (const std::string& v : free_vars(phi)) {
        if (args.find(v) == args.end())
            throw std::invalid_argument("direct-sum check: no argument for variable '" + v + "'");
    }
    std::set<long long> support;
    for (const auto& [name, a] : args) {
        if (!fits_version(a, MonoidVersion::Idelic))
            throw std::invalid_argument("direct-sum check: arguments must have finite support");
        for (const auto& [p, v] : a.exceptions) support.insert(p);
    }

    auto truth_at = [&](const Prime& p) {
        std::map<std::string, Val> env;
        for (const auto& [name, a] : args) env.emplace(name, m_stalk(a, p));
        return eval_monoid_formula(phi, env);
    };
    std::map<std::string, Val> zeros;
    for (const auto& [name, a] : args) zeros.emplace(name, Val::of(0));
    bool generic = eval_monoid_formula(phi, zeros);

    bool finite = !generic;

    // Cross-check the order-theoretic reading: the truth set is finite iff one
    // element dominates every atom in it.
    std::vector<long long> window = primes_below(50);
    for (long long p : support) window.push_back(p);
    if (finite) {
        std::map<long long, Val> cover;
        for (long long p : support)
            if (truth_at(Prime(p))) cover.emplace(p, Val::of(1));
        MonoidElement dominator = make_monoid(Val::of(0), std::move(cover));
        for (long long p : window) {
            Prime pp(p);
            if (truth_at(pp) && !m_le(monoid_atom(pp), dominator))
                throw std::logic_error("direct-sum check: dominator missed an atom");
        }
    } else {
        // No finite-support element can dominate: past any candidate's support
        // the formula still holds, so some atom escapes.
        long long beyond = std::max(window.empty() ? 2 : *std::max_element(window.begin(),
                                                                           window.end()),
                                    2LL) +
                           1;
        while (!Prime::is_prime(beyond)) ++beyond;
        if (!truth_at(Prime(beyond)))
            throw std::logic_error("direct-sum check: generic truth failed past the supports");
    }
    return finite;
}

MonoidElement prod_val(const FiniteAdele& f) {
    std::set<long long> keys;
    if (f.def != 0) {
        for (long long p : prime_factors(numerator(f.def))) keys.insert(p);
        for (long long p : prime_factors(denominator(f.def))) keys.insert(p);
    }
    for (const auto& [p, v] : f.exceptions) keys.insert(p);
    std::map<long long, Val> exc;
    for (long long p : keys) {
        Prime pp(p);
        exc.emplace(p, vp(stalk_project(f, pp), pp));
    }
    return make_monoid(f.def == 0 ? Val::inf() : Val::of(0), std::move(exc));
}

MonoidElement monoid_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("value literal: ") + e.what());
    }
    if (!j.is_object() || !j.contains("default"))
        throw std::invalid_argument("value literal: need an object with a \"default\" entry");
    auto read_val = [](const nlohmann::json& v) {
        if (v.is_string()) {
            if (v.get<std::string>() == "inf") return Val::inf();
            return Val::of(std::stoll(v.get<std::string>()));
        }
        if (v.is_number_integer()) return Val::of(v.get<long long>());
        throw std::invalid_argument("value literal: coordinates are integers or \"inf\"");
    };
    Val def = read_val(j.at("default"));
    std::map<long long, Val> exc;
    if (j.contains("exceptions")) {
        for (const auto& [key, val] : j.at("exceptions").items())
            exc.emplace(std::stoll(key), read_val(val));
    }
    return make_monoid(def, std::move(exc));
}

std::string monoid_to_json(const MonoidElement& a) {
    nlohmann::json j;
    auto write_val = [](const Val& v) {
        nlohmann::json out;
        if (v.is_inf())
            out = "inf";
        else
            out = v.finite();
        return out;
    };
    j["default"] = write_val(a.def);
    if (!a.exceptions.empty()) {
        nlohmann::json exc = nlohmann::json::object();
        for (const auto& [p, v] : a.exceptions) exc[std::to_string(p)] = write_val(v);
        j["exceptions"] = std::move(exc);
    }
    return j.dump();
}

}  // namespace afv
