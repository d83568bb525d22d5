#include "afv/adele.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "afv/local.hpp"
#include "json.hpp"

namespace afv {

namespace {

void require_quantifier_free(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            throw std::invalid_argument("boolean value: formula must be quantifier-free");
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            return;
        default:
            for (const FormulaPtr& k : f->kids) require_quantifier_free(k);
    }
}

const PrimeSet& ps_all() {
    static const PrimeSet s = PrimeSet::cofinite({});
    return s;
}

const PrimeSet& ps_none() {
    static const PrimeSet s = PrimeSet::finite({});
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Finite adeles
// ---------------------------------------------------------------------------

FiniteAdele make_adele(Rat def, std::map<long long, Rat> exceptions) {
    FiniteAdele a;
    a.def = std::move(def);
    for (auto& [p, v] : exceptions) {
        Prime check(p);  // validates
        if (v != a.def) a.exceptions.emplace(p, std::move(v));
    }
    return a;
}

FiniteAdele diagonal_adele(Rat q) { return make_adele(std::move(q)); }

FiniteAdele idempotent_adele(const PrimeSet& s) {
    std::map<long long, Rat> exc;
    switch (s.kind()) {
        case PrimeSet::Kind::Finite:
            for (long long p : s.base()) exc.emplace(p, Rat(1));
            return make_adele(Rat(0), std::move(exc));
        case PrimeSet::Kind::Cofinite:
            for (long long p : s.base()) exc.emplace(p, Rat(0));
            return make_adele(Rat(1), std::move(exc));
        default:
            throw std::invalid_argument("idempotent_adele: set must be Finite or Cofinite");
    }
}

Rat stalk_project(const FiniteAdele& a, const Prime& p) {
    auto it = a.exceptions.find(p.value());
    return it == a.exceptions.end() ? a.def : it->second;
}

namespace {

template <typename F>
FiniteAdele pointwise(const FiniteAdele& a, const FiniteAdele& b, F op) {
    std::map<long long, Rat> exc;
    std::set<long long> touched;
    for (const auto& [p, v] : a.exceptions) touched.insert(p);
    for (const auto& [p, v] : b.exceptions) touched.insert(p);
    for (long long p : touched) {
        Prime pp(p);
        exc.emplace(p, op(stalk_project(a, pp), stalk_project(b, pp)));
    }
    return make_adele(op(a.def, b.def), std::move(exc));
}

}  // namespace

FiniteAdele adele_add(const FiniteAdele& a, const FiniteAdele& b) {
    return pointwise(a, b, [](const Rat& x, const Rat& y) { return x + y; });
}
FiniteAdele adele_sub(const FiniteAdele& a, const FiniteAdele& b) {
    return pointwise(a, b, [](const Rat& x, const Rat& y) { return x - y; });
}
FiniteAdele adele_mul(const FiniteAdele& a, const FiniteAdele& b) {
    return pointwise(a, b, [](const Rat& x, const Rat& y) { return x * y; });
}
FiniteAdele adele_neg(const FiniteAdele& a) {
    return adele_sub(diagonal_adele(Rat(0)), a);
}

PrimeSet supp(const FiniteAdele& a) {
    std::vector<long long> base;
    if (a.def == 0) {
        for (const auto& [p, v] : a.exceptions)
            if (v != 0) base.push_back(p);
        return PrimeSet::finite(std::move(base));
    }
    for (const auto& [p, v] : a.exceptions)
        if (v == 0) base.push_back(p);
    return PrimeSet::cofinite(std::move(base));
}

std::optional<Prime> is_min_idempotent(const FiniteAdele& a) {
    if (a.def != 0 || a.exceptions.size() != 1) return std::nullopt;
    const auto& [p, v] = *a.exceptions.begin();
    if (v != 1) return std::nullopt;
    return Prime(p);
}

FiniteAdele adele_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("adele literal: ") + e.what());
    }
    if (!j.is_object() || !j.contains("default"))
        throw std::invalid_argument("adele literal: need an object with a \"default\" entry");
    auto read_rat = [](const nlohmann::json& v) {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<long long>());
        throw std::invalid_argument("adele literal: coordinates are strings or integers");
    };
    Rat def = read_rat(j.at("default"));
    std::map<long long, Rat> exc;
    if (j.contains("exceptions")) {
        for (const auto& [key, val] : j.at("exceptions").items()) {
            exc.emplace(std::stoll(key), read_rat(val));
        }
    }
    return make_adele(std::move(def), std::move(exc));
}

std::string adele_to_json(const FiniteAdele& a) {
    nlohmann::json j;
    j["default"] = rat_to_string(a.def);
    if (!a.exceptions.empty()) {
        nlohmann::json exc = nlohmann::json::object();
        for (const auto& [p, v] : a.exceptions) exc[std::to_string(p)] = rat_to_string(v);
        j["exceptions"] = std::move(exc);
    }
    return j.dump();
}

// ---------------------------------------------------------------------------
// Ring-formula evaluation
// ---------------------------------------------------------------------------

Rat ring_term_eval(const TermPtr& t, const std::map<std::string, Rat>& env) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = env.find(t->name);
            if (it == env.end())
                throw std::invalid_argument("ring term: unbound variable '" + t->name + "'");
            return it->second;
        }
        case Term::Kind::Const:
            return parse_rational(t->name);
        case Term::Kind::App: {
            if (t->name == "+") return ring_term_eval(t->args[0], env) + ring_term_eval(t->args[1], env);
            if (t->name == "*") return ring_term_eval(t->args[0], env) * ring_term_eval(t->args[1], env);
            if (t->name == "-") {
                if (t->args.size() == 1) return -ring_term_eval(t->args[0], env);
                return ring_term_eval(t->args[0], env) - ring_term_eval(t->args[1], env);
            }
            throw std::invalid_argument("ring term: unknown function '" + t->name + "'");
        }
        default:
            throw std::invalid_argument("ring term: Boolean-sort term in a field position");
    }
}

bool eval_ring_formula_at(const FormulaPtr& f, const std::map<std::string, Rat>& env,
                          const Prime& p) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (f->rel == "true") return true;
            if (f->rel == "false") return false;
            if (f->rel == "V") return vp(ring_term_eval(f->terms[0], env), p) >= Val::of(0);
            if (f->rel == "pk") {
                Rat q = ring_term_eval(f->terms[0], env);
                return q == 0 || is_kth_power(q, p, f->param);
            }
            throw std::invalid_argument("ring formula: unknown relation '" + f->rel + "'");
        }
        case Formula::Kind::Eq:
            return ring_term_eval(f->terms[0], env) == ring_term_eval(f->terms[1], env);
        case Formula::Kind::Not:
            return !eval_ring_formula_at(f->kids[0], env, p);
        case Formula::Kind::And:
            return eval_ring_formula_at(f->kids[0], env, p) &&
                   eval_ring_formula_at(f->kids[1], env, p);
        case Formula::Kind::Or:
            return eval_ring_formula_at(f->kids[0], env, p) ||
                   eval_ring_formula_at(f->kids[1], env, p);
        case Formula::Kind::Implies:
            return !eval_ring_formula_at(f->kids[0], env, p) ||
                   eval_ring_formula_at(f->kids[1], env, p);
        default:
            throw std::invalid_argument("ring formula: quantifier in quantifier-free evaluation");
    }
}

namespace {

// Prime-set value of an atom on the default tuple (prime-independent term
// values; see header).
PrimeSet generic_ring_formula(const FormulaPtr& f, const std::map<std::string, Rat>& env) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (f->rel == "true") return ps_all();
            if (f->rel == "false") return ps_none();
            if (f->rel == "V") {
                Rat q = ring_term_eval(f->terms[0], env);
                return PrimeSet::cofinite(prime_factors(denominator(q)));
            }
            if (f->rel == "pk") {
                Rat q = ring_term_eval(f->terms[0], env);
                long long k = f->param;
                if (q == 0 || is_rational_kth_power(q, k)) return ps_all();
                return PrimeSet::frontier(
                    [q, k](long long p) { return is_kth_power(q, Prime(p), k); },
                    FrontierClass::Unknown, 10000,
                    "pk " + std::to_string(k) + " at " + rat_to_string(q));
            }
            throw std::invalid_argument("ring formula: unknown relation '" + f->rel + "'");
        }
        case Formula::Kind::Eq:
            return ring_term_eval(f->terms[0], env) == ring_term_eval(f->terms[1], env)
                       ? ps_all()
                       : ps_none();
        case Formula::Kind::Not:
            return ps_compl(generic_ring_formula(f->kids[0], env));
        case Formula::Kind::And:
            return ps_meet(generic_ring_formula(f->kids[0], env),
                           generic_ring_formula(f->kids[1], env));
        case Formula::Kind::Or:
            return ps_join(generic_ring_formula(f->kids[0], env),
                           generic_ring_formula(f->kids[1], env));
        case Formula::Kind::Implies:
            return ps_join(ps_compl(generic_ring_formula(f->kids[0], env)),
                           generic_ring_formula(f->kids[1], env));
        default:
            throw std::invalid_argument("ring formula: quantifier in quantifier-free evaluation");
    }
}

}  // namespace

PrimeSet boolean_value(const FormulaPtr& phi, const std::map<std::string, FiniteAdele>& args) {
    require_quantifier_free(phi);
    std::map<std::string, std::string> sorts;
    check_sorts(phi, Signature::ring(), sorts);
    for (const std::string& v : free_vars(phi)) {
        if (args.find(v) == args.end())
            throw std::invalid_argument("boolean value: no argument for variable '" + v + "'");
    }

    std::map<std::string, Rat> defaults;
    std::set<long long> special;
    for (const auto& [name, a] : args) {
        defaults.emplace(name, a.def);
        for (const auto& [p, v] : a.exceptions) special.insert(p);
    }

    PrimeSet r = generic_ring_formula(phi, defaults);
    if (special.empty()) return r;

    std::vector<long long> trues, all(special.begin(), special.end());
    for (long long p : special) {
        Prime pp(p);
        std::map<std::string, Rat> env;
        for (const auto& [name, a] : args) env.emplace(name, stalk_project(a, pp));
        if (eval_ring_formula_at(phi, env, pp)) trues.push_back(p);
    }
    return ps_join(ps_meet(r, PrimeSet::cofinite(std::move(all))),
                   PrimeSet::finite(std::move(trues)));
}

// ---------------------------------------------------------------------------
// Class families
// ---------------------------------------------------------------------------

AdeleHFamily make_hfamily(int level, bool def_zero, long long def_gamma, long long def_unit,
                          std::map<long long, HClass> exceptions) {
    if (level < 1) throw std::invalid_argument("class family: level must be >= 1");
    AdeleHFamily f;
    f.level = level;
    f.def_zero = def_zero;
    if (def_zero) {
        f.def_gamma = 0;
        f.def_unit = 1;
    } else {
        if (def_unit == 0) throw std::invalid_argument("class family: default unit must be nonzero");
        if (def_gamma < 0)
            throw std::invalid_argument(
                "class family: default must lie in the valuation part (gamma >= 0)");
        f.def_gamma = def_gamma;
        f.def_unit = def_unit;
    }
    for (auto& [p, c] : exceptions) {
        HyperCtx cx(Prime(p), level);
        HClass normalized = c.is_zero() ? HClass::zero_class() : make_cls(c.gamma, c.unit, cx);
        if (normalized != h_stalk_project(f, Prime(p))) f.exceptions.emplace(p, normalized);
    }
    return f;
}

HClass h_stalk_project(const AdeleHFamily& f, const Prime& p) {
    auto it = f.exceptions.find(p.value());
    if (it != f.exceptions.end()) return it->second;
    if (f.def_zero) return HClass::zero_class();
    HyperCtx cx(p, f.level);
    return project(Rat(f.def_unit) * Rat(pow_ll(p.value(), static_cast<int>(f.def_gamma))), cx);
}

namespace {

// Symbolic value of a class term on the default tuple: zero, or the class of
// p^G * U with U a fixed nonzero rational.
struct Mono {
    bool zero = false;
    long long G = 0;
    Rat U = 1;
};

Mono mono_term_eval(const TermPtr& t, const std::map<std::string, Mono>& env) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = env.find(t->name);
            if (it == env.end())
                throw std::invalid_argument("class term: unbound variable '" + t->name + "'");
            return it->second;
        }
        case Term::Kind::Const: {
            if (t->name == "0") return Mono{true, 0, Rat(1)};
            if (t->name == "1") return Mono{false, 0, Rat(1)};
            throw std::invalid_argument("class term: unknown constant '" + t->name + "'");
        }
        case Term::Kind::App: {
            if (t->name == "*") {
                Mono a = mono_term_eval(t->args[0], env);
                Mono b = mono_term_eval(t->args[1], env);
                if (a.zero || b.zero) return Mono{true, 0, Rat(1)};
                return Mono{false, a.G + b.G, a.U * b.U};
            }
            if (t->name == "inv") {
                Mono a = mono_term_eval(t->args[0], env);
                if (a.zero)
                    throw std::invalid_argument("class term: inverse of the zero coordinate");
                return Mono{false, -a.G, Rat(1) / a.U};
            }
            throw std::invalid_argument("class term: unknown function '" + t->name + "'");
        }
        default:
            throw std::invalid_argument("class term: Boolean-sort term in a class position");
    }
}

// Primes dividing num or den of any listed nonzero rational.
void collect_special(const std::vector<Rat>& vals, std::set<long long>& into) {
    for (const Rat& q : vals) {
        if (q == 0) continue;
        for (long long p : prime_factors(numerator(q))) into.insert(p);
        for (long long p : prime_factors(denominator(q))) into.insert(p);
    }
}

// Truth of an atom on the default tuple at every prime off the collected
// special set, per the case analysis in the header.
bool generic_class_formula(const FormulaPtr& f, const std::map<std::string, Mono>& env,
                           int level, std::set<long long>& special) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (f->rel == "true") return true;
            if (f->rel == "false") return false;
            if (f->rel == "Pdelta") {
                Mono a = mono_term_eval(f->terms[0], env);
                if (a.zero) return true;
                collect_special({a.U}, special);
                return a.G >= 0;
            }
            if (f->rel == "Sigma") {
                Mono a = mono_term_eval(f->terms[0], env);
                Mono b = mono_term_eval(f->terms[1], env);
                Mono c = mono_term_eval(f->terms[2], env);
                auto u = [](const Mono& m) { return m.zero ? Rat(0) : m.U; };
                collect_special({u(a), u(b), u(c), u(a) + u(b), u(c) - u(a), u(c) - u(b),
                                 u(c) - u(a) - u(b)},
                                special);
                if (a.zero && b.zero) return c.zero;
                if (a.zero) return !c.zero && c.G == b.G && c.U == b.U;
                if (b.zero) return !c.zero && c.G == a.G && c.U == a.U;
                const Mono& lo = a.G <= b.G ? a : b;
                const Mono& hi = a.G <= b.G ? b : a;
                long long d = hi.G - lo.G;
                if (d == 0) {
                    Rat w = lo.U + hi.U;
                    if (w == 0) return c.zero || c.G >= lo.G + level;
                    return !c.zero && c.G == lo.G && c.U == w;
                }
                if (d >= level) return !c.zero && c.G == lo.G && c.U == lo.U;
                return false;  // sub-level perturbation never matches a fixed monomial
            }
            throw std::invalid_argument("class formula: unknown relation '" + f->rel + "'");
        }
        case Formula::Kind::Eq: {
            Mono a = mono_term_eval(f->terms[0], env);
            Mono b = mono_term_eval(f->terms[1], env);
            if (a.zero || b.zero) return a.zero == b.zero;
            auto u = [](const Mono& m) { return m.U; };
            collect_special({u(a), u(b), u(a) - u(b)}, special);
            return a.G == b.G && a.U == b.U;
        }
        case Formula::Kind::Not:
            return !generic_class_formula(f->kids[0], env, level, special);
        case Formula::Kind::And: {
            bool l = generic_class_formula(f->kids[0], env, level, special);
            bool r = generic_class_formula(f->kids[1], env, level, special);
            return l && r;
        }
        case Formula::Kind::Or: {
            bool l = generic_class_formula(f->kids[0], env, level, special);
            bool r = generic_class_formula(f->kids[1], env, level, special);
            return l || r;
        }
        case Formula::Kind::Implies: {
            bool l = generic_class_formula(f->kids[0], env, level, special);
            bool r = generic_class_formula(f->kids[1], env, level, special);
            return !l || r;
        }
        default:
            throw std::invalid_argument("class formula: quantifier in quantifier-free evaluation");
    }
}

HClass class_term_eval(const TermPtr& t, const std::map<std::string, HClass>& env,
                       const HyperCtx& cx) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = env.find(t->name);
            if (it == env.end())
                throw std::invalid_argument("class term: unbound variable '" + t->name + "'");
            return it->second;
        }
        case Term::Kind::Const: {
            if (t->name == "0") return HClass::zero_class();
            if (t->name == "1") return make_cls(0, 1, cx);
            throw std::invalid_argument("class term: unknown constant '" + t->name + "'");
        }
        case Term::Kind::App: {
            if (t->name == "*")
                return h_mul(class_term_eval(t->args[0], env, cx),
                             class_term_eval(t->args[1], env, cx), cx);
            if (t->name == "inv") {
                HClass a = class_term_eval(t->args[0], env, cx);
                if (a.is_zero())
                    throw std::invalid_argument("class term: inverse of the zero coordinate");
                return h_inv(a, cx);
            }
            throw std::invalid_argument("class term: unknown function '" + t->name + "'");
        }
        default:
            throw std::invalid_argument("class term: Boolean-sort term in a class position");
    }
}

bool eval_class_formula_at(const FormulaPtr& f, const std::map<std::string, HClass>& env,
                           const HyperCtx& cx) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (f->rel == "true") return true;
            if (f->rel == "false") return false;
            if (f->rel == "Pdelta") return in_Pdelta(class_term_eval(f->terms[0], env, cx));
            if (f->rel == "Sigma")
                return sigma(class_term_eval(f->terms[0], env, cx),
                             class_term_eval(f->terms[1], env, cx),
                             class_term_eval(f->terms[2], env, cx), cx);
            throw std::invalid_argument("class formula: unknown relation '" + f->rel + "'");
        }
        case Formula::Kind::Eq:
            return class_term_eval(f->terms[0], env, cx) == class_term_eval(f->terms[1], env, cx);
        case Formula::Kind::Not:
            return !eval_class_formula_at(f->kids[0], env, cx);
        case Formula::Kind::And:
            return eval_class_formula_at(f->kids[0], env, cx) &&
                   eval_class_formula_at(f->kids[1], env, cx);
        case Formula::Kind::Or:
            return eval_class_formula_at(f->kids[0], env, cx) ||
                   eval_class_formula_at(f->kids[1], env, cx);
        case Formula::Kind::Implies:
            return !eval_class_formula_at(f->kids[0], env, cx) ||
                   eval_class_formula_at(f->kids[1], env, cx);
        default:
            throw std::invalid_argument("class formula: quantifier in quantifier-free evaluation");
    }
}

}  // namespace

PrimeSet h_boolean_value(const FormulaPtr& phi,
                         const std::map<std::string, AdeleHFamily>& args) {
    require_quantifier_free(phi);
    std::map<std::string, std::string> sorts;
    check_sorts(phi, Signature::hyper(), sorts);
    for (const std::string& v : free_vars(phi)) {
        if (args.find(v) == args.end())
            throw std::invalid_argument("boolean value: no argument for variable '" + v + "'");
    }
    int level = args.empty() ? 1 : args.begin()->second.level;
    std::map<std::string, Mono> defaults;
    std::set<long long> special;
    for (const auto& [name, fam] : args) {
        if (fam.level != level)
            throw std::invalid_argument("boolean value: families must share one level");
        Mono m;
        if (fam.def_zero) {
            m.zero = true;
        } else {
            m.G = fam.def_gamma;
            m.U = Rat(fam.def_unit);
        }
        defaults.emplace(name, m);
        for (const auto& [p, c] : fam.exceptions) special.insert(p);
    }

    bool generic = generic_class_formula(phi, defaults, level, special);

    std::vector<long long> trues, all(special.begin(), special.end());
    for (long long p : special) {
        Prime pp(p);
        HyperCtx cx(pp, level);
        std::map<std::string, HClass> env;
        for (const auto& [name, fam] : args) env.emplace(name, h_stalk_project(fam, pp));
        if (eval_class_formula_at(phi, env, cx)) trues.push_back(p);
    }
    PrimeSet r = generic ? ps_all() : ps_none();
    if (special.empty()) return r;
    return ps_join(ps_meet(r, PrimeSet::cofinite(std::move(all))),
                   PrimeSet::finite(std::move(trues)));
}

namespace {

// "(g; u)" with integer g, nonzero integer u, or "0".
void parse_symbolic_default(const std::string& text, AdeleHFamily& f) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s == "0") {
        f.def_zero = true;
        return;
    }
    if (s.size() < 5 || s.front() != '(' || s.back() != ')')
        throw std::invalid_argument("class family literal: default must be \"0\" or \"(g; u)\"");
    auto semi = s.find(';');
    if (semi == std::string::npos)
        throw std::invalid_argument("class family literal: default must be \"0\" or \"(g; u)\"");
    try {
        size_t used = 0;
        std::string gpart = s.substr(1, semi - 1);
        std::string upart = s.substr(semi + 1, s.size() - semi - 2);
        f.def_gamma = std::stoll(gpart, &used);
        if (used != gpart.size()) throw std::invalid_argument("trailing");
        f.def_unit = std::stoll(upart, &used);
        if (used != upart.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw std::invalid_argument("class family literal: malformed default '" + text + "'");
    }
    f.def_zero = false;
}

}  // namespace

AdeleHFamily hfamily_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("class family literal: ") + e.what());
    }
    if (!j.is_object() || !j.contains("level") || !j.contains("default"))
        throw std::invalid_argument(
            "class family literal: need an object with \"level\" and \"default\"");
    AdeleHFamily f;
    f.level = j.at("level").get<int>();
    if (f.level < 1) throw std::invalid_argument("class family literal: level must be >= 1");
    parse_symbolic_default(j.at("default").get<std::string>(), f);
    std::map<long long, HClass> exc;
    if (j.contains("exceptions")) {
        for (const auto& [key, val] : j.at("exceptions").items()) {
            long long p = std::stoll(key);
            HyperCtx cx(Prime(p), f.level);
            exc.emplace(p, parse_hclass(val.get<std::string>(), cx));
        }
    }
    return make_hfamily(f.level, f.def_zero, f.def_gamma, f.def_unit, std::move(exc));
}

std::string hfamily_to_json(const AdeleHFamily& f) {
    nlohmann::json j;
    j["level"] = f.level;
    j["default"] = f.def_zero
                       ? std::string("0")
                       : "(" + std::to_string(f.def_gamma) + "; " + std::to_string(f.def_unit) + ")";
    if (!f.exceptions.empty()) {
        nlohmann::json exc = nlohmann::json::object();
        for (const auto& [p, c] : f.exceptions) exc[std::to_string(p)] = hclass_to_string(c);
        j["exceptions"] = std::move(exc);
    }
    return j.dump();
}

}  // namespace afv
