#include "afv/ba_engine.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>
#include <stdexcept>

namespace afv {

// ---------------------------------------------------------------------------
// CardConstraint / MintermTable
// ---------------------------------------------------------------------------

CardConstraint CardConstraint::exactly(long long n) {
    if (n < 0) throw std::invalid_argument("cardinality cannot be negative");
    return CardConstraint{Kind::Exactly, n};
}
CardConstraint CardConstraint::at_least(long long n) {
    if (n < 0) throw std::invalid_argument("cardinality cannot be negative");
    return CardConstraint{Kind::AtLeast, n};
}
CardConstraint CardConstraint::finite_unbounded() {
    return CardConstraint{Kind::FiniteUnbounded, 0};
}
CardConstraint CardConstraint::infinite() { return CardConstraint{Kind::Infinite, 0}; }

std::string CardConstraint::to_string() const {
    switch (kind) {
        case Kind::Exactly: return "=" + std::to_string(n);
        case Kind::AtLeast: return ">=" + std::to_string(n);
        case Kind::FiniteUnbounded: return "fin";
        case Kind::Infinite: return "inf";
    }
    return "?";
}

void MintermTable::validate() const {
    if (vars.size() > 20) throw std::invalid_argument("too many variables for a minterm table");
    std::size_t want = static_cast<std::size_t>(1) << vars.size();
    if (entries.size() != want) {
        throw std::invalid_argument("minterm table must have exactly 2^k entries");
    }
    for (const auto& c : entries) {
        if ((c.kind == CardConstraint::Kind::Exactly || c.kind == CardConstraint::Kind::AtLeast) &&
            c.n < 0) {
            throw std::invalid_argument("minterm cardinality cannot be negative");
        }
    }
    std::set<std::string> seen(vars.begin(), vars.end());
    if (seen.size() != vars.size()) {
        throw std::invalid_argument("minterm table variables must be distinct");
    }
}

std::string MintermTable::to_string() const {
    std::ostringstream os;
    for (std::size_t m = 0; m < entries.size(); ++m) {
        if (m) os << ' ';
        os << '[';
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i) os << ' ';
            if (!((m >> i) & 1)) os << '~';
            os << vars[i];
        }
        os << "]:" << entries[m].to_string();
    }
    return os.str();
}

CardConstraint cell_card(const PrimeSet& cell) {
    switch (cell.kind()) {
        case PrimeSet::Kind::Finite:
            return CardConstraint::exactly(static_cast<long long>(cell.base().size()));
        case PrimeSet::Kind::Cofinite:
            return CardConstraint::infinite();
        case PrimeSet::Kind::Frontier:
            throw std::invalid_argument(
                "frontier sets have no computable minterm cardinalities");
    }
    throw std::logic_error("unreachable");
}

MintermTable minterm_table(const std::vector<std::pair<std::string, PrimeSet>>& env) {
    MintermTable t;
    for (const auto& [name, set] : env) {
        t.vars.push_back(name);
        if (set.is_frontier()) {
            throw std::invalid_argument(
                "frontier sets have no computable minterm cardinalities");
        }
    }
    std::size_t cells = static_cast<std::size_t>(1) << env.size();
    for (std::size_t m = 0; m < cells; ++m) {
        PrimeSet cell = PrimeSet::cofinite({});
        for (std::size_t i = 0; i < env.size(); ++i) {
            cell = ps_meet(cell, ((m >> i) & 1) ? env[i].second : ps_compl(env[i].second));
        }
        t.entries.push_back(cell_card(cell));
    }
    t.validate();
    return t;
}

// ---------------------------------------------------------------------------
// Concrete evaluation
// ---------------------------------------------------------------------------

PrimeSet eval_bool_term(const TermPtr& t, const BaEnv& env) {
    switch (t->kind) {
        case Term::Kind::Var: {
            auto it = env.find(t->name);
            if (it == env.end()) {
                throw std::invalid_argument("unbound set variable: " + t->name);
            }
            return it->second;
        }
        case Term::Kind::Const: {
            if (t->name == "bzero") return PrimeSet::finite({});
            if (t->name == "bone") return PrimeSet::cofinite({});
            throw std::invalid_argument("constant has no set interpretation: " + t->name);
        }
        case Term::Kind::App: {
            if (t->name == "meet") return ps_meet(eval_bool_term(t->args[0], env),
                                                  eval_bool_term(t->args[1], env));
            if (t->name == "join") return ps_join(eval_bool_term(t->args[0], env),
                                                  eval_bool_term(t->args[1], env));
            if (t->name == "compl") return ps_compl(eval_bool_term(t->args[0], env));
            throw std::invalid_argument("function has no set interpretation: " + t->name);
        }
        case Term::Kind::BoolRef:
            throw std::invalid_argument(
                "(bv " + std::to_string(t->index) + ") slot is unresolved in this evaluation");
        case Term::Kind::BoolOf:
            throw std::invalid_argument("(bv-of ...) shell is unresolved in this evaluation");
    }
    throw std::logic_error("unreachable");
}

Tri ba_eval(const FormulaPtr& f, const BaEnv& env) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (is_true(f)) return Tri::True;
            if (is_false(f)) return Tri::False;
            if (f->rel == "fin") return eval_fin(eval_bool_term(f->terms[0], env));
            if (f->rel == "cj") return eval_cj(f->param, eval_bool_term(f->terms[0], env));
            if (f->rel == "le") {
                return ps_empty(
                    ps_diff(eval_bool_term(f->terms[0], env), eval_bool_term(f->terms[1], env)));
            }
            throw std::invalid_argument("relation has no set interpretation: " + f->rel);
        }
        case Formula::Kind::Eq: {
            PrimeSet a = eval_bool_term(f->terms[0], env);
            PrimeSet b = eval_bool_term(f->terms[1], env);
            return t_and(ps_empty(ps_diff(a, b)), ps_empty(ps_diff(b, a)));
        }
        case Formula::Kind::Not:
            return t_not(ba_eval(f->kids[0], env));
        case Formula::Kind::And:
            return t_and(ba_eval(f->kids[0], env), ba_eval(f->kids[1], env));
        case Formula::Kind::Or:
            return t_or(ba_eval(f->kids[0], env), ba_eval(f->kids[1], env));
        case Formula::Kind::Implies:
            return t_or(t_not(ba_eval(f->kids[0], env)), ba_eval(f->kids[1], env));
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            throw std::invalid_argument("ba_eval takes quantifier-free formulas only");
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Quantifier elimination
// ---------------------------------------------------------------------------

namespace {

// Simplifying connective builders: fold constants, collapse double negation.
FormulaPtr s_not(const FormulaPtr& f) {
    if (is_true(f)) return mk_false();
    if (is_false(f)) return mk_true();
    if (f->kind == Formula::Kind::Not) return f->kids[0];
    return mk_not(f);
}
FormulaPtr s_and(const FormulaPtr& a, const FormulaPtr& b) {
    if (is_false(a) || is_false(b)) return mk_false();
    if (is_true(a)) return b;
    if (is_true(b)) return a;
    return mk_and(a, b);
}
FormulaPtr s_or(const FormulaPtr& a, const FormulaPtr& b) {
    if (is_true(a) || is_true(b)) return mk_true();
    if (is_false(a)) return b;
    if (is_false(b)) return a;
    return mk_or(a, b);
}
FormulaPtr s_implies(const FormulaPtr& a, const FormulaPtr& b) {
    if (is_false(a) || is_true(b)) return mk_true();
    if (is_true(a)) return b;
    if (is_false(b)) return s_not(a);
    return mk_implies(a, b);
}

// Pseudo-name carrying a slot reference through elimination as a variable.
// Parser tokens can never contain spaces or parens, so no user variable
// collides with it.
std::string slot_name(long long index) { return "(bv " + std::to_string(index) + ")"; }

bool is_slot_name(const std::string& name) { return name.rfind("(bv ", 0) == 0; }

TermPtr var_like_term(const std::string& name) {
    if (is_slot_name(name)) {
        long long idx = std::stoll(name.substr(4));
        return mk_bool_ref(idx);
    }
    return mk_var(name);
}

// Free set variables (including slot pseudo-variables), first-occurrence order.
void collect_term_vars(const TermPtr& t, const std::set<std::string>& bound,
                       std::vector<std::string>& out, std::set<std::string>& seen) {
    switch (t->kind) {
        case Term::Kind::Var:
            if (!bound.count(t->name) && seen.insert(t->name).second) out.push_back(t->name);
            break;
        case Term::Kind::BoolRef: {
            std::string n = slot_name(t->index);
            if (seen.insert(n).second) out.push_back(n);
            break;
        }
        case Term::Kind::App:
            for (const auto& a : t->args) collect_term_vars(a, bound, out, seen);
            break;
        case Term::Kind::Const:
            break;
        case Term::Kind::BoolOf:
            throw std::invalid_argument(
                "(bv-of ...) shells have no set semantics here; resolve them first");
    }
}

void collect_formula_vars(const FormulaPtr& f, std::set<std::string>& bound,
                          std::vector<std::string>& out, std::set<std::string>& seen) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            for (const auto& t : f->terms) collect_term_vars(t, bound, out, seen);
            break;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            bool added = bound.insert(f->var).second;
            collect_formula_vars(f->kids[0], bound, out, seen);
            if (added) bound.erase(f->var);
            break;
        }
        default:
            for (const auto& k : f->kids) collect_formula_vars(k, bound, out, seen);
            break;
    }
}

std::vector<std::string> set_vars(const FormulaPtr& f) {
    std::set<std::string> bound, seen;
    std::vector<std::string> out;
    collect_formula_vars(f, bound, out, seen);
    return out;
}

using Region = unsigned;  // bitmask over cells; at most 8 cells

// Abstract value codes: 0..max_exact are exact cardinalities, max_exact+1 is
// "some finite value > max_exact", max_exact+2 is "infinite".
struct Alphabet {
    long long max_exact = 0;
    int large() const { return static_cast<int>(max_exact) + 1; }
    int inf() const { return static_cast<int>(max_exact) + 2; }
    int size() const { return static_cast<int>(max_exact) + 3; }
};

struct AtomInfo {
    enum class Kind { True, False, Cj, Fin, Empty, EmptyPair };
    Kind kind = Kind::True;
    long long j = 0;     // Cj threshold
    Region r1 = 0;       // Cj/Fin/Empty region; EmptyPair first difference
    Region r2 = 0;       // EmptyPair second difference
};

struct ElimContext {
    int cells = 0;
    Alphabet child;
    std::map<std::string, int> var_bit;
    std::map<const Formula*, AtomInfo> atoms;
};

Region term_region(const TermPtr& t, const ElimContext& cx) {
    Region full = (cx.cells >= 32) ? ~0u : ((1u << cx.cells) - 1);
    switch (t->kind) {
        case Term::Kind::Var:
        case Term::Kind::BoolRef: {
            std::string name =
                t->kind == Term::Kind::Var ? t->name : slot_name(t->index);
            auto it = cx.var_bit.find(name);
            if (it == cx.var_bit.end()) {
                throw std::logic_error("variable escaped scope analysis: " + name);
            }
            Region r = 0;
            for (int c = 0; c < cx.cells; ++c) {
                if ((c >> it->second) & 1) r |= (1u << c);
            }
            return r;
        }
        case Term::Kind::Const:
            if (t->name == "bzero") return 0;
            if (t->name == "bone") return full;
            throw std::invalid_argument("constant has no set interpretation: " + t->name);
        case Term::Kind::App:
            if (t->name == "meet") return term_region(t->args[0], cx) & term_region(t->args[1], cx);
            if (t->name == "join") return term_region(t->args[0], cx) | term_region(t->args[1], cx);
            if (t->name == "compl") return full & ~term_region(t->args[0], cx);
            throw std::invalid_argument("function has no set interpretation: " + t->name);
        case Term::Kind::BoolOf:
            throw std::invalid_argument(
                "(bv-of ...) shells have no set semantics here; resolve them first");
    }
    throw std::logic_error("unreachable");
}

// Weight of a quantifier-free body: the sum of all cj thresholds plus the
// number of emptiness-style atoms (le and =).  Cardinalities above this
// weight are indistinguishable by the body's atoms.
long long formula_weight(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom:
            if (f->rel == "cj") return f->param;
            if (f->rel == "le") return 1;
            return 0;
        case Formula::Kind::Eq:
            return 1;
        default: {
            long long s = 0;
            for (const auto& k : f->kids) s += formula_weight(k);
            return s;
        }
    }
}

void annotate_atoms(const FormulaPtr& f, ElimContext& cx) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            AtomInfo info;
            if (is_true(f)) {
                info.kind = AtomInfo::Kind::True;
            } else if (is_false(f)) {
                info.kind = AtomInfo::Kind::False;
            } else if (f->rel == "cj") {
                info.kind = AtomInfo::Kind::Cj;
                info.j = f->param;
                info.r1 = term_region(f->terms[0], cx);
            } else if (f->rel == "fin") {
                info.kind = AtomInfo::Kind::Fin;
                info.r1 = term_region(f->terms[0], cx);
            } else if (f->rel == "le") {
                info.kind = AtomInfo::Kind::Empty;
                info.r1 = term_region(f->terms[0], cx) & ~term_region(f->terms[1], cx);
            } else {
                throw std::invalid_argument("relation has no set interpretation: " + f->rel);
            }
            cx.atoms[f.get()] = info;
            break;
        }
        case Formula::Kind::Eq: {
            AtomInfo info;
            info.kind = AtomInfo::Kind::EmptyPair;
            Region a = term_region(f->terms[0], cx);
            Region b = term_region(f->terms[1], cx);
            info.r1 = a & ~b;
            info.r2 = b & ~a;
            cx.atoms[f.get()] = info;
            break;
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            throw std::logic_error("elimination body must be quantifier-free");
        default:
            for (const auto& k : f->kids) annotate_atoms(k, cx);
            break;
    }
}

// Truth of "every cell of r is empty" under a partial assignment.
Tri region_empty(Region r, const std::vector<int>& vals, int assigned, const ElimContext& cx) {
    bool open = false;
    for (int c = 0; c < cx.cells; ++c) {
        if (!((r >> c) & 1)) continue;
        if (c < assigned) {
            if (vals[c] != 0) return Tri::False;
        } else {
            open = true;
        }
    }
    return open ? Tri::Indet : Tri::True;
}

Tri atom_truth(const AtomInfo& a, const std::vector<int>& vals, int assigned,
               const ElimContext& cx) {
    switch (a.kind) {
        case AtomInfo::Kind::True:
            return Tri::True;
        case AtomInfo::Kind::False:
            return Tri::False;
        case AtomInfo::Kind::Cj: {
            long long sum = 0;
            bool open = false;
            for (int c = 0; c < cx.cells; ++c) {
                if (!((a.r1 >> c) & 1)) continue;
                if (c >= assigned) {
                    open = true;
                    continue;
                }
                int v = vals[c];
                if (v >= cx.child.large()) {
                    sum += cx.child.max_exact + 1;  // large and infinite both exceed any j
                } else {
                    sum += v;
                }
                if (sum >= a.j) return Tri::True;
            }
            if (open) return Tri::Indet;
            return tri_of(sum >= a.j);
        }
        case AtomInfo::Kind::Fin: {
            bool open = false;
            for (int c = 0; c < cx.cells; ++c) {
                if (!((a.r1 >> c) & 1)) continue;
                if (c >= assigned) {
                    open = true;
                    continue;
                }
                if (vals[c] == cx.child.inf()) return Tri::False;
            }
            return open ? Tri::Indet : Tri::True;
        }
        case AtomInfo::Kind::Empty:
            return region_empty(a.r1, vals, assigned, cx);
        case AtomInfo::Kind::EmptyPair:
            return t_and(region_empty(a.r1, vals, assigned, cx),
                         region_empty(a.r2, vals, assigned, cx));
    }
    throw std::logic_error("unreachable");
}

Tri eval_partial(const FormulaPtr& f, const std::vector<int>& vals, int assigned,
                 const ElimContext& cx) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            return atom_truth(cx.atoms.at(f.get()), vals, assigned, cx);
        case Formula::Kind::Not:
            return t_not(eval_partial(f->kids[0], vals, assigned, cx));
        case Formula::Kind::And:
            return t_and(eval_partial(f->kids[0], vals, assigned, cx),
                         eval_partial(f->kids[1], vals, assigned, cx));
        case Formula::Kind::Or:
            return t_or(eval_partial(f->kids[0], vals, assigned, cx),
                        eval_partial(f->kids[1], vals, assigned, cx));
        case Formula::Kind::Implies:
            return t_or(t_not(eval_partial(f->kids[0], vals, assigned, cx)),
                        eval_partial(f->kids[1], vals, assigned, cx));
        default:
            throw std::logic_error("elimination body must be quantifier-free");
    }
}

// The sum of two child abstract values as a set of parent abstract values.
std::vector<int> combine_values(int v0, int v1, const Alphabet& child, const Alphabet& parent) {
    auto is_inf = [&](int v) { return v == child.inf(); };
    auto is_large = [&](int v) { return v == child.large(); };
    if (is_inf(v0) || is_inf(v1)) return {parent.inf()};
    if (is_large(v0) && is_large(v1)) return {parent.large()};
    if (is_large(v0) || is_large(v1)) {
        long long a = is_large(v0) ? v1 : v0;  // the exact one
        std::vector<int> out;
        for (long long x = child.max_exact + 1 + a; x <= parent.max_exact; ++x) {
            out.push_back(static_cast<int>(x));
        }
        out.push_back(parent.large());
        return out;
    }
    long long sum = v0 + v1;
    assert(sum <= parent.max_exact);
    return {static_cast<int>(sum)};
}

using ValueSet = std::vector<int>;  // sorted distinct codes
using Cube = std::vector<ValueSet>;

ValueSet vs_union(const ValueSet& a, const ValueSet& b) {
    ValueSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool vs_subset(const ValueSet& a, const ValueSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Merge cubes that differ in at most one cell; absorb pointwise-dominated
// cubes.  Standard multiple-valued two-level minimization, kept greedy.
void merge_cubes(std::vector<Cube>& cubes) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < cubes.size() && !changed; ++i) {
            for (std::size_t j = 0; j < cubes.size() && !changed; ++j) {
                if (i == j) continue;
                bool subset = true;
                int diff_at = -1;
                int diffs = 0;
                for (std::size_t c = 0; c < cubes[i].size(); ++c) {
                    if (cubes[i][c] != cubes[j][c]) {
                        ++diffs;
                        diff_at = static_cast<int>(c);
                    }
                    if (!vs_subset(cubes[i][c], cubes[j][c])) subset = false;
                }
                if (subset) {
                    cubes.erase(cubes.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                } else if (diffs == 1) {
                    cubes[j][static_cast<std::size_t>(diff_at)] =
                        vs_union(cubes[i][static_cast<std::size_t>(diff_at)],
                                 cubes[j][static_cast<std::size_t>(diff_at)]);
                    cubes.erase(cubes.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                }
            }
        }
    }
}

FormulaPtr cj_atom(long long j, const TermPtr& r) {
    if (j <= 0) return mk_true();
    return mk_atom("cj", {r}, j);
}

// Render "cardinality of r lies in this value set" as fin/cj literals.
FormulaPtr card_predicate(const ValueSet& codes, const TermPtr& r, const Alphabet& ab) {
    bool has_large = std::binary_search(codes.begin(), codes.end(), ab.large());
    bool has_inf = std::binary_search(codes.begin(), codes.end(), ab.inf());
    std::vector<long long> ex;
    for (int v : codes) {
        if (v <= ab.max_exact) ex.push_back(v);
    }
    bool exacts_suffix = true;  // ex is exactly {lo..max_exact} for some lo
    for (std::size_t i = 0; i < ex.size(); ++i) {
        if (ex[i] != ex[0] + static_cast<long long>(i)) exacts_suffix = false;
    }
    if (!ex.empty() && ex.back() != ab.max_exact) exacts_suffix = false;

    // Upper set {lo..} u {large, inf}: a single threshold atom.
    if (has_large && has_inf && (ex.empty() || exacts_suffix)) {
        long long lo = ex.empty() ? ab.max_exact + 1 : ex[0];
        return cj_atom(lo, r);
    }

    std::vector<FormulaPtr> parts;
    if (has_inf) parts.push_back(mk_not(mk_atom("fin", {r})));

    // Finite portion: maximal runs of exact values, with the large block
    // attached to a run ending at max_exact (or standing alone).
    std::size_t i = 0;
    while (i < ex.size()) {
        std::size_t k = i;
        while (k + 1 < ex.size() && ex[k + 1] == ex[k] + 1) ++k;
        long long lo = ex[i], hi = ex[k];
        if (has_large && hi == ab.max_exact) {
            // [lo, unbounded finite)
            FormulaPtr fin_r = mk_atom("fin", {r});
            parts.push_back(lo == 0 ? fin_r : s_and(cj_atom(lo, r), fin_r));
            has_large = false;
        } else {
            // [lo, hi]; boundedness makes finiteness automatic
            parts.push_back(s_and(cj_atom(lo, r), mk_not(cj_atom(hi + 1, r))));
        }
        i = k + 1;
    }
    if (has_large) {
        parts.push_back(s_and(cj_atom(ab.max_exact + 1, r), mk_atom("fin", {r})));
    }
    FormulaPtr out = mk_false();
    for (const auto& p : parts) out = s_or(out, p);
    return out;
}

TermPtr region_term(unsigned parent_mask, const std::vector<std::string>& yvars) {
    TermPtr t;
    for (std::size_t i = 0; i < yvars.size(); ++i) {
        TermPtr v = var_like_term(yvars[i]);
        if (!((parent_mask >> i) & 1)) v = mk_app("compl", {v});
        t = t ? mk_app("meet", {t, v}) : v;
    }
    if (!t) t = mk_const("bone");
    return t;
}

FormulaPtr eliminate_exists(const std::string& var, const FormulaPtr& body) {
    std::vector<std::string> scope = set_vars(body);
    if (std::find(scope.begin(), scope.end(), var) == scope.end()) {
        return body;  // vacuous quantifier
    }
    if (scope.size() > 3) {
        std::ostringstream os;
        os << "quantifier elimination supports at most 3 set variables in scope; got "
           << scope.size() << " at variable '" << var << "'";
        throw std::invalid_argument(os.str());
    }

    std::vector<std::string> yvars;
    for (const auto& v : scope) {
        if (v != var) yvars.push_back(v);
    }

    ElimContext cx;
    for (std::size_t i = 0; i < yvars.size(); ++i) {
        cx.var_bit[yvars[i]] = static_cast<int>(i);
    }
    int xbit = static_cast<int>(yvars.size());
    cx.var_bit[var] = xbit;
    cx.cells = 1 << (xbit + 1);
    long long weight = formula_weight(body);
    cx.child.max_exact = weight;
    Alphabet parent;
    parent.max_exact = 2 * weight + 1;
    annotate_atoms(body, cx);

    int parent_cells = 1 << yvars.size();
    unsigned xmask = 1u << xbit;

    std::set<Cube> cube_set;
    std::vector<int> vals(static_cast<std::size_t>(cx.cells), 0);

    // Once the partial evaluation is definitely true, every completion of the
    // open cells satisfies the body, and because distinct parent cells draw on
    // disjoint child-cell pairs, the projected parent vectors form an exact
    // product: one cube covers them all.
    auto emit_cube = [&](int assigned) {
        auto cell_values = [&](int c) -> std::vector<int> {
            if (c < assigned) return {vals[static_cast<std::size_t>(c)]};
            std::vector<int> all;
            for (int code = 0; code < cx.child.size(); ++code) all.push_back(code);
            return all;
        };
        Cube cube;
        for (int pc = 0; pc < parent_cells; ++pc) {
            std::set<int> acc;
            for (int v0 : cell_values(pc)) {
                for (int v1 : cell_values(static_cast<int>(static_cast<unsigned>(pc) | xmask))) {
                    for (int u : combine_values(v0, v1, cx.child, parent)) acc.insert(u);
                }
            }
            cube.emplace_back(acc.begin(), acc.end());
        }
        cube_set.insert(std::move(cube));
    };

    // Depth-first enumeration of satisfying child vectors, pruned by partial
    // evaluation in both directions.
    std::function<void(int)> dfs = [&](int idx) {
        Tri t = eval_partial(body, vals, idx, cx);
        if (t == Tri::False) return;
        if (t == Tri::True) {
            emit_cube(idx);
            return;
        }
        assert(idx < cx.cells);  // a full assignment always evaluates definitely
        for (int code = 0; code < cx.child.size(); ++code) {
            vals[static_cast<std::size_t>(idx)] = code;
            dfs(idx + 1);
        }
        vals[static_cast<std::size_t>(idx)] = 0;
    };
    dfs(0);

    if (cube_set.empty()) return mk_false();

    // A sentence-level elimination: the single parent cell is the unit, whose
    // cardinality is infinite in every model we care about.
    if (yvars.empty()) {
        for (const auto& cube : cube_set) {
            if (std::binary_search(cube[0].begin(), cube[0].end(), parent.inf())) {
                return mk_true();
            }
        }
        return mk_false();
    }

    std::vector<Cube> cubes(cube_set.begin(), cube_set.end());
    merge_cubes(cubes);

    int full_size = parent.size();
    std::vector<FormulaPtr> disjuncts;
    for (const auto& cube : cubes) {
        FormulaPtr conj = mk_true();
        for (int pc = 0; pc < parent_cells; ++pc) {
            const ValueSet& vs = cube[static_cast<std::size_t>(pc)];
            if (static_cast<int>(vs.size()) == full_size) continue;  // unconstrained
            TermPtr r = region_term(static_cast<unsigned>(pc), yvars);
            conj = s_and(conj, card_predicate(vs, r, parent));
        }
        if (is_true(conj)) return mk_true();
        disjuncts.push_back(conj);
    }
    FormulaPtr out = mk_false();
    for (const auto& d : disjuncts) out = s_or(out, d);
    return out;
}

FormulaPtr reject_shells(const FormulaPtr& f) {
    // set_vars throws on BoolOf shells; run it for the side effect.
    set_vars(f);
    return f;
}

FormulaPtr qe_rec(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
            return f;
        case Formula::Kind::Not:
            return s_not(qe_rec(f->kids[0]));
        case Formula::Kind::And:
            return s_and(qe_rec(f->kids[0]), qe_rec(f->kids[1]));
        case Formula::Kind::Or:
            return s_or(qe_rec(f->kids[0]), qe_rec(f->kids[1]));
        case Formula::Kind::Implies:
            return s_implies(qe_rec(f->kids[0]), qe_rec(f->kids[1]));
        case Formula::Kind::Exists:
            return eliminate_exists(f->var, qe_rec(f->kids[0]));
        case Formula::Kind::Forall:
            return s_not(eliminate_exists(f->var, s_not(qe_rec(f->kids[0]))));
    }
    throw std::logic_error("unreachable");
}

// Ground truth with an infinite unit: terms evaluate to 0 (zero) or 1 (unit).
int ground_term(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Const:
            if (t->name == "bzero") return 0;
            if (t->name == "bone") return 1;
            throw std::invalid_argument("constant has no set interpretation: " + t->name);
        case Term::Kind::App:
            if (t->name == "meet") return std::min(ground_term(t->args[0]), ground_term(t->args[1]));
            if (t->name == "join") return std::max(ground_term(t->args[0]), ground_term(t->args[1]));
            if (t->name == "compl") return 1 - ground_term(t->args[0]);
            throw std::invalid_argument("function has no set interpretation: " + t->name);
        default:
            throw std::invalid_argument("ba_decide requires a sentence without free variables");
    }
}

bool ground_eval(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (is_true(f)) return true;
            if (is_false(f)) return false;
            if (f->rel == "fin") return ground_term(f->terms[0]) == 0;
            if (f->rel == "cj") return ground_term(f->terms[0]) == 1;  // unit is infinite
            if (f->rel == "le") return ground_term(f->terms[0]) <= ground_term(f->terms[1]);
            throw std::invalid_argument("relation has no set interpretation: " + f->rel);
        }
        case Formula::Kind::Eq:
            return ground_term(f->terms[0]) == ground_term(f->terms[1]);
        case Formula::Kind::Not:
            return !ground_eval(f->kids[0]);
        case Formula::Kind::And:
            return ground_eval(f->kids[0]) && ground_eval(f->kids[1]);
        case Formula::Kind::Or:
            return ground_eval(f->kids[0]) || ground_eval(f->kids[1]);
        case Formula::Kind::Implies:
            return !ground_eval(f->kids[0]) || ground_eval(f->kids[1]);
        default:
            throw std::logic_error("ba_decide remainder must be quantifier-free");
    }
}

}  // namespace

FormulaPtr ba_qe(const FormulaPtr& f) { return qe_rec(reject_shells(f)); }

bool ba_decide(const FormulaPtr& f) {
    FormulaPtr qf = ba_qe(f);
    if (!set_vars(qf).empty()) {
        throw std::invalid_argument("ba_decide requires a sentence without free variables");
    }
    return ground_eval(qf);
}

}  // namespace afv
