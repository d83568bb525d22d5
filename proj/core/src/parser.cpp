#include <cctype>
#include <optional>
#include <sstream>

#include "afv/formula.hpp"

namespace afv {

namespace {

struct Token {
    std::string text;
    size_t pos;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(' || c == ')') {
            out.push_back({std::string(1, c), i});
            ++i;
            continue;
        }
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
               s[j] != ')') {
            ++j;
        }
        out.push_back({s.substr(i, j - i), i});
        i = j;
    }
    return out;
}

bool is_integer_token(const std::string& t) {
    size_t i = (!t.empty() && t[0] == '-') ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
}

bool is_numeral_token(const std::string& t) {
    auto slash = t.find('/');
    if (slash == std::string::npos) return is_integer_token(t);
    std::string num = t.substr(0, slash), den = t.substr(slash + 1);
    return is_integer_token(num) && !den.empty() && den[0] != '-' && is_integer_token(den);
}

bool is_symbol_token(const std::string& t) { return t != "(" && t != ")"; }

// ---------------------------------------------------------------------------
// Well-sortedness checking with lightweight inference: free variables adopt
// the sort demanded by their first constraining context; overloads resolve by
// expected sort, then by first-argument sort, then by the signature's default.

struct SortChecker {
    const Signature& sig;
    std::map<std::string, std::string>& var_sorts;

    bool sort_declared(const std::string& s) const { return s == "bool" || sig.sorts.count(s) > 0; }

    std::vector<Signature::Fn> overloads(const std::string& head) const {
        std::vector<Signature::Fn> out;
        auto it = sig.functions.find(head);
        if (it != sig.functions.end()) out = it->second;
        if (head == "meet" || head == "join") out.push_back({{"bool", "bool"}, "bool"});
        if (head == "compl") out.push_back({{"bool"}, "bool"});
        return out;
    }

    std::optional<std::string> const_sort(const std::string& name) const {
        if (name == "bzero" || name == "bone") return std::string("bool");
        auto it = sig.constants.find(name);
        if (it != sig.constants.end()) return it->second;
        if (is_numeral_token(name)) {
            if (sig.literal_sort.empty()) {
                throw SortError("sort error: numeric literal '" + name +
                                "' is not allowed in the " + sig.name + " signature");
            }
            return sig.literal_sort;
        }
        return std::nullopt;
    }

    std::string infer_term(const TermPtr& t, const std::string& expected) {
        switch (t->kind) {
            case Term::Kind::Var: {
                auto it = var_sorts.find(t->name);
                if (it != var_sorts.end()) {
                    if (!expected.empty() && expected != it->second) {
                        throw SortError("sort error: variable '" + t->name + "' has sort " +
                                        it->second + " but sort " + expected + " was expected");
                    }
                    return it->second;
                }
                if (!expected.empty()) {
                    var_sorts.emplace(t->name, expected);
                    return expected;
                }
                return "";
            }
            case Term::Kind::Const: {
                auto s = const_sort(t->name);
                if (!s) throw SortError("sort error: unknown constant '" + t->name + "'");
                if (!expected.empty() && expected != *s) {
                    throw SortError("sort error: constant '" + t->name + "' has sort " + *s +
                                    " but sort " + expected + " was expected");
                }
                return *s;
            }
            case Term::Kind::BoolRef:
            case Term::Kind::BoolOf: {
                if (t->kind == Term::Kind::BoolOf) check_formula(t->shell);
                if (!expected.empty() && expected != "bool") {
                    throw SortError("sort error: Boolean value where sort " + expected +
                                    " was expected");
                }
                return "bool";
            }
            case Term::Kind::App: {
                if (t->name == "pow") {
                    if (!sig.sorts.count("field")) {
                        throw SortError("sort error: pow is only available over the field sort");
                    }
                    if (t->args.size() != 2 || t->args[0]->kind != Term::Kind::Const ||
                        !is_integer_token(t->args[0]->name)) {
                        throw SortError("sort error: pow expects an integer exponent and a field term");
                    }
                    infer_term(t->args[1], "field");
                    if (!expected.empty() && expected != "field") {
                        throw SortError("sort error: pow term has sort field but sort " + expected +
                                        " was expected");
                    }
                    return "field";
                }
                auto ovs = overloads(t->name);
                if (ovs.empty()) {
                    throw SortError("sort error: unknown function symbol '" + t->name + "'");
                }
                std::vector<Signature::Fn> fit;
                for (const auto& ov : ovs) {
                    if (ov.args.size() == t->args.size()) fit.push_back(ov);
                }
                if (fit.empty()) {
                    throw SortError("sort error: function '" + t->name + "' applied to " +
                                    std::to_string(t->args.size()) + " arguments");
                }
                if (!expected.empty()) {
                    std::vector<Signature::Fn> narrowed;
                    for (const auto& ov : fit) {
                        if (ov.result == expected) narrowed.push_back(ov);
                    }
                    if (narrowed.empty()) {
                        throw SortError("sort error: no form of '" + t->name + "' yields sort " +
                                        expected);
                    }
                    fit = narrowed;
                }
                if (fit.size() > 1) {
                    std::string s0 = infer_term(t->args[0], "");
                    if (!s0.empty()) {
                        std::vector<Signature::Fn> narrowed;
                        for (const auto& ov : fit) {
                            if (ov.args[0] == s0) narrowed.push_back(ov);
                        }
                        if (!narrowed.empty()) fit = narrowed;
                    }
                }
                if (fit.size() > 1 && !sig.default_sort.empty()) {
                    std::vector<Signature::Fn> narrowed;
                    for (const auto& ov : fit) {
                        if (ov.result == sig.default_sort) narrowed.push_back(ov);
                    }
                    if (!narrowed.empty()) fit = narrowed;
                }
                if (fit.size() != 1) {
                    throw SortError("sort error: ambiguous use of function '" + t->name + "'");
                }
                for (size_t k = 0; k < t->args.size(); ++k) {
                    infer_term(t->args[k], fit[0].args[k]);
                }
                return fit[0].result;
            }
        }
        return "";
    }

    void check_formula(const FormulaPtr& f) {
        switch (f->kind) {
            case Formula::Kind::Atom: {
                if (f->rel == "true" || f->rel == "false") {
                    if (!f->terms.empty()) throw SortError("sort error: " + f->rel + " takes no arguments");
                    return;
                }
                if (f->rel == "fin") {
                    require_arity(f, 1);
                    infer_term(f->terms[0], "bool");
                    return;
                }
                if (f->rel == "le") {
                    require_arity(f, 2);
                    infer_term(f->terms[0], "bool");
                    infer_term(f->terms[1], "bool");
                    return;
                }
                if (f->rel == "cj") {
                    if (f->param < 1) throw SortError("sort error: cj requires a positive count");
                    require_arity(f, 1);
                    infer_term(f->terms[0], "bool");
                    return;
                }
                if (f->rel == "pk") {
                    if (sig.sorts.count("field") == 0) {
                        throw SortError("sort error: pk needs the field sort");
                    }
                    if (f->param < 2) throw SortError("sort error: pk requires a power of at least 2");
                    require_arity(f, 1);
                    infer_term(f->terms[0], "field");
                    return;
                }
                auto it = sig.relations.find(f->rel);
                if (it == sig.relations.end()) {
                    throw SortError("sort error: unknown relation '" + f->rel + "'");
                }
                if (it->second.size() != f->terms.size()) {
                    throw SortError("sort error: relation '" + f->rel + "' applied to " +
                                    std::to_string(f->terms.size()) + " arguments, expected " +
                                    std::to_string(it->second.size()));
                }
                for (size_t k = 0; k < f->terms.size(); ++k) infer_term(f->terms[k], it->second[k]);
                return;
            }
            case Formula::Kind::Eq: {
                std::string s1 = infer_term(f->terms[0], "");
                if (s1.empty()) {
                    std::string s2 = infer_term(f->terms[1], "");
                    if (s2.empty()) {
                        if (sig.default_sort.empty()) {
                            throw SortError("sort error: cannot infer the sort of an equality");
                        }
                        infer_term(f->terms[0], sig.default_sort);
                        infer_term(f->terms[1], sig.default_sort);
                    } else {
                        infer_term(f->terms[0], s2);
                    }
                } else {
                    infer_term(f->terms[1], s1);
                }
                return;
            }
            case Formula::Kind::Exists:
            case Formula::Kind::Forall: {
                if (!sort_declared(f->sort)) {
                    throw SortError("sort error: unknown sort '" + f->sort + "' at quantifier");
                }
                auto prev = var_sorts.find(f->var);
                std::optional<std::string> saved;
                if (prev != var_sorts.end()) saved = prev->second;
                var_sorts[f->var] = f->sort;
                check_formula(f->kids[0]);
                if (saved) {
                    var_sorts[f->var] = *saved;
                } else {
                    var_sorts.erase(f->var);
                }
                return;
            }
            default:
                for (const auto& k : f->kids) check_formula(k);
                return;
        }
    }

    static void require_arity(const FormulaPtr& f, size_t n) {
        if (f->terms.size() != n) {
            throw SortError("sort error: relation '" + f->rel + "' applied to " +
                            std::to_string(f->terms.size()) + " arguments, expected " +
                            std::to_string(n));
        }
    }
};

// ---------------------------------------------------------------------------

struct Parser {
    const std::vector<Token>& toks;
    const Signature& sig;
    size_t input_size;
    size_t i = 0;
    std::vector<std::pair<std::string, std::string>> scope;  // original -> effective name
    std::set<std::string> all_input_names;  // every symbol token, for freshness
    std::set<std::string> free_seen;        // variables already used free
    std::set<std::string> created_names;    // binder renames minted so far

    [[noreturn]] void fail(const std::string& msg, size_t pos) const {
        throw ParseError("parse error at position " + std::to_string(pos) + ": " + msg);
    }

    const Token& peek() const {
        if (i >= toks.size()) {
            throw ParseError("parse error at position " + std::to_string(input_size) +
                             ": unexpected end of input");
        }
        return toks[i];
    }
    Token next() {
        Token t = peek();
        ++i;
        return t;
    }
    void expect(const std::string& tok) {
        Token t = next();
        if (t.text != tok) fail("expected '" + tok + "', found '" + t.text + "'", t.pos);
    }

    std::string resolve_var(const std::string& name) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
            if (it->first == name) return it->second;
        }
        return name;
    }

    bool name_visible(const std::string& name) const {
        for (const auto& [orig, eff] : scope) {
            if (orig == name || eff == name) return true;
        }
        return false;
    }

    std::string fresh(const std::string& base) const {
        std::string cand = base + "'";
        while (all_input_names.count(cand) || created_names.count(cand)) cand += "'";
        return cand;
    }

    bool relation_head(const std::string& h) const {
        return h == "fin" || h == "le" || h == "cj" || h == "pk" || sig.relations.count(h) > 0;
    }

    FormulaPtr parse_formula_node() {
        const Token& t = peek();
        if (t.text != "(") {
            Token b = next();
            if (b.text == "true") return mk_true();
            if (b.text == "false") return mk_false();
            fail("expected a formula, found '" + b.text + "'", b.pos);
        }
        next();  // '('
        Token head = next();
        if (!is_symbol_token(head.text)) fail("expected a formula head", head.pos);
        const std::string& h = head.text;
        if (h == "and" || h == "or") {
            std::vector<FormulaPtr> parts;
            while (peek().text != ")") parts.push_back(parse_formula_node());
            next();
            if (parts.empty()) fail("'" + h + "' needs at least one argument", head.pos);
            return h == "and" ? mk_and_all(parts) : mk_or_all(parts);
        }
        if (h == "not") {
            FormulaPtr a = parse_formula_node();
            expect(")");
            return mk_not(a);
        }
        if (h == "implies") {
            FormulaPtr a = parse_formula_node();
            FormulaPtr b = parse_formula_node();
            expect(")");
            return mk_implies(a, b);
        }
        if (h == "=") {
            TermPtr a = parse_term_node();
            TermPtr b = parse_term_node();
            expect(")");
            return mk_eq(a, b);
        }
        if (h == "exists" || h == "forall") {
            expect("(");
            Token var = next();
            if (!is_symbol_token(var.text) || is_numeral_token(var.text)) {
                fail("expected a variable name in binder", var.pos);
            }
            Token sort = next();
            if (!is_symbol_token(sort.text)) fail("expected a sort name in binder", sort.pos);
            expect(")");
            std::string effective = var.text;
            if (name_visible(var.text) || free_seen.count(var.text)) {
                effective = fresh(var.text);
            }
            created_names.insert(effective);
            scope.emplace_back(var.text, effective);
            FormulaPtr body = parse_formula_node();
            scope.pop_back();
            expect(")");
            return h == "exists" ? mk_exists(effective, sort.text, body)
                                 : mk_forall(effective, sort.text, body);
        }
        if (h == "true" || h == "false") {
            expect(")");
            return h == "true" ? mk_true() : mk_false();
        }
        if (h == "fin" || h == "le" || sig.relations.count(h)) {
            std::vector<TermPtr> args;
            while (peek().text != ")") args.push_back(parse_term_node());
            next();
            return mk_atom(h, std::move(args));
        }
        if (h == "cj" || h == "pk") {
            Token j = next();
            if (!is_integer_token(j.text) || j.text[0] == '-') {
                fail(h + " expects a positive integer parameter", j.pos);
            }
            TermPtr arg = parse_term_node();
            expect(")");
            return mk_atom(h, {arg}, std::stoll(j.text));
        }
        fail("'" + h + "' cannot head a formula in the " + sig.name + " signature", head.pos);
    }

    TermPtr parse_term_node() {
        const Token& t = peek();
        if (t.text != "(") {
            Token b = next();
            if (!is_symbol_token(b.text)) fail("expected a term, found '" + b.text + "'", b.pos);
            if (is_numeral_token(b.text) || b.text == "bzero" || b.text == "bone" ||
                sig.constants.count(b.text)) {
                return mk_const(b.text);
            }
            std::string effective = resolve_var(b.text);
            if (effective == b.text && !name_visible(b.text)) free_seen.insert(b.text);
            return mk_var(effective);
        }
        next();  // '('
        Token head = next();
        if (!is_symbol_token(head.text)) fail("expected a function head", head.pos);
        const std::string& h = head.text;
        if (h == "bv") {
            Token idx = next();
            if (!is_integer_token(idx.text) || idx.text[0] == '-') {
                fail("bv expects a non-negative slot index", idx.pos);
            }
            expect(")");
            return mk_bool_ref(std::stoll(idx.text));
        }
        if (h == "bv-of") {
            FormulaPtr shell = parse_formula_node();
            expect(")");
            return mk_bool_of(shell);
        }
        if (h == "pow") {
            Token k = next();
            if (!is_integer_token(k.text) || std::stoll(k.text) < 2) {
                fail("pow expects an integer exponent >= 2", k.pos);
            }
            TermPtr arg = parse_term_node();
            expect(")");
            return mk_app("pow", {mk_const(k.text), arg});
        }
        if (relation_head(h)) {
            throw SortError("sort error: '" + h +
                            "' is a Boolean-sort relation and cannot appear inside a term");
        }
        if (sig.functions.count(h) || h == "meet" || h == "join" || h == "compl") {
            std::vector<TermPtr> args;
            while (peek().text != ")") args.push_back(parse_term_node());
            next();
            return mk_app(h, std::move(args));
        }
        fail("unknown function symbol '" + h + "'", head.pos);
    }
};

}  // namespace

void check_sorts(const FormulaPtr& f, const Signature& sig,
                 std::map<std::string, std::string>& var_sorts) {
    SortChecker checker{sig, var_sorts};
    checker.check_formula(f);
}

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
    std::vector<Token> toks = tokenize(text);
    Parser parser{toks, sig, text.size()};
    for (const Token& t : toks) {
        if (is_symbol_token(t.text)) parser.all_input_names.insert(t.text);
    }
    FormulaPtr f = parser.parse_formula_node();
    if (parser.i != toks.size()) {
        parser.fail("trailing input after formula", toks[parser.i].pos);
    }
    std::map<std::string, std::string> var_sorts;
    check_sorts(f, sig, var_sorts);
    return f;
}

TermPtr parse_term(const std::string& text, const Signature& sig) {
    std::vector<Token> toks = tokenize(text);
    Parser parser{toks, sig, text.size()};
    for (const Token& t : toks) {
        if (is_symbol_token(t.text)) parser.all_input_names.insert(t.text);
    }
    TermPtr t = parser.parse_term_node();
    if (parser.i != toks.size()) {
        parser.fail("trailing input after term", toks[parser.i].pos);
    }
    std::map<std::string, std::string> var_sorts;
    SortChecker checker{sig, var_sorts};
    checker.infer_term(t, "");
    return t;
}

}  // namespace afv
