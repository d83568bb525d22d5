#include <sstream>

#include "afv/formula.hpp"

namespace afv {

namespace {

void render_term_into(const TermPtr& t, std::ostream& os);

void render_formula_into(const FormulaPtr& f, std::ostream& os) {
    switch (f->kind) {
        case Formula::Kind::Atom: {
            if (f->terms.empty() && (f->rel == "true" || f->rel == "false")) {
                os << f->rel;
                return;
            }
            os << '(' << f->rel;
            if (f->rel == "cj" || f->rel == "pk") os << ' ' << f->param;
            for (const auto& t : f->terms) {
                os << ' ';
                render_term_into(t, os);
            }
            os << ')';
            return;
        }
        case Formula::Kind::Eq:
            os << "(= ";
            render_term_into(f->terms[0], os);
            os << ' ';
            render_term_into(f->terms[1], os);
            os << ')';
            return;
        case Formula::Kind::Not:
            os << "(not ";
            render_formula_into(f->kids[0], os);
            os << ')';
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies: {
            os << '(' << (f->kind == Formula::Kind::And ? "and" : f->kind == Formula::Kind::Or ? "or" : "implies");
            for (const auto& k : f->kids) {
                os << ' ';
                render_formula_into(k, os);
            }
            os << ')';
            return;
        }
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            os << '(' << (f->kind == Formula::Kind::Exists ? "exists" : "forall") << " (" << f->var
               << ' ' << f->sort << ") ";
            render_formula_into(f->kids[0], os);
            os << ')';
            return;
    }
}

void render_term_into(const TermPtr& t, std::ostream& os) {
    switch (t->kind) {
        case Term::Kind::Var:
        case Term::Kind::Const:
            os << t->name;
            return;
        case Term::Kind::BoolRef:
            os << "(bv " << t->index << ')';
            return;
        case Term::Kind::BoolOf:
            os << "(bv-of ";
            render_formula_into(t->shell, os);
            os << ')';
            return;
        case Term::Kind::App: {
            os << '(' << t->name;
            for (const auto& a : t->args) {
                os << ' ';
                render_term_into(a, os);
            }
            os << ')';
            return;
        }
    }
}

}  // namespace

std::string render_formula(const FormulaPtr& f) {
    std::ostringstream os;
    render_formula_into(f, os);
    return os.str();
}

std::string render_term(const TermPtr& t) {
    std::ostringstream os;
    render_term_into(t, os);
    return os.str();
}

}  // namespace afv
