#pragma once

#include <string>

namespace afv {

// Three-valued truth with Kleene connectives. Indeterminate arises from
// oracle-classified prime sets and from bounded searches that neither find a
// witness nor certify absence.
enum class Tri { False = 0, True = 1, Indet = 2 };

inline Tri tri_of(bool b) { return b ? Tri::True : Tri::False; }

inline Tri t_not(Tri a) {
    if (a == Tri::Indet) return Tri::Indet;
    return a == Tri::True ? Tri::False : Tri::True;
}

inline Tri t_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::Indet || b == Tri::Indet) return Tri::Indet;
    return Tri::True;
}

inline Tri t_or(Tri a, Tri b) {
    if (a == Tri::True || b == Tri::True) return Tri::True;
    if (a == Tri::Indet || b == Tri::Indet) return Tri::Indet;
    return Tri::False;
}

inline std::string to_string(Tri a) {
    switch (a) {
        case Tri::False: return "false";
        case Tri::True: return "true";
        default: return "indeterminate";
    }
}

}  // namespace afv
