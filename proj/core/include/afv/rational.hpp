#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace afv {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// p-adic valuation value: an integer or +infinity (the valuation of 0).
// Addition and comparison treat infinity as absorbing / maximal.
struct Val {
    bool infinite = false;
    long long v = 0;

    static Val inf() { return Val{true, 0}; }
    static Val of(long long n) { return Val{false, n}; }

    bool is_inf() const { return infinite; }
    long long finite() const {
        if (infinite) throw std::logic_error("Val: finite() on infinity");
        return v;
    }

    friend bool operator==(const Val& a, const Val& b) {
        if (a.infinite || b.infinite) return a.infinite && b.infinite;
        return a.v == b.v;
    }
    friend bool operator!=(const Val& a, const Val& b) { return !(a == b); }
    friend bool operator<(const Val& a, const Val& b) {
        if (a.infinite) return false;
        if (b.infinite) return true;
        return a.v < b.v;
    }
    friend bool operator<=(const Val& a, const Val& b) { return a == b || a < b; }
    friend bool operator>(const Val& a, const Val& b) { return b < a; }
    friend bool operator>=(const Val& a, const Val& b) { return b <= a; }

    friend Val operator+(const Val& a, const Val& b) {
        if (a.infinite || b.infinite) return inf();
        return of(a.v + b.v);
    }
};

inline Val val_min(const Val& a, const Val& b) { return a < b ? a : b; }

inline std::string to_string(const Val& a) {
    return a.infinite ? std::string("inf") : std::to_string(a.v);
}

// A validated prime. Construction checks primality exactly (trial division;
// every prime this engine meets is tiny).
class Prime {
  public:
    explicit Prime(long long p) : p_(p) {
        if (!is_prime(p)) throw std::invalid_argument("Prime: " + std::to_string(p) + " is not prime");
    }
    long long value() const { return p_; }

    friend bool operator==(const Prime& a, const Prime& b) { return a.p_ == b.p_; }
    friend bool operator!=(const Prime& a, const Prime& b) { return a.p_ != b.p_; }
    friend bool operator<(const Prime& a, const Prime& b) { return a.p_ < b.p_; }

    static bool is_prime(long long n) {
        if (n < 2) return false;
        if (n % 2 == 0) return n == 2;
        if (n % 3 == 0) return n == 3;
        for (long long d = 5; d <= n / d; d += 6) {
            if (n % d == 0 || n % (d + 2) == 0) return false;
        }
        return true;
    }

  private:
    long long p_;
};

// Exponent of p in a nonzero integer.
long long vp_int(const Int& n, long long p);

// p-adic valuation of a rational; vp(0) = infinity.
Val vp(const Rat& x, const Prime& p);

// The unit part of x modulo p^k: for x = p^v * (a/b) with a, b prime to p,
// returns a * b^{-1} mod p^k, a residue in [1, p^k) prime to p.
// Requires x != 0 and p^k to fit in a 64-bit word.
long long unit_residue(const Rat& x, const Prime& p, int k);

// b^e mod m for 64-bit m (intermediate products via 128-bit arithmetic).
long long pow_mod(long long b, long long e, long long m);

// Inverse of a modulo m; requires gcd(a, m) = 1.
long long inv_mod(long long a, long long m);

// p^k as a 64-bit value; throws std::overflow_error if it does not fit.
long long pow_ll(long long p, int k);

// Prime factors of |n|, ascending; empty for |n| <= 1.
std::vector<long long> prime_factors(Int n);

// Euler phi of p^k.
long long phi_pk(long long p, int k);

// Parses "n" or "n/d" with optional sign; denominator must be nonzero.
Rat parse_rational(const std::string& s);

// Renders as "n" or "n/d" in lowest terms, sign on the numerator.
std::string rat_to_string(const Rat& x);

// max(|numerator|, denominator) in lowest terms.
Int height(const Rat& x);

}  // namespace afv
