#include "afv/rational.hpp"

#include <cstdlib>
#include <limits>

namespace afv {

long long vp_int(const Int& n, long long p) {
    if (n == 0) throw std::logic_error("vp_int: zero");
    Int m = abs(n);
    long long v = 0;
    while (m % p == 0) {
        m /= p;
        ++v;
    }
    return v;
}

Val vp(const Rat& x, const Prime& p) {
    if (x == 0) return Val::inf();
    return Val::of(vp_int(numerator(x), p.value()) - vp_int(denominator(x), p.value()));
}

long long pow_ll(long long p, int k) {
    long long r = 1;
    for (int i = 0; i < k; ++i) {
        if (r > (1LL << 62) / p) throw std::overflow_error("pow_ll: p^k exceeds 64 bits");
        r *= p;
    }
    return r;
}

long long phi_pk(long long p, int k) {
    if (k == 0) return 1;
    return pow_ll(p, k - 1) * (p - 1);
}

long long pow_mod(long long b, long long e, long long m) {
    if (m <= 0) throw std::invalid_argument("pow_mod: modulus must be positive");
    b %= m;
    if (b < 0) b += m;
    unsigned __int128 acc = 1, base = static_cast<unsigned __int128>(b);
    while (e > 0) {
        if (e & 1) acc = acc * base % static_cast<unsigned __int128>(m);
        base = base * base % static_cast<unsigned __int128>(m);
        e >>= 1;
    }
    return static_cast<long long>(acc);
}

long long inv_mod(long long a, long long m) {
    long long r0 = m, r1 = ((a % m) + m) % m, t0 = 0, t1 = 1;
    while (r1 != 0) {
        long long q = r0 / r1;
        long long r2 = r0 - q * r1;
        long long t2 = t0 - q * t1;
        r0 = r1; r1 = r2;
        t0 = t1; t1 = t2;
    }
    if (r0 != 1) throw std::invalid_argument("inv_mod: argument not invertible");
    return ((t0 % m) + m) % m;
}

long long unit_residue(const Rat& x, const Prime& p, int k) {
    if (x == 0) throw std::invalid_argument("unit_residue: zero has no unit part");
    const long long pv = p.value();
    const long long m = pow_ll(pv, k);
    Int num = numerator(x), den = denominator(x);
    bool neg = num < 0;
    num = abs(num);
    while (num % pv == 0) num /= pv;
    while (den % pv == 0) den /= pv;
    long long a = static_cast<long long>(num % m);
    long long b = static_cast<long long>(den % m);
    long long r = static_cast<long long>(
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(inv_mod(b, m)) % static_cast<unsigned __int128>(m));
    if (neg) r = (m - r) % m;
    return r;
}

Rat parse_rational(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_rational: empty string");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rat(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_rational: malformed rational '" + s + "'");
    }
}

std::string rat_to_string(const Rat& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

Int height(const Rat& x) {
    Int n = abs(numerator(x));
    Int d = denominator(x);
    return n > d ? n : d;
}

std::vector<long long> prime_factors(Int n) {
    std::vector<long long> out;
    if (n < 0) n = -n;
    for (Int d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            if (d > std::numeric_limits<long long>::max())
                throw std::overflow_error("prime_factors: factor out of range");
            out.push_back(static_cast<long long>(d));
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) {
        if (n > std::numeric_limits<long long>::max())
            throw std::overflow_error("prime_factors: factor out of range");
        out.push_back(static_cast<long long>(n));
    }
    return out;
}

}  // namespace afv
