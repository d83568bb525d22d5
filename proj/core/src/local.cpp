#include "afv/local.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace afv {

namespace {

// Units mod m (m a prime power) whose k-th powers realize each residue class.
std::set<long long> kth_power_residues(long long p, long long m, long long k) {
    std::set<long long> out;
    for (long long y = 1; y < m; ++y) {
        if (y % p == 0) continue;
        out.insert(pow_mod(y, k, m));
    }
    return out;
}

const std::set<long long>& cached_kth_power_residues(long long p, long long m, long long k) {
    thread_local std::map<std::tuple<long long, long long, long long>, std::set<long long>> cache;
    auto key = std::make_tuple(p, m, k);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, kth_power_residues(p, m, k)).first;
    return it->second;
}

}  // namespace

bool is_square(const Rat& x, const Prime& p) {
    if (x == 0) return true;
    Val v = vp(x, p);
    if (v.finite() % 2 != 0) return false;
    if (p.value() == 2) return unit_residue(x, p, 3) == 1;
    long long u = unit_residue(x, p, 1);
    return pow_mod(u, (p.value() - 1) / 2, p.value()) == 1;
}

bool is_kth_power(const Rat& x, const Prime& p, long long k) {
    if (k < 2) throw std::invalid_argument("is_kth_power: k must be >= 2");
    if (x == 0) return true;
    Val v = vp(x, p);
    if (((v.finite() % k) + k) % k != 0) return false;
    long long e = vp_int(Int(k), p.value());
    long long m = pow_ll(p.value(), static_cast<int>(2 * e + 1));
    long long u = unit_residue(x, p, static_cast<int>(2 * e + 1));
    return cached_kth_power_residues(p.value(), m, k).count(u) > 0;
}

bool p2as(const Rat& x, const Prime& p) { return is_square(1 + 4 * x, p); }

bool tplus(const Rat& x, const Prime& p) {
    if (x == 0) return false;
    bool result = !p2as(x, p) && !p2as(1 / x, p);
    if (result && vp(x, p) != Val::of(0)) {
        throw std::logic_error("tplus: predicate held off the unit sphere at " + rat_to_string(x) +
                               ", p=" + std::to_string(p.value()));
    }
    return result;
}

namespace {

// All rationals of height <= bound, in a deterministic order (height, then
// numerator, then denominator).
std::vector<Rat> rational_pool(long long bound) {
    std::vector<Rat> pool;
    std::set<Rat> seen;
    for (long long h = 1; h <= bound; ++h) {
        for (long long den = 1; den <= h; ++den) {
            for (long long num : {-h, h}) {
                Rat r{Int(num), Int(den)};
                if (height(r) != h) continue;
                if (seen.insert(r).second) pool.push_back(r);
            }
        }
        for (long long num = -h; num <= h; ++num) {
            Rat r{Int(num), Int(h)};
            if (height(r) != h) continue;
            if (seen.insert(r).second) pool.push_back(r);
        }
    }
    return pool;
}

std::string witness_sum01(int delta, const Rat& a, const Rat& b, const Rat& c, const Rat& d) {
    std::ostringstream os;
    os << "delta=" << delta << " a=" << rat_to_string(a) << " b=" << rat_to_string(b)
       << " c=" << rat_to_string(c) << " d=" << rat_to_string(d);
    return os.str();
}

}  // namespace

Tri in_valuation_ring_bounded(const Rat& x, const Prime& p, long long search_bound, int l,
                              ValRingReport* report) {
    if (search_bound < 1) throw std::invalid_argument("in_valuation_ring_bounded: bound must be positive");
    if (l < 1) throw std::invalid_argument("in_valuation_ring_bounded: l must be positive");
    std::vector<Rat> tplus_pool;
    for (const Rat& r : rational_pool(search_bound)) {
        if (tplus(r, p)) tplus_pool.push_back(r);
    }
    // Clause 1: x - delta = a + b + c*d with all four on the tplus sphere.
    // Pair sums are indexed once so the (c,d) sweep costs one lookup each.
    std::map<Rat, std::pair<Rat, Rat>> pair_sum;
    for (const Rat& a : tplus_pool) {
        for (const Rat& b : tplus_pool) {
            pair_sum.emplace(a + b, std::make_pair(a, b));
        }
    }
    for (int delta = 0; delta <= 1; ++delta) {
        for (const Rat& c : tplus_pool) {
            for (const Rat& d : tplus_pool) {
                auto it = pair_sum.find(x - delta - c * d);
                if (it == pair_sum.end()) continue;
                const Rat& a = it->second.first;
                const Rat& b = it->second.second;
                if (!(tplus(a, p) && tplus(b, p) && tplus(c, p) && tplus(d, p))) continue;
                if (a + b + c * d != x - delta) continue;
                if (report) {
                    report->clause = "sum01";
                    report->witness = witness_sum01(delta, a, b, c, d);
                }
                return Tri::True;
            }
        }
    }
    // Clause 2: some y on the tplus sphere with x^l - 1 + y also on it.
    Rat xl = 1;
    for (int i = 0; i < l; ++i) xl *= x;
    for (const Rat& y : tplus_pool) {
        if (tplus(xl - 1 + y, p)) {
            if (report) {
                report->clause = "power-shift";
                report->witness = "y=" + rat_to_string(y);
            }
            return Tri::True;
        }
    }
    if (report) {
        report->clause.clear();
        report->witness.clear();
    }
    return Tri::Indet;
}

long long residue_mod_p(const Rat& x, const Prime& p) {
    if (x == 0) return 0;
    if (vp(x, p) < Val::of(0)) throw std::invalid_argument("residue_mod_p: not p-integral");
    long long pv = p.value();
    long long num = static_cast<long long>(((numerator(x) % pv) + pv) % pv);
    long long den = static_cast<long long>(((denominator(x) % pv) + pv) % pv);
    return num * inv_mod(den, pv) % pv;
}

bool sol_k(const std::vector<Rat>& coeffs, const Prime& p) {
    std::vector<long long> reduced;
    reduced.reserve(coeffs.size());
    for (const Rat& c : coeffs) reduced.push_back(residue_mod_p(c, p));
    long long pv = p.value();
    for (long long xr = 0; xr < pv; ++xr) {
        long long acc = 1;  // monic leading coefficient
        for (long long c : reduced) acc = (acc * xr + c) % pv;
        if (acc == 0) return true;
    }
    return false;
}

namespace {

// Exact integer k-th root by binary search; returns the root if n = r^k.
bool int_kth_root(const Int& n, long long k, Int* root) {
    if (n < 0) return false;
    Int lo = 0, hi = 1;
    while (boost::multiprecision::pow(hi, static_cast<unsigned>(k)) < n) hi <<= 1;
    while (lo <= hi) {
        Int mid = (lo + hi) / 2;
        Int mk = boost::multiprecision::pow(mid, static_cast<unsigned>(k));
        if (mk == n) {
            if (root) *root = mid;
            return true;
        }
        if (mk < n) {
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return false;
}

}  // namespace

bool is_rational_kth_power(const Rat& x, long long k) {
    if (k < 2) throw std::invalid_argument("is_rational_kth_power: k must be >= 2");
    if (x == 0) return true;
    if (x < 0 && k % 2 == 0) return false;
    Int num = numerator(x);
    Int den = denominator(x);
    if (num < 0) num = -num;
    return int_kth_root(num, k, nullptr) && int_kth_root(den, k, nullptr);
}

}  // namespace afv
