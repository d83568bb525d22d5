#include "afv/prime_set.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "afv/rational.hpp"
#include "json.hpp"

namespace afv {

namespace {

std::vector<long long> normalize_primes(std::vector<long long> v) {
    for (long long p : v) {
        if (!Prime::is_prime(p)) {
            throw std::invalid_argument("prime set literal contains a non-prime: " +
                                        std::to_string(p));
        }
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool sorted_contains(const std::vector<long long>& v, long long p) {
    return std::binary_search(v.begin(), v.end(), p);
}

std::vector<long long> sorted_union(const std::vector<long long>& a,
                                    const std::vector<long long>& b) {
    std::vector<long long> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<long long> sorted_intersection(const std::vector<long long>& a,
                                           const std::vector<long long>& b) {
    std::vector<long long> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<long long> sorted_difference(const std::vector<long long>& a,
                                         const std::vector<long long>& b) {
    std::vector<long long> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// True when the set is finite by structure or declaration.
bool finite_ish(const PrimeSet& a) {
    if (a.is_finite()) return true;
    return a.is_frontier() && a.frontier_info().cls == FrontierClass::DeclaredFinite;
}

// True when the set is cofinite by structure or declaration.
bool cofinite_ish(const PrimeSet& a) {
    if (a.is_cofinite()) return true;
    return a.is_frontier() && a.frontier_info().cls == FrontierClass::DeclaredCofinite;
}

long long frontier_bound(const PrimeSet& a) {
    return a.is_frontier() ? a.frontier_info().sample_bound : 0;
}

std::string describe(const PrimeSet& a) {
    return a.to_string();
}

}  // namespace

PrimeSet PrimeSet::finite(std::vector<long long> primes) {
    PrimeSet s;
    s.kind_ = Kind::Finite;
    s.base_ = normalize_primes(std::move(primes));
    return s;
}

PrimeSet PrimeSet::cofinite(std::vector<long long> excluded_primes) {
    PrimeSet s;
    s.kind_ = Kind::Cofinite;
    s.base_ = normalize_primes(std::move(excluded_primes));
    return s;
}

PrimeSet PrimeSet::frontier(std::function<bool(long long)> member, FrontierClass cls,
                            long long sample_bound, std::string label) {
    if (!member) throw std::invalid_argument("frontier set needs a membership oracle");
    if (sample_bound < 2) throw std::invalid_argument("frontier sample bound must be >= 2");
    PrimeSet s;
    s.kind_ = Kind::Frontier;
    auto info = std::make_shared<FrontierInfo>();
    info->member = std::move(member);
    info->cls = cls;
    info->sample_bound = sample_bound;
    info->label = std::move(label);
    s.frontier_ = std::move(info);
    return s;
}

const std::vector<long long>& PrimeSet::base() const {
    if (kind_ == Kind::Frontier) {
        throw std::invalid_argument("frontier sets have no explicit member list");
    }
    return base_;
}

const FrontierInfo& PrimeSet::frontier_info() const {
    if (kind_ != Kind::Frontier) {
        throw std::invalid_argument("not a frontier set");
    }
    return *frontier_;
}

bool PrimeSet::contains(long long p) const {
    if (!Prime::is_prime(p)) {
        throw std::invalid_argument("membership is defined on primes only; got " +
                                    std::to_string(p));
    }
    switch (kind_) {
        case Kind::Finite:
            return sorted_contains(base_, p);
        case Kind::Cofinite:
            return !sorted_contains(base_, p);
        case Kind::Frontier:
            return frontier_->member(p);
    }
    return false;
}

std::string PrimeSet::to_string() const {
    std::ostringstream os;
    auto list = [&os](const std::vector<long long>& v) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            os << v[i];
        }
        os << ']';
    };
    switch (kind_) {
        case Kind::Finite:
            os << "{\"finite\":";
            list(base_);
            os << '}';
            break;
        case Kind::Cofinite:
            os << "{\"cofinite\":";
            list(base_);
            os << '}';
            break;
        case Kind::Frontier:
            os << "frontier(" << (frontier_->label.empty() ? "?" : frontier_->label)
               << ", bound=" << frontier_->sample_bound;
            switch (frontier_->cls) {
                case FrontierClass::Unknown: break;
                case FrontierClass::DeclaredFinite: os << ", declared-finite"; break;
                case FrontierClass::DeclaredCofinite: os << ", declared-cofinite"; break;
            }
            os << ')';
            break;
    }
    return os.str();
}

PrimeSet ps_meet(const PrimeSet& a, const PrimeSet& b) {
    using K = PrimeSet::Kind;
    if (a.kind_ != K::Frontier && b.kind_ != K::Frontier) {
        if (a.kind_ == K::Finite && b.kind_ == K::Finite) {
            return PrimeSet::finite(sorted_intersection(a.base_, b.base_));
        }
        if (a.kind_ == K::Finite && b.kind_ == K::Cofinite) {
            return PrimeSet::finite(sorted_difference(a.base_, b.base_));
        }
        if (a.kind_ == K::Cofinite && b.kind_ == K::Finite) {
            return PrimeSet::finite(sorted_difference(b.base_, a.base_));
        }
        return PrimeSet::cofinite(sorted_union(a.base_, b.base_));
    }
    FrontierClass cls = FrontierClass::Unknown;
    if (finite_ish(a) || finite_ish(b)) {
        cls = FrontierClass::DeclaredFinite;
    } else if (cofinite_ish(a) && cofinite_ish(b)) {
        cls = FrontierClass::DeclaredCofinite;
    }
    long long bound = std::max({static_cast<long long>(2), frontier_bound(a), frontier_bound(b)});
    PrimeSet ca = a, cb = b;
    return PrimeSet::frontier(
        [ca, cb](long long p) { return ca.contains(p) && cb.contains(p); }, cls, bound,
        "(" + describe(a) + " /\\ " + describe(b) + ")");
}

PrimeSet ps_join(const PrimeSet& a, const PrimeSet& b) {
    using K = PrimeSet::Kind;
    if (a.kind_ != K::Frontier && b.kind_ != K::Frontier) {
        if (a.kind_ == K::Finite && b.kind_ == K::Finite) {
            return PrimeSet::finite(sorted_union(a.base_, b.base_));
        }
        if (a.kind_ == K::Finite && b.kind_ == K::Cofinite) {
            return PrimeSet::cofinite(sorted_difference(b.base_, a.base_));
        }
        if (a.kind_ == K::Cofinite && b.kind_ == K::Finite) {
            return PrimeSet::cofinite(sorted_difference(a.base_, b.base_));
        }
        return PrimeSet::cofinite(sorted_intersection(a.base_, b.base_));
    }
    FrontierClass cls = FrontierClass::Unknown;
    if (cofinite_ish(a) || cofinite_ish(b)) {
        cls = FrontierClass::DeclaredCofinite;
    } else if (finite_ish(a) && finite_ish(b)) {
        cls = FrontierClass::DeclaredFinite;
    }
    long long bound = std::max({static_cast<long long>(2), frontier_bound(a), frontier_bound(b)});
    PrimeSet ca = a, cb = b;
    return PrimeSet::frontier(
        [ca, cb](long long p) { return ca.contains(p) || cb.contains(p); }, cls, bound,
        "(" + describe(a) + " \\/ " + describe(b) + ")");
}

PrimeSet ps_compl(const PrimeSet& a) {
    using K = PrimeSet::Kind;
    switch (a.kind_) {
        case K::Finite:
            return PrimeSet::cofinite(a.base_);
        case K::Cofinite:
            return PrimeSet::finite(a.base_);
        case K::Frontier: {
            FrontierClass cls = FrontierClass::Unknown;
            if (a.frontier_->cls == FrontierClass::DeclaredFinite) {
                cls = FrontierClass::DeclaredCofinite;
            } else if (a.frontier_->cls == FrontierClass::DeclaredCofinite) {
                cls = FrontierClass::DeclaredFinite;
            }
            PrimeSet ca = a;
            return PrimeSet::frontier([ca](long long p) { return !ca.contains(p); }, cls,
                                      a.frontier_->sample_bound, "~" + describe(a));
        }
    }
    throw std::logic_error("unreachable");
}

PrimeSet ps_diff(const PrimeSet& a, const PrimeSet& b) { return ps_meet(a, ps_compl(b)); }

bool ps_equal(const PrimeSet& a, const PrimeSet& b) {
    if (a.is_frontier() || b.is_frontier()) {
        throw std::invalid_argument("equality of frontier sets is not decidable here");
    }
    return a.kind() == b.kind() && a.base() == b.base();
}

Tri ps_empty(const PrimeSet& a) {
    switch (a.kind()) {
        case PrimeSet::Kind::Finite:
            return tri_of(a.base().empty());
        case PrimeSet::Kind::Cofinite:
            return Tri::False;
        case PrimeSet::Kind::Frontier: {
            if (a.frontier_info().cls == FrontierClass::DeclaredCofinite) return Tri::False;
            for (long long p : primes_below(a.frontier_info().sample_bound)) {
                if (a.contains(p)) return Tri::False;
            }
            return Tri::Indet;
        }
    }
    throw std::logic_error("unreachable");
}

Tri eval_fin(const PrimeSet& a, FinDensityReport* report) {
    if (report) *report = FinDensityReport{};
    switch (a.kind()) {
        case PrimeSet::Kind::Finite:
            return Tri::True;
        case PrimeSet::Kind::Cofinite:
            return Tri::False;
        case PrimeSet::Kind::Frontier: {
            switch (a.frontier_info().cls) {
                case FrontierClass::DeclaredFinite:
                    return Tri::True;
                case FrontierClass::DeclaredCofinite:
                    return Tri::False;
                case FrontierClass::Unknown: {
                    if (report) {
                        for (long long p : primes_below(a.frontier_info().sample_bound)) {
                            ++report->primes_sampled;
                            if (a.contains(p)) ++report->members_found;
                        }
                    }
                    return Tri::Indet;
                }
            }
        }
    }
    throw std::logic_error("unreachable");
}

Tri eval_cj(long long j, const PrimeSet& a) {
    if (j < 1) throw std::invalid_argument("cardinality threshold must be >= 1");
    switch (a.kind()) {
        case PrimeSet::Kind::Finite:
            return tri_of(static_cast<long long>(a.base().size()) >= j);
        case PrimeSet::Kind::Cofinite:
            return Tri::True;
        case PrimeSet::Kind::Frontier: {
            if (a.frontier_info().cls == FrontierClass::DeclaredCofinite) return Tri::True;
            long long found = 0;
            for (long long p : primes_below(a.frontier_info().sample_bound)) {
                if (a.contains(p)) {
                    if (++found >= j) return Tri::True;
                }
            }
            return Tri::Indet;
        }
    }
    throw std::logic_error("unreachable");
}

PrimeSet ps_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad prime-set literal: ") + e.what());
    }
    if (!j.is_object() || j.size() != 1) {
        throw std::invalid_argument(
            "prime-set literal must be an object with a single "
            "\"finite\" or \"cofinite\" key");
    }
    auto read_list = [](const nlohmann::json& arr) {
        if (!arr.is_array()) {
            throw std::invalid_argument("prime-set literal value must be an array of primes");
        }
        std::vector<long long> v;
        for (const auto& e : arr) {
            if (!e.is_number_integer()) {
                throw std::invalid_argument("prime-set literal entries must be integers");
            }
            v.push_back(e.get<long long>());
        }
        return v;
    };
    if (j.contains("finite")) return PrimeSet::finite(read_list(j["finite"]));
    if (j.contains("cofinite")) return PrimeSet::cofinite(read_list(j["cofinite"]));
    throw std::invalid_argument(
        "prime-set literal must use key \"finite\" or \"cofinite\"");
}

std::string ps_to_json(const PrimeSet& a) {
    if (a.is_frontier()) {
        throw std::invalid_argument("frontier sets have no explicit literal form");
    }
    return a.to_string();
}

const std::vector<long long>& primes_below(long long bound) {
    static std::mutex mu;
    static std::map<long long, std::vector<long long>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(bound);
    if (it != cache.end()) return it->second;
    std::vector<long long> out;
    if (bound > 2) {
        std::vector<bool> sieve(static_cast<std::size_t>(bound), true);
        for (long long i = 2; i < bound; ++i) {
            if (sieve[static_cast<std::size_t>(i)]) {
                out.push_back(i);
                for (long long k = i * i; k < bound; k += i) {
                    sieve[static_cast<std::size_t>(k)] = false;
                }
            }
        }
    }
    return cache.emplace(bound, std::move(out)).first->second;
}

}  // namespace afv
