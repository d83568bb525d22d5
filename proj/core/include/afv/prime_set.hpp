#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "afv/tri.hpp"

namespace afv {

// How a membership-oracle set is classified when its finiteness is not known
// structurally: a declaration supplied by the caller, or Unknown.
enum class FrontierClass { Unknown, DeclaredFinite, DeclaredCofinite };

struct FrontierInfo {
    std::function<bool(long long)> member;  // invoked on primes only; must be pure
    FrontierClass cls = FrontierClass::Unknown;
    long long sample_bound = 10000;  // primes below this bound may be sampled
    std::string label;
};

// An element of the Boolean algebra Powerset(primes), kept exact as a finite
// set or the complement of one whenever possible. Sets that arise from
// undecided arithmetic conditions are carried as Frontier oracles.
class PrimeSet {
  public:
    enum class Kind { Finite, Cofinite, Frontier };

    static PrimeSet finite(std::vector<long long> primes);
    static PrimeSet cofinite(std::vector<long long> excluded_primes);
    static PrimeSet frontier(std::function<bool(long long)> member, FrontierClass cls,
                             long long sample_bound, std::string label);

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_cofinite() const { return kind_ == Kind::Cofinite; }
    bool is_frontier() const { return kind_ == Kind::Frontier; }

    // Finite: the members. Cofinite: the excluded primes. Frontier: throws.
    const std::vector<long long>& base() const;
    const FrontierInfo& frontier_info() const;

    bool contains(long long p) const;  // p must be prime

    std::string to_string() const;

    friend PrimeSet ps_meet(const PrimeSet& a, const PrimeSet& b);
    friend PrimeSet ps_join(const PrimeSet& a, const PrimeSet& b);
    friend PrimeSet ps_compl(const PrimeSet& a);

  private:
    Kind kind_ = Kind::Finite;
    std::vector<long long> base_;
    std::shared_ptr<const FrontierInfo> frontier_;
};

PrimeSet ps_meet(const PrimeSet& a, const PrimeSet& b);
PrimeSet ps_join(const PrimeSet& a, const PrimeSet& b);
PrimeSet ps_compl(const PrimeSet& a);
PrimeSet ps_diff(const PrimeSet& a, const PrimeSet& b);

// Exact equality; defined for Finite/Cofinite operands and throws
// std::invalid_argument when either side is a Frontier set.
bool ps_equal(const PrimeSet& a, const PrimeSet& b);

// Emptiness. Frontier sets are sampled below their bound: a member found is a
// sound "no"; otherwise Indeterminate unless declared cofinite.
Tri ps_empty(const PrimeSet& a);

struct FinDensityReport {
    long long primes_sampled = 0;
    long long members_found = 0;
};

// Finiteness of the set. Frontier policy: declarations are trusted; Unknown
// yields Indeterminate together with an empirical density report.
Tri eval_fin(const PrimeSet& a, FinDensityReport* report = nullptr);

// |a| >= j. Cofinite sets always satisfy it. For Frontier sets, finding j
// distinct member primes below the sample bound is a sound "yes"; otherwise
// declarations decide or the verdict is Indeterminate.
Tri eval_cj(long long j, const PrimeSet& a);

// Data-file literals: {"finite":[2,3,5]} or {"cofinite":[7]}.
PrimeSet ps_from_json(const std::string& text);
std::string ps_to_json(const PrimeSet& a);  // throws on Frontier

// All primes < bound, ascending.
const std::vector<long long>& primes_below(long long bound);

}  // namespace afv
