#pragma once

// Weight reduction via Galois conjugation.
//
// One step at weight k picks a prime p near k, lifts to weight 2 with
// nebentypus omega^(k-2) of order m = (p-1)/d, conjugates the nebentypus to
// (omega^d)^t and reduces again. The new Serre weight is one of
//     k1 = d*t + 2,   k2 = p + 1 - d*t,
// and which one occurs is not under our control, so every routine here
// certifies both.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chainforge/arith.hpp"

namespace chainforge::wrgc {

using arith::Integer;

enum class Mode { Step2, Step6 };

enum class ExponentKind { Canonical, Escape, Explicit };

std::string_view to_string(Mode mode);
std::string_view to_string(ExponentKind kind);

struct WrgcStep {
    Integer k_in;
    Integer p;
    Integer d;
    Integer m;
    Integer exponent_used;  // t
    ExponentKind exponent_kind = ExponentKind::Canonical;
    Integer k1;
    Integer k2;
    bool bad_dihedral_safe = false;  // p != 2*k1 - 1 and p != 2*k2 - 1

    bool operator==(const WrgcStep&) const = default;
};

/// Smallest t > m/2 coprime to m. UnsupportedOrder for m in {1,2,3,4,6}.
Integer canonical_t(const Integer& m);

/// Smallest t' coprime to m with (m+1)/2 < t' < m-1, for odd m >= 7.
Integer escape_t_prime(const Integer& m);

/// Smallest odd prime not dividing m (odd m >= 7).
std::uint64_t smallest_odd_nondivisor_prime(const Integer& m);

struct SerreWeights {
    Integer k1;  // e + 2
    Integer k2;  // p + 1 - e
};

/// Both candidate Serre weights for exponent e, 0 < e < p-1.
SerreWeights serre_weights_from_exponent(const Integer& p, const Integer& e);

Integer choose_prime_step2(const Integer& k);
Integer choose_prime_step6(const Integer& k);

/// Builds a step at (k, p) conjugating with exponent t and checks every
/// WrgcStep invariant; throws NonDecreasingWeight or InvariantViolation.
WrgcStep make_step(const Integer& k, const Integer& p, const Integer& t, ExponentKind kind);

WrgcStep wrgc_step(const Integer& k, Mode mode);

/// True iff the canonical exponent at (k, p) makes p = 2*k2 - 1.
bool canonical_hits_bad_dihedral(const Integer& k, const Integer& p);

using StepRule = std::function<WrgcStep(const Integer&)>;

/// The reduction DAG rooted at k0: every branch (k1 and k2) is followed
/// until the weight is <= 14.
struct WrgcTree {
    Integer root;
    std::map<Integer, WrgcStep> nodes;  // keyed by k_in
    std::set<Integer> leaves;           // weights <= 14 reached

    /// Path taking the k1 branch at every fork.
    std::vector<WrgcStep> k1_path() const;
    std::vector<WrgcStep> longest_path() const;
};

WrgcTree wrgc_tree(const Integer& k0, const StepRule& rule);
WrgcTree wrgc_tree(const Integer& k0, Mode mode);

/// Longest root-to-leaf path of the full outcome tree.
std::vector<WrgcStep> wrgc_reduce(const Integer& k0, Mode mode);

struct BertrandResult {
    std::uint64_t lower = 0;  // p_n
    std::uint64_t upper = 0;  // p_{n+1}
    double ratio = 0.0;
    std::uint64_t primes_scanned = 0;
    bool below_constant = false;  // ratio < 1.144
};

/// Maximum p_{n+1}/p_n over consecutive primes 37 <= p_n < p_{n+1} <= max_prime.
BertrandResult verify_bertrand_ratio(std::uint64_t max_prime);

struct BertrandConsequence {
    bool holds = false;            // 5(p-1) < 6(k-2) everywhere
    std::uint64_t worst_k = 0;     // k maximizing (p-1)/(k-2)
    std::uint64_t worst_p = 0;
    std::uint64_t checked = 0;
};

/// (p-1)/(k-2) < 6/5 for every even k in [38, max_k], p = next prime after k.
BertrandConsequence verify_bertrand_consequence(std::uint64_t max_k);

struct HighschoolResult {
    bool holds = false;
    std::uint64_t checked = 0;
    std::optional<std::uint64_t> first_failure;
};

/// p' < 0.6 m, t' = (m + p')/2 and t' < 0.8 m for every odd m in [7, max_m].
HighschoolResult verify_highschool(std::uint64_t max_m);

/// Rows printed by the Step-2 and Step-6 worked examples.
struct TableRow {
    unsigned k;
    unsigned p;
    unsigned d;
    unsigned m;
    unsigned t;
    bool escape;
    unsigned k1;
    unsigned k2;
};

const std::vector<TableRow>& step2_reference_rows();
const std::vector<TableRow>& step6_reference_rows();

}  // namespace chainforge::wrgc
