#pragma once

// Exact number-theoretic primitives used throughout the engine.
//
// Small quantities (orders, characters, residual characteristics) use
// fixed-width integers; anything that can grow with the good-dihedral prime
// (q itself, the weight q+1, the Step-6 primes) uses Integer.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace chainforge::arith {

using Integer = mpz_class;

enum class PrimalityKind {
    Deterministic,   // n < 2^64, fixed witness set
    MillerRabin64,   // 64 rounds with fixed-seed random bases
};

std::string_view to_string(PrimalityKind kind);

bool is_prime(std::uint64_t n);
bool is_prime(const Integer& n);
PrimalityKind primality_kind(const Integer& n);

/// Smallest prime strictly greater than n.
std::uint64_t next_prime(std::uint64_t n);
Integer next_prime(const Integer& n);

/// Least e >= 1 with a^e = 1 (mod n). Throws NotCoprime.
std::uint64_t multiplicative_order(std::int64_t a, std::uint64_t n);

/// Euler criterion; p must be an odd prime not dividing a.
bool is_square_mod(const Integer& a, const Integer& p);
bool is_square_mod(std::int64_t a, std::uint64_t p);

/// Order of x^exponent for x of exact order char_order.
std::uint64_t char_value_order(std::uint64_t char_order, std::int64_t exponent);

struct NebentypusOrder {
    Integer d;  // gcd(p-1, k-2)
    Integer m;  // (p-1)/d

    bool operator==(const NebentypusOrder&) const = default;
};

/// Order data of omega^(k-2) at p for an even weight k.
NebentypusOrder nebentypus_order(const Integer& p, const Integer& k);

/// c with every factor of p removed.
std::uint64_t strip_prime_part(std::uint64_t c, std::uint64_t p);

std::uint64_t gcd(std::uint64_t a, std::uint64_t b);

/// Chinese remainder over pairwise coprime moduli; nullopt if the system is
/// inconsistent. Result is the least non-negative solution.
struct Congruence {
    Integer residue;
    Integer modulus;
};
std::optional<Congruence> crt(std::span<const Congruence> system);

using CandidatePredicate = std::function<bool(const Integer&)>;

/// Smallest prime q >= min with q = residue (mod modulus) and extra(q).
/// Throws SearchBudgetExceeded after `budget` candidates.
Integer find_prime_in_progression(const Integer& residue, const Integer& modulus,
                                  const Integer& min, const CandidatePredicate& extra,
                                  std::uint64_t budget = 1'000'000);

std::uint64_t to_u64(const Integer& n);
inline Integer from_u64(std::uint64_t v) { return Integer(static_cast<unsigned long>(v)); }
bool fits_u64(const Integer& n);

}  // namespace chainforge::arith
