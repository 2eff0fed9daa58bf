#include "chainforge/arith.hpp"

#include <array>
#include <limits>
#include <mutex>
#include <numeric>

#include "chainforge/error.hpp"


namespace chainforge::arith {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

bool strong_probable_prime(u64 n, u64 a) {
    if (a % n == 0) return true;
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

constexpr std::array<u64, 12> kWitnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

constexpr std::array<unsigned, 53> kSmallPrimes{
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241};

bool big_strong_probable_prime(const Integer& n, const Integer& a, const Integer& d, unsigned s) {
    const Integer n_minus_1 = n - 1;
    Integer x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n_minus_1) return true;
    for (unsigned i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == n_minus_1) return true;
    }
    return false;
}

constexpr unsigned kBigRounds = 64;

}  // namespace

std::string_view to_string(PrimalityKind kind) {
    return kind == PrimalityKind::Deterministic ? "deterministic" : "miller-rabin-64";
}

bool fits_u64(const Integer& n) {
    return n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
}

std::uint64_t to_u64(const Integer& n) {
    if (!fits_u64(n)) throw Error(ErrorKind::ParameterInconsistency, "value does not fit in 64 bits: " + n.get_str());
    return static_cast<std::uint64_t>(mpz_getlimbn(n.get_mpz_t(), 0));
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (unsigned p : kSmallPrimes) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    if (n < 241ull * 241ull) return true;
    for (u64 a : kWitnesses)
        if (!strong_probable_prime(n, a)) return false;
    return true;
}

PrimalityKind primality_kind(const Integer& n) {
    return fits_u64(n) ? PrimalityKind::Deterministic : PrimalityKind::MillerRabin64;
}

bool is_prime(const Integer& n) {
    if (n < 2) return false;
    if (fits_u64(n)) return is_prime(to_u64(n));
    for (unsigned p : kSmallPrimes)
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;

    Integer d = n - 1;
    unsigned s = 0;
    while (mpz_even_p(d.get_mpz_t())) {
        d >>= 1;
        ++s;
    }
    if (!big_strong_probable_prime(n, 2, d, s)) return false;

    // Fixed seed: the verdict (and the transcript recording it) must be
    // reproducible run to run.
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(0x5EEDC0DEul);
    const Integer span = n - 3;
    for (unsigned round = 1; round < kBigRounds; ++round) {
        Integer a = rng.get_z_range(span) + 2;
        if (!big_strong_probable_prime(n, a, d, s)) return false;
    }
    return true;
}

std::uint64_t next_prime(std::uint64_t n) {
    if (n < 2) return 2;
    if (n == std::numeric_limits<u64>::max()) throw Error(ErrorKind::ParameterInconsistency, "next_prime overflow");
    u64 c = n + 1;
    if (c > 2 && c % 2 == 0) ++c;
    while (!is_prime(c)) c += 2;
    return c;
}

Integer next_prime(const Integer& n) {
    if (n < 0) return 2;
    if (n < Integer("18446744073709551557")) return from_u64(next_prime(to_u64(n)));
    Integer c = n + 1;
    if (mpz_even_p(c.get_mpz_t())) c += 1;
    while (!is_prime(c)) c += 2;
    return c;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t multiplicative_order(std::int64_t a, std::uint64_t n) {
    if (n < 2) throw Error(ErrorKind::ParameterInconsistency, "modulus must be >= 2");
    const auto sn = static_cast<std::int64_t>(n);
    const u64 reduced = static_cast<u64>(((a % sn) + sn) % sn);
    if (std::gcd(reduced, n) != 1)
        throw Error(ErrorKind::NotCoprime, "gcd(" + std::to_string(a) + ", " + std::to_string(n) + ") != 1");
    u64 x = reduced % n;
    u64 e = 1;
    while (x != 1 % n) {
        x = mulmod(x, reduced, n);
        ++e;
    }
    return e;
}

bool is_square_mod(const Integer& a, const Integer& p) {
    Integer r = a % p;
    if (r < 0) r += p;
    if (r == 0) throw Error(ErrorKind::NotCoprime, "p divides a in is_square_mod");
    Integer e = (p - 1) / 2;
    Integer x;
    mpz_powm(x.get_mpz_t(), r.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    return x == 1;
}

bool is_square_mod(std::int64_t a, std::uint64_t p) {
    return is_square_mod(Integer(static_cast<long>(a)), from_u64(p));
}

std::uint64_t char_value_order(std::uint64_t char_order, std::int64_t exponent) {
    if (char_order == 0) throw Error(ErrorKind::ParameterInconsistency, "character order must be >= 1");
    const u64 e = static_cast<u64>(exponent < 0 ? -exponent : exponent);
    return char_order / std::gcd(char_order, e);
}

NebentypusOrder nebentypus_order(const Integer& p, const Integer& k) {
    NebentypusOrder out;
    const Integer pm1 = p - 1;
    const Integer km2 = k - 2;
    mpz_gcd(out.d.get_mpz_t(), pm1.get_mpz_t(), km2.get_mpz_t());
    out.m = pm1 / out.d;
    return out;
}

std::uint64_t strip_prime_part(std::uint64_t c, std::uint64_t p) {
    if (p < 2) return c;
    while (c != 0 && c % p == 0) c /= p;
    return c;
}

std::optional<Congruence> crt(std::span<const Congruence> system) {
    Congruence acc{0, 1};
    for (const auto& c : system) {
        Integer g, s, t;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), acc.modulus.get_mpz_t(), c.modulus.get_mpz_t());
        Integer diff = c.residue - acc.residue;
        if (diff % g != 0) return std::nullopt;
        const Integer lcm = acc.modulus / g * c.modulus;
        Integer x = acc.residue + acc.modulus * ((diff / g * s) % (c.modulus / g));
        x %= lcm;
        if (x < 0) x += lcm;
        acc = {x, lcm};
    }
    return acc;
}

Integer find_prime_in_progression(const Integer& residue, const Integer& modulus, const Integer& min,
                                  const CandidatePredicate& extra, std::uint64_t budget) {
    if (modulus < 1) throw Error(ErrorKind::ParameterInconsistency, "modulus must be positive");
    Integer g;
    mpz_gcd(g.get_mpz_t(), residue.get_mpz_t(), modulus.get_mpz_t());
    if (g != 1) throw Error(ErrorKind::NotCoprime, "residue and modulus share a factor");

    Integer r = residue % modulus;
    if (r < 0) r += modulus;
    Integer candidate = r;
    if (candidate < min) {
        Integer steps = (min - candidate + modulus - 1) / modulus;
        candidate += steps * modulus;
    }
    for (std::uint64_t tried = 0; tried < budget; ++tried, candidate += modulus) {
        if (is_prime(candidate) && (!extra || extra(candidate))) return candidate;
    }
    throw Error(ErrorKind::SearchBudgetExceeded,
                "no prime found in " + std::to_string(budget) + " candidates of " + r.get_str() + " mod " +
                    modulus.get_str());
}

}  // namespace chainforge::arith
