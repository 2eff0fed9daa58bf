#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "chainforge/arith.hpp"
#include "chainforge/error.hpp"
#include "chainforge/poly.hpp"
#include "chainforge/sieve.hpp"

using namespace chainforge;
using namespace chainforge::arith;

namespace {

bool trial_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::uint64_t brute_order(std::uint64_t a, std::uint64_t n) {
    std::uint64_t x = a % n;
    for (std::uint64_t e = 1;; ++e, x = x * a % n)
        if (x == 1) return e;
}

}  // namespace

TEST_CASE("primality agrees with trial division below 10^5") {
    for (std::uint64_t n = 0; n < 100000; ++n) REQUIRE(is_prime(n) == trial_prime(n));
}

TEST_CASE("primality of large integers") {
    const Integer m89 = (Integer(1) << 89) - 1;  // Mersenne prime
    const Integer m67 = (Integer(1) << 67) - 1;  // 193707721 * 761838257287
    CHECK(is_prime(m89));
    CHECK_FALSE(is_prime(m67));
    CHECK(is_prime(Integer(193707721) * 1 + 0));
    CHECK_FALSE(is_prime(m89 * m89));
    CHECK(primality_kind(Integer(97)) == PrimalityKind::Deterministic);
    CHECK(primality_kind(m89) == PrimalityKind::MillerRabin64);
    // Carmichael numbers and strong pseudoprimes to small bases
    for (std::uint64_t n : {561ull, 1105ull, 2047ull, 3215031751ull, 3825123056546413051ull}) CHECK_FALSE(is_prime(n));
}

TEST_CASE("next_prime agrees with a linear scan") {
    for (std::uint64_t n = 0; n < 5000; ++n) {
        std::uint64_t p = n + 1;
        while (!trial_prime(p)) ++p;
        REQUIRE(next_prime(n) == p);
        REQUIRE(next_prime(from_u64(n)) == from_u64(p));
    }
}

TEST_CASE("sieves agree with trial division") {
    const auto small = primes_up_to(20000);
    std::vector<std::uint32_t> expect;
    for (std::uint32_t n = 0; n <= 20000; ++n)
        if (trial_prime(n)) expect.push_back(n);
    CHECK(small == expect);
    std::vector<std::uint64_t> seg;
    for_each_prime(20000, [&](std::uint64_t p) { seg.push_back(p); });
    CHECK(seg == std::vector<std::uint64_t>(expect.begin(), expect.end()));
}

TEST_CASE("multiplicative order agrees with repeated multiplication") {
    for (std::uint64_t n = 2; n < 200; ++n)
        for (std::uint64_t a = 1; a < n; ++a) {
            if (std::gcd(a, n) != 1) {
                CHECK_THROWS_AS(multiplicative_order(static_cast<std::int64_t>(a), n), Error);
                continue;
            }
            REQUIRE(multiplicative_order(static_cast<std::int64_t>(a), n) == brute_order(a, n));
        }
    CHECK(multiplicative_order(43, 17) == 8);
    CHECK(multiplicative_order(-1, 17) == 2);
}

TEST_CASE("quadratic residues agree with the set of squares") {
    for (std::uint64_t p : {7ull, 11ull, 13ull, 29ull, 43ull, 53ull, 101ull}) {
        std::vector<bool> square(p, false);
        for (std::uint64_t x = 1; x < p; ++x) square[x * x % p] = true;
        for (std::uint64_t a = 1; a < p; ++a) {
            REQUIRE(is_square_mod(static_cast<std::int64_t>(a), p) == square[a]);
            REQUIRE(is_square_mod(from_u64(a), from_u64(p)) == square[a]);
        }
    }
    CHECK(is_square_mod(43, 53));
    CHECK_FALSE(is_square_mod(43, 29));
}

TEST_CASE("character value order is n / gcd(n, e) in a cyclic group") {
    for (std::uint64_t n = 1; n < 60; ++n)
        for (std::int64_t e = -60; e < 60; ++e) {
            // order of e in Z/n
            std::uint64_t r = ((e % static_cast<std::int64_t>(n)) + n) % n, ord = 1, x = r;
            while (x % n != 0) x += r, ++ord;
            REQUIRE(char_value_order(n, e) == ord);
        }
}

TEST_CASE("nebentypus order data") {
    CHECK(nebentypus_order(79, 68) == NebentypusOrder{6, 13});
    CHECK(nebentypus_order(61, 50) == NebentypusOrder{12, 5});
    CHECK(nebentypus_order(53, 48) == NebentypusOrder{2, 26});
    CHECK(nebentypus_order(29, 28) == NebentypusOrder{2, 14});
    CHECK(nebentypus_order(17, 16) == NebentypusOrder{2, 8});
    CHECK(nebentypus_order(43, 38) == NebentypusOrder{6, 7});
    for (unsigned p : {17u, 19u, 23u, 47u})
        for (unsigned k = 4; k <= p; k += 2) {
            const auto n = nebentypus_order(p, k);
            CHECK(n.d == std::gcd(p - 1, k - 2));
            CHECK(n.d * n.m == p - 1);
        }
}

TEST_CASE("strip_prime_part and gcd") {
    CHECK(strip_prime_part(26, 13) == 2);
    CHECK(strip_prime_part(14, 7) == 2);
    CHECK(strip_prime_part(121, 11) == 1);
    CHECK(strip_prime_part(8, 11) == 8);
    CHECK(gcd(0, 7) == 7);
    CHECK(gcd(42, 24) == 6);
}

TEST_CASE("CRT agrees with brute force") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::uint64_t m1 = rng() % 30 + 2, m2 = rng() % 30 + 2, r1 = rng() % m1, r2 = rng() % m2;
        const std::vector<Congruence> sys{{from_u64(r1), from_u64(m1)}, {from_u64(r2), from_u64(m2)}};
        const auto got = crt(sys);
        std::optional<std::uint64_t> want;
        const std::uint64_t l = std::lcm(m1, m2);
        for (std::uint64_t x = 0; x < l; ++x)
            if (x % m1 == r1 && x % m2 == r2) {
                want = x;
                break;
            }
        REQUIRE(got.has_value() == want.has_value());
        if (want) {
            CHECK(got->residue == from_u64(*want));
            CHECK(got->modulus == from_u64(l));
        }
    }
}

TEST_CASE("prime search in a progression agrees with a scan") {
    for (std::uint64_t m : {8ull, 30ull, 73ull, 120ull})
        for (std::uint64_t r = 1; r < m; ++r) {
            if (std::gcd(r, m) != 1) {
                CHECK_THROWS_AS(find_prime_in_progression(from_u64(r), from_u64(m), 100, {}), Error);
                continue;
            }
            std::uint64_t x = r;
            while (x < 100 || !trial_prime(x)) x += m;
            REQUIRE(find_prime_in_progression(from_u64(r), from_u64(m), 100, {}) == from_u64(x));
        }
    try {
        find_prime_in_progression(1, 8, Integer(1) << 80, [](const Integer&) { return false; }, 50);
        FAIL("expected SearchBudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SearchBudgetExceeded);
    }
}

TEST_CASE("polynomial gcd over F_43 agrees with common-root enumeration on split polynomials") {
    std::mt19937_64 rng(11);
    const std::uint64_t p = 43;
    for (int trial = 0; trial < 300; ++trial) {
        auto random_split = [&](std::vector<std::uint64_t>& roots) {
            PolyModP f = PolyModP::constant(p, 1);
            const int deg = static_cast<int>(rng() % 6) + 1;
            for (int i = 0; i < deg; ++i) {
                const auto r = rng() % p;
                roots.push_back(r);
                f = f * PolyModP::x_minus(p, static_cast<std::int64_t>(r));
            }
            return f;
        };
        std::vector<std::uint64_t> ra, rb;
        const auto a = random_split(ra), b = random_split(rb);
        const auto g = poly_gcd_mod_p(a, b);
        // multiplicity-aware common roots
        std::sort(ra.begin(), ra.end());
        std::sort(rb.begin(), rb.end());
        std::vector<std::uint64_t> common;
        std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
        REQUIRE(g.degree() == static_cast<int>(common.size()));
        for (auto r : common) CHECK(g.eval(r) == 0);
    }
}

TEST_CASE("polynomial arithmetic identities") {
    const std::uint64_t p = 43;
    const std::vector<std::int64_t> ca{3, 0, 5, 1}, cb{-1, 2, 1};
    const PolyModP a(p, ca), b(p, cb);
    const auto q = a / b, r = a % b;
    CHECK(q * b + r == a);
    CHECK(r.degree() < b.degree());
    CHECK(poly_gcd_mod_p(a, PolyModP(p)) == a.monic());
    CHECK_THROWS_AS(poly_gcd_mod_p(PolyModP(p), PolyModP(p)), Error);
    CHECK_THROWS_AS(a + PolyModP(47), Error);
    CHECK(PolyModP::x_minus(p, 2).pow(8).eval(3) == 1);
}
