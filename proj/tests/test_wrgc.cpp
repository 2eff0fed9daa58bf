#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "chainforge/error.hpp"
#include "chainforge/sieve.hpp"
#include "chainforge/wrgc.hpp"

using namespace chainforge;
using namespace chainforge::wrgc;
using arith::from_u64;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::UsageError;
}

}  // namespace

TEST_CASE("canonical exponent agrees with a scan above m/2") {
    for (unsigned m : {1u, 2u, 3u, 4u, 6u}) CHECK(kind_of([&] { canonical_t(m); }) == ErrorKind::UnsupportedOrder);
    for (std::uint64_t m = 5; m < 3000; ++m) {
        if (m == 6) continue;
        std::uint64_t t = m / 2 + 1;
        while (std::gcd(t, m) != 1) ++t;
        REQUIRE(canonical_t(from_u64(m)) == from_u64(t));
    }
}

TEST_CASE("escape exponent agrees with a scan") {
    CHECK(kind_of([] { escape_t_prime(8); }) == ErrorKind::UnsupportedOrder);
    CHECK(kind_of([] { escape_t_prime(5); }) == ErrorKind::UnsupportedOrder);
    for (std::uint64_t m = 7; m < 3000; m += 2) {
        std::uint64_t t = (m + 1) / 2 + 1;
        while (std::gcd(t, m) != 1) ++t;
        REQUIRE(t < m - 1);
        REQUIRE(escape_t_prime(from_u64(m)) == from_u64(t));
    }
    CHECK(escape_t_prime(23) == 13);
    CHECK(escape_t_prime(15) == 11);
    CHECK(escape_t_prime(11) == 7);
    CHECK(escape_t_prime(9) == 7);
}

TEST_CASE("smallest odd prime not dividing m") {
    CHECK(smallest_odd_nondivisor_prime(9) == 5);
    CHECK(smallest_odd_nondivisor_prime(15) == 7);
    CHECK(smallest_odd_nondivisor_prime(105) == 11);
    CHECK(smallest_odd_nondivisor_prime(7) == 3);
}

TEST_CASE("Serre weights from an exponent") {
    const auto w = serre_weights_from_exponent(79, 48);
    CHECK(w.k1 == 50);
    CHECK(w.k2 == 32);
    CHECK(kind_of([] { serre_weights_from_exponent(79, 0); }) == ErrorKind::ExponentOutOfRange);
    CHECK(kind_of([] { serre_weights_from_exponent(79, 78); }) == ErrorKind::ExponentOutOfRange);
}

TEST_CASE("prime choice rules") {
    CHECK(choose_prime_step2(32) == 43);
    CHECK(choose_prime_step2(30) == 31);
    CHECK(choose_prime_step6(32) == 47);
    CHECK(choose_prime_step6(42) == 47);  // 43 is never used here
    CHECK(choose_prime_step6(40) == 41);
    CHECK(kind_of([] { choose_prime_step2(14); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([] { choose_prime_step6(33); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("reference tables are reproduced") {
    for (const auto* rows : {&step2_reference_rows(), &step6_reference_rows()}) {
        const Mode mode = rows == &step2_reference_rows() ? Mode::Step2 : Mode::Step6;
        for (const auto& r : *rows) {
            CAPTURE(r.k);
            const auto s = wrgc_step(Integer(r.k), mode);
            CHECK(s.p == r.p);
            CHECK(s.d == r.d);
            CHECK(s.m == r.m);
            CHECK(s.exponent_used == r.t);
            CHECK((s.exponent_kind == ExponentKind::Escape) == r.escape);
            CHECK(s.k1 == r.k1);
            CHECK(s.k2 == r.k2);
        }
    }
    CHECK(step2_reference_rows().size() == 4);
    CHECK(step6_reference_rows().size() == 12);
    // the escape rows of the second table
    std::vector<unsigned> esc;
    for (const auto& r : step6_reference_rows())
        if (r.escape) esc.push_back(r.k);
    CHECK(esc == std::vector<unsigned>{42, 32, 30, 22, 20, 18});
    // canonical steps that land on a bad-dihedral outcome in the first table
    CHECK_FALSE(wrgc_step(18, Mode::Step2).bad_dihedral_safe);
    CHECK_FALSE(wrgc_step(30, Mode::Step2).bad_dihedral_safe);
    CHECK(wrgc_step(16, Mode::Step2).bad_dihedral_safe);
}

TEST_CASE("scripted explicit reductions") {
    const auto a = make_step(68, 79, 8, ExponentKind::Explicit);
    CHECK(a.d == 6);
    CHECK(a.m == 13);
    CHECK(a.k1 == 50);
    CHECK(a.k2 == 32);
    const auto b = make_step(50, 61, 3, ExponentKind::Explicit);
    CHECK(b.d == 12);
    CHECK(b.m == 5);
    CHECK(b.k1 == 38);
    CHECK(b.k2 == 26);
}

TEST_CASE("make_step rejects bad exponents") {
    CHECK(kind_of([] { make_step(16, 17, 4, ExponentKind::Explicit); }) == ErrorKind::NotCoprime);
    CHECK(kind_of([] { make_step(16, 17, 7, ExponentKind::Explicit); }) == ErrorKind::NonDecreasingWeight);
}

TEST_CASE("every step strictly decreases and keeps k1 + k2 = p + 3") {
    for (unsigned k = 16; k <= 20000; k += 2)
        for (Mode mode : {Mode::Step2, Mode::Step6}) {
            const auto s = wrgc_step(Integer(k), mode);
            REQUIRE(s.k1 < k);
            REQUIRE(s.k2 < k);
            REQUIRE(s.k1 + s.k2 == s.p + 3);
            REQUIRE(s.k1 > s.k2);
            if (mode == Mode::Step6) REQUIRE(s.bad_dihedral_safe);
        }
}

TEST_CASE("escape test agrees with the d = 2, m odd characterization") {
    for (unsigned k = 16; k <= 100000; k += 2) {
        const Integer kk(k);
        const Integer p = choose_prime_step6(kk);
        const auto neb = arith::nebentypus_order(p, kk);
        const bool predicted = neb.d == 2 && mpz_odd_p(neb.m.get_mpz_t());
        REQUIRE(canonical_hits_bad_dihedral(kk, p) == predicted);
    }
}

TEST_CASE("outcome trees terminate on every branch") {
    for (unsigned k = 16; k <= 3000; k += 2)
        for (Mode mode : {Mode::Step2, Mode::Step6}) {
            const auto tree = wrgc_tree(Integer(k), mode);
            for (const auto& l : tree.leaves) REQUIRE(l <= 14);
            for (const auto& [w, s] : tree.nodes) REQUIRE(w > 14);
            const auto path = wrgc_reduce(Integer(k), mode);
            REQUIRE_FALSE(path.empty());
            REQUIRE(path.front().k_in == k);
            for (std::size_t i = 1; i < path.size(); ++i)
                REQUIRE((path[i].k_in == path[i - 1].k1 || path[i].k_in == path[i - 1].k2));
            REQUIRE(path.size() >= tree.k1_path().size());
        }
    CHECK(wrgc_reduce(14, Mode::Step2).empty());
}

TEST_CASE("a weight of about 100 bits reduces in the escape mode") {
    const Integer k = (Integer(1) << 100) + 2 * 12345;
    const auto tree = wrgc_tree(k, Mode::Step6);
    CHECK_FALSE(tree.leaves.empty());
    for (const auto& l : tree.leaves) CHECK(l <= 14);
    for (const auto& [w, s] : tree.nodes) CHECK(s.bad_dihedral_safe);
}

TEST_CASE("Bertrand ratio agrees with a direct scan") {
    const auto primes = arith::primes_up_to(1000000);
    std::uint64_t lo = 0, hi = 0;
    for (std::size_t i = 0; i + 1 < primes.size(); ++i)
        if (primes[i] >= 37 && (lo == 0 || static_cast<double>(primes[i + 1]) / primes[i] > static_cast<double>(hi) / lo))
            lo = primes[i], hi = primes[i + 1];
    const auto r = verify_bertrand_ratio(1000000);
    CHECK(r.lower == lo);
    CHECK(r.upper == hi);
    CHECK(r.lower == 47);
    CHECK(r.upper == 53);
    CHECK(r.below_constant);
    CHECK(r.primes_scanned == primes.size());
}

TEST_CASE("Bertrand consequence agrees with a direct scan") {
    const auto c = verify_bertrand_consequence(20000);
    bool holds = true;
    double worst = 0;
    std::uint64_t wk = 0;
    for (std::uint64_t k = 38; k <= 20000; k += 2) {
        const auto p = arith::next_prime(k);
        const double r = static_cast<double>(p - 1) / static_cast<double>(k - 2);
        if (5 * (p - 1) >= 6 * (k - 2)) holds = false;
        if (r > worst) worst = r, wk = k;
    }
    CHECK(c.holds == holds);
    CHECK(c.worst_k == wk);
    CHECK(c.worst_k == 48);
    CHECK(c.worst_p == 53);
}

TEST_CASE("escape exponent bounds agree with a direct check") {
    const auto r = verify_highschool(20001);
    bool holds = true;
    for (std::uint64_t m = 7; m <= 20001; m += 2) {
        const auto pp = smallest_odd_nondivisor_prime(from_u64(m));
        const auto t = escape_t_prime(from_u64(m));
        if (!(5 * pp < 3 * m) || !(2 * t == m + pp) || !(t * 5 < 4 * m)) holds = false;
    }
    CHECK(r.holds == holds);
    CHECK(r.holds);
    CHECK_FALSE(r.first_failure.has_value());
}
