#include "chainforge/wrgc.hpp"

#include <algorithm>
#include <numeric>

#include "chainforge/error.hpp"
#include "chainforge/sieve.hpp"

namespace chainforge::wrgc {

namespace {

Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

bool is_even(const Integer& n) { return mpz_even_p(n.get_mpz_t()) != 0; }

void require_even_above_14(const Integer& k, const char* who) {
    if (k <= 14 || !is_even(k))
        throw Error(ErrorKind::PreconditionFailed, std::string(who) + " needs an even weight > 14, got " + k.get_str());
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Step2 ? "step2" : "step6"; }

std::string_view to_string(ExponentKind kind) {
    switch (kind) {
    case ExponentKind::Canonical: return "canonical";
    case ExponentKind::Escape: return "escape";
    case ExponentKind::Explicit: return "explicit";
    }
    return "?";
}

Integer canonical_t(const Integer& m) {
    if (m < 5 || m == 6)
        throw Error(ErrorKind::UnsupportedOrder, "phi(m) <= 2 for m = " + m.get_str());
    Integer t = m / 2 + 1;
    while (gcd(t, m) != 1) ++t;
    return t;
}

Integer escape_t_prime(const Integer& m) {
    if (m < 7 || is_even(m)) throw Error(ErrorKind::UnsupportedOrder, "escape exponent needs odd m >= 7, got " + m.get_str());
    const Integer t = (m + 1) / 2;
    for (Integer c = t + 1; c < m - 1; ++c)
        if (gcd(c, m) == 1) return c;
    throw Error(ErrorKind::UnsupportedOrder, "no escape exponent below m-1 for m = " + m.get_str());
}

std::uint64_t smallest_odd_nondivisor_prime(const Integer& m) {
    if (m < 7 || is_even(m))
        throw Error(ErrorKind::PreconditionFailed, "smallest_odd_nondivisor_prime needs odd m >= 7");
    for (std::uint64_t p = 3;; p = arith::next_prime(p))
        if (!mpz_divisible_ui_p(m.get_mpz_t(), p)) return p;
}

SerreWeights serre_weights_from_exponent(const Integer& p, const Integer& e) {
    if (e <= 0 || e >= p - 1)
        throw Error(ErrorKind::ExponentOutOfRange, "need 0 < e < p-1, got e = " + e.get_str() + ", p = " + p.get_str());
    return {e + 2, p + 1 - e};
}

Integer choose_prime_step2(const Integer& k) {
    require_even_above_14(k, "choose_prime_step2");
    if (k == 32) return 43;
    return arith::next_prime(k);
}

Integer choose_prime_step6(const Integer& k) {
    require_even_above_14(k, "choose_prime_step6");
    // 37 gives m = 6 at k = 32, and 43 would destroy the MGD prime.
    if (k == 32) return 47;
    Integer p = arith::next_prime(k);
    while (p == 43) p = arith::next_prime(p);
    return p;
}

WrgcStep make_step(const Integer& k, const Integer& p, const Integer& t, ExponentKind kind) {
    const auto neb = arith::nebentypus_order(p, k);
    if (gcd(t, neb.m) != 1)
        throw Error(ErrorKind::NotCoprime, "conjugation exponent " + t.get_str() + " not coprime to m = " + neb.m.get_str());

    WrgcStep s;
    s.k_in = k;
    s.p = p;
    s.d = neb.d;
    s.m = neb.m;
    s.exponent_used = t;
    s.exponent_kind = kind;
    const auto w = serre_weights_from_exponent(p, neb.d * t);
    s.k1 = w.k1;
    s.k2 = w.k2;
    s.bad_dihedral_safe = p != 2 * s.k1 - 1 && p != 2 * s.k2 - 1;

    const std::string where = " at k = " + k.get_str() + ", p = " + p.get_str();
    if (s.k1 >= k || s.k2 >= k)
        throw Error(ErrorKind::NonDecreasingWeight,
                    "weights " + s.k1.get_str() + ", " + s.k2.get_str() + " not below" + where);
    if (s.k1 + s.k2 != p + 3 || s.k1 <= s.k2 || !is_even(s.k1) || !is_even(s.k2) || s.k2 <= 2)
        throw Error(ErrorKind::InvariantViolation,
                    "step invariants fail (" + s.k1.get_str() + ", " + s.k2.get_str() + ")" + where);
    return s;
}

bool canonical_hits_bad_dihedral(const Integer& k, const Integer& p) {
    const auto neb = arith::nebentypus_order(p, k);
    const Integer t = canonical_t(neb.m);
    const Integer k2 = p + 1 - neb.d * t;
    return p == 2 * k2 - 1;
}

WrgcStep wrgc_step(const Integer& k, Mode mode) {
    if (mode == Mode::Step2) {
        const Integer p = choose_prime_step2(k);
        return make_step(k, p, canonical_t(arith::nebentypus_order(p, k).m), ExponentKind::Canonical);
    }
    const Integer p = choose_prime_step6(k);
    const auto neb = arith::nebentypus_order(p, k);
    if (canonical_hits_bad_dihedral(k, p)) return make_step(k, p, escape_t_prime(neb.m), ExponentKind::Escape);
    return make_step(k, p, canonical_t(neb.m), ExponentKind::Canonical);
}

WrgcTree wrgc_tree(const Integer& k0, const StepRule& rule) {
    if (k0 <= 2 || !is_even(k0)) throw Error(ErrorKind::PreconditionFailed, "wrgc needs an even weight > 2");
    WrgcTree tree;
    tree.root = k0;
    std::vector<Integer> pending{k0};
    while (!pending.empty()) {
        Integer k = std::move(pending.back());
        pending.pop_back();
        if (k <= 14) {
            tree.leaves.insert(k);
            continue;
        }
        if (tree.nodes.contains(k)) continue;
        WrgcStep s = rule(k);
        if (s.k_in != k) throw Error(ErrorKind::InvariantViolation, "step rule returned a step for another weight");
        pending.push_back(s.k1);
        pending.push_back(s.k2);
        tree.nodes.emplace(k, std::move(s));
    }
    return tree;
}

WrgcTree wrgc_tree(const Integer& k0, Mode mode) {
    return wrgc_tree(k0, [mode](const Integer& k) { return wrgc_step(k, mode); });
}

std::vector<WrgcStep> WrgcTree::k1_path() const {
    std::vector<WrgcStep> out;
    Integer k = root;
    while (k > 14) {
        const auto& s = nodes.at(k);
        out.push_back(s);
        k = s.k1;
    }
    return out;
}

std::vector<WrgcStep> WrgcTree::longest_path() const {
    // Weights strictly decrease along edges, so walking nodes in increasing
    // weight order is a topological order.
    std::map<Integer, std::size_t> depth;
    for (const auto& [k, s] : nodes) {
        auto d_of = [&](const Integer& w) -> std::size_t { return w <= 14 ? 0 : depth.at(w); };
        depth[k] = 1 + std::max(d_of(s.k1), d_of(s.k2));
    }
    std::vector<WrgcStep> out;
    Integer k = root;
    while (k > 14) {
        const auto& s = nodes.at(k);
        out.push_back(s);
        const std::size_t d1 = s.k1 <= 14 ? 0 : depth.at(s.k1);
        const std::size_t d2 = s.k2 <= 14 ? 0 : depth.at(s.k2);
        k = d1 >= d2 ? s.k1 : s.k2;
    }
    return out;
}

std::vector<WrgcStep> wrgc_reduce(const Integer& k0, Mode mode) {
    if (k0 <= 14) return {};
    return wrgc_tree(k0, mode).longest_path();
}

BertrandResult verify_bertrand_ratio(std::uint64_t max_prime) {
    BertrandResult r;
    std::uint64_t prev = 0;
    arith::for_each_prime(max_prime, [&](std::uint64_t p) {
        ++r.primes_scanned;
        if (prev >= 37) {
            // p/prev > upper/lower  <=>  p*lower > upper*prev
            using u128 = unsigned __int128;
            if (r.lower == 0 || static_cast<u128>(p) * r.lower > static_cast<u128>(r.upper) * prev) {
                r.lower = prev;
                r.upper = p;
            }
        }
        prev = p;
    });
    if (r.lower != 0) {
        r.ratio = static_cast<double>(r.upper) / static_cast<double>(r.lower);
        r.below_constant = static_cast<unsigned __int128>(r.upper) * 1000 < static_cast<unsigned __int128>(r.lower) * 1144;
    }
    return r;
}

BertrandConsequence verify_bertrand_consequence(std::uint64_t max_k) {
    BertrandConsequence out;
    out.holds = true;
    const auto primes = arith::primes_up_to(static_cast<std::uint32_t>(2 * max_k + 100));
    std::size_t idx = 0;
    for (std::uint64_t k = 38; k <= max_k; k += 2) {
        while (primes[idx] <= k) ++idx;
        const std::uint64_t p = primes[idx];
        ++out.checked;
        // (p-1)/(k-2) > worst ratio so far
        if (out.worst_k == 0 || (p - 1) * (out.worst_k - 2) > (out.worst_p - 1) * (k - 2)) {
            out.worst_k = k;
            out.worst_p = p;
        }
        if (5 * (p - 1) >= 6 * (k - 2)) out.holds = false;
    }
    return out;
}

HighschoolResult verify_highschool(std::uint64_t max_m) {
    HighschoolResult out;
    out.holds = true;
    const auto primes = arith::primes_up_to(1000);
    for (std::uint64_t m = 7; m <= max_m; m += 2) {
        ++out.checked;
        std::uint64_t pp = 0;
        for (auto q : primes) {
            if (q == 2) continue;
            if (m % q != 0) {
                pp = q;
                break;
            }
        }
        std::uint64_t t = (m + 1) / 2 + 1;
        while (std::gcd(t, m) != 1) ++t;
        const bool ok = pp != 0 && 5 * pp < 3 * m && t < m - 1 && 2 * t == m + pp && 5 * t < 4 * m;
        if (!ok) {
            out.holds = false;
            if (!out.first_failure) out.first_failure = m;
        }
    }
    return out;
}

const std::vector<TableRow>& step2_reference_rows() {
    static const std::vector<TableRow> rows{
        {16, 17, 2, 8, 5, false, 12, 8},
        {18, 19, 2, 9, 5, false, 12, 10},
        {30, 31, 2, 15, 8, false, 18, 16},
        {32, 43, 6, 7, 4, false, 26, 20},
    };
    return rows;
}

const std::vector<TableRow>& step6_reference_rows() {
    static const std::vector<TableRow> rows{
        {42, 47, 2, 23, 13, true, 28, 22},
        {32, 47, 2, 23, 13, true, 28, 22},
        {36, 37, 2, 18, 11, false, 24, 16},
        {34, 37, 4, 9, 5, false, 22, 18},
        {30, 31, 2, 15, 11, true, 24, 10},
        {28, 29, 2, 14, 9, false, 20, 12},
        {26, 29, 4, 7, 4, false, 18, 14},
        {24, 29, 2, 14, 9, false, 20, 12},
        {22, 23, 2, 11, 7, true, 16, 10},
        {20, 23, 2, 11, 7, true, 16, 10},
        {18, 19, 2, 9, 7, true, 16, 6},
        {16, 17, 2, 8, 5, false, 12, 8},
    };
    return rows;
}

}  // namespace chainforge::wrgc
