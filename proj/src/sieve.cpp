#include "chainforge/sieve.hpp"

#include <algorithm>
#include <cmath>

namespace chainforge::arith {

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        out.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
}

void for_each_prime(std::uint64_t limit, const std::function<void(std::uint64_t)>& visit) {
    if (limit < 2) return;
    visit(2);
    if (limit < 3) return;

    const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(limit))) + 1;
    const auto base = primes_up_to(root);

    // Segment index i represents the odd number low + 2i.
    constexpr std::uint64_t kSegment = 1u << 18;
    std::vector<char> seg(kSegment);
    std::vector<std::uint64_t> next;  // next odd multiple to cross, per base prime
    next.reserve(base.size());
    for (auto p : base) next.push_back(p < 3 ? 0 : std::uint64_t(p) * p);

    for (std::uint64_t low = 3; low <= limit; low += 2 * kSegment) {
        const std::uint64_t high = std::min(limit, low + 2 * kSegment - 1);
        std::fill(seg.begin(), seg.end(), 1);
        for (std::size_t i = 0; i < base.size(); ++i) {
            const std::uint64_t p = base[i];
            if (p < 3) continue;
            if (p * p > high) break;
            std::uint64_t j = next[i];
            for (; j <= high; j += 2 * p) seg[(j - low) / 2] = 0;
            next[i] = j;
        }
        for (std::uint64_t n = low; n <= high; n += 2)
            if (seg[(n - low) / 2]) visit(n);
    }
}

}  // namespace chainforge::arith
