#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace chainforge::arith {

/// All primes <= limit (simple sieve, fine up to a few million).
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

/// Segmented odd-only sieve of Eratosthenes; calls `visit` with every prime
/// <= limit in increasing order.
void for_each_prime(std::uint64_t limit, const std::function<void(std::uint64_t)>& visit);

}  // namespace chainforge::arith
