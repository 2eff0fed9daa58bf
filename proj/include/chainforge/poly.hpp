#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chainforge/arith.hpp"

namespace chainforge::arith {

/// Dense polynomial over F_p, lowest degree first. The zero polynomial has an
/// empty coefficient vector and reports is_zero(); degree() is -1 there.
class PolyModP {
public:
    explicit PolyModP(std::uint64_t modulus);
    PolyModP(std::uint64_t modulus, std::span<const std::int64_t> coeffs);

    static PolyModP from_integers(std::uint64_t modulus, std::span<const Integer> coeffs);
    static PolyModP constant(std::uint64_t modulus, std::int64_t c);
    static PolyModP x_minus(std::uint64_t modulus, std::int64_t root);  // x - root

    std::uint64_t modulus() const noexcept { return modulus_; }
    const std::vector<std::uint64_t>& coeffs() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::uint64_t leading() const;

    std::uint64_t eval(std::uint64_t x) const;
    PolyModP monic() const;
    PolyModP pow(unsigned e) const;

    PolyModP operator+(const PolyModP& rhs) const;
    PolyModP operator-(const PolyModP& rhs) const;
    PolyModP operator*(const PolyModP& rhs) const;
    PolyModP operator%(const PolyModP& rhs) const;
    PolyModP operator/(const PolyModP& rhs) const;

    bool operator==(const PolyModP&) const = default;

    /// Roots in F_p by exhaustive evaluation; only sensible for small p.
    std::vector<std::uint64_t> roots() const;

    std::string to_string() const;

private:
    void normalize();
    void require_same_modulus(const PolyModP& rhs) const;
    std::pair<PolyModP, PolyModP> divmod(const PolyModP& rhs) const;

    std::uint64_t modulus_;
    std::vector<std::uint64_t> coeffs_;
};

/// Monic gcd over F_p. gcd(f, 0) = monic(f). Throws ModulusMismatch, and
/// ParameterInconsistency when both inputs are zero.
PolyModP poly_gcd_mod_p(const PolyModP& f, const PolyModP& g);

}  // namespace chainforge::arith
