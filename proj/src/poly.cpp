#include "chainforge/poly.hpp"

#include <algorithm>

#include "chainforge/error.hpp"

namespace chainforge::arith {

namespace {

using u64 = std::uint64_t;

u64 reduce_signed(std::int64_t c, u64 p) {
    const auto sp = static_cast<std::int64_t>(p);
    return static_cast<u64>(((c % sp) + sp) % sp);
}

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m); }

u64 inverse(u64 a, u64 p) {
    // p is prime, Fermat.
    u64 result = 1, base = a % p, e = p - 2;
    while (e) {
        if (e & 1) result = mulmod(result, base, p);
        base = mulmod(base, base, p);
        e >>= 1;
    }
    return result;
}

}  // namespace

PolyModP::PolyModP(std::uint64_t modulus) : modulus_(modulus) {
    if (!is_prime(modulus)) throw Error(ErrorKind::ParameterInconsistency, "polynomial modulus must be prime");
}

PolyModP::PolyModP(std::uint64_t modulus, std::span<const std::int64_t> coeffs) : PolyModP(modulus) {
    coeffs_.reserve(coeffs.size());
    for (auto c : coeffs) coeffs_.push_back(reduce_signed(c, modulus));
    normalize();
}

PolyModP PolyModP::from_integers(std::uint64_t modulus, std::span<const Integer> coeffs) {
    PolyModP out(modulus);
    const Integer m = from_u64(modulus);
    for (const auto& c : coeffs) {
        Integer r = c % m;
        if (r < 0) r += m;
        out.coeffs_.push_back(to_u64(r));
    }
    out.normalize();
    return out;
}

PolyModP PolyModP::constant(std::uint64_t modulus, std::int64_t c) {
    const std::int64_t one[] = {c};
    return PolyModP(modulus, one);
}

PolyModP PolyModP::x_minus(std::uint64_t modulus, std::int64_t root) {
    const std::int64_t lin[] = {-root, 1};
    return PolyModP(modulus, lin);
}

void PolyModP::normalize() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

void PolyModP::require_same_modulus(const PolyModP& rhs) const {
    if (modulus_ != rhs.modulus_)
        throw Error(ErrorKind::ModulusMismatch,
                    std::to_string(modulus_) + " vs " + std::to_string(rhs.modulus_));
}

std::uint64_t PolyModP::leading() const { return is_zero() ? 0 : coeffs_.back(); }

std::uint64_t PolyModP::eval(std::uint64_t x) const {
    u64 acc = 0;
    x %= modulus_;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = (mulmod(acc, x, modulus_) + *it) % modulus_;
    return acc;
}

PolyModP PolyModP::monic() const {
    if (is_zero()) return *this;
    PolyModP out = *this;
    const u64 inv = inverse(leading(), modulus_);
    for (auto& c : out.coeffs_) c = mulmod(c, inv, modulus_);
    return out;
}

PolyModP PolyModP::pow(unsigned e) const {
    PolyModP result = constant(modulus_, 1);
    PolyModP base = *this;
    while (e) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

PolyModP PolyModP::operator+(const PolyModP& rhs) const {
    require_same_modulus(rhs);
    PolyModP out(*this);
    out.coeffs_.resize(std::max(coeffs_.size(), rhs.coeffs_.size()), 0);
    for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) out.coeffs_[i] = (out.coeffs_[i] + rhs.coeffs_[i]) % modulus_;
    out.normalize();
    return out;
}

PolyModP PolyModP::operator-(const PolyModP& rhs) const {
    require_same_modulus(rhs);
    PolyModP out(*this);
    out.coeffs_.resize(std::max(coeffs_.size(), rhs.coeffs_.size()), 0);
    for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i)
        out.coeffs_[i] = (out.coeffs_[i] + modulus_ - rhs.coeffs_[i]) % modulus_;
    out.normalize();
    return out;
}

PolyModP PolyModP::operator*(const PolyModP& rhs) const {
    require_same_modulus(rhs);
    PolyModP out(modulus_);
    if (is_zero() || rhs.is_zero()) return out;
    out.coeffs_.assign(coeffs_.size() + rhs.coeffs_.size() - 1, 0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j)
            out.coeffs_[i + j] = (out.coeffs_[i + j] + mulmod(coeffs_[i], rhs.coeffs_[j], modulus_)) % modulus_;
    out.normalize();
    return out;
}

std::pair<PolyModP, PolyModP> PolyModP::divmod(const PolyModP& rhs) const {
    require_same_modulus(rhs);
    if (rhs.is_zero()) throw Error(ErrorKind::ParameterInconsistency, "polynomial division by zero");
    PolyModP rem = *this;
    PolyModP quot(modulus_);
    if (degree() < rhs.degree()) return {quot, rem};
    quot.coeffs_.assign(static_cast<std::size_t>(degree() - rhs.degree() + 1), 0);
    const u64 inv = inverse(rhs.leading(), modulus_);
    while (!rem.is_zero() && rem.degree() >= rhs.degree()) {
        const auto shift = static_cast<std::size_t>(rem.degree() - rhs.degree());
        const u64 factor = mulmod(rem.leading(), inv, modulus_);
        quot.coeffs_[shift] = factor;
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) {
            u64& slot = rem.coeffs_[shift + j];
            slot = (slot + modulus_ - mulmod(factor, rhs.coeffs_[j], modulus_)) % modulus_;
        }
        rem.normalize();
    }
    quot.normalize();
    return {quot, rem};
}

PolyModP PolyModP::operator%(const PolyModP& rhs) const { return divmod(rhs).second; }
PolyModP PolyModP::operator/(const PolyModP& rhs) const { return divmod(rhs).first; }

std::vector<std::uint64_t> PolyModP::roots() const {
    std::vector<u64> out;
    if (is_zero()) return out;
    for (u64 x = 0; x < modulus_; ++x)
        if (eval(x) == 0) out.push_back(x);
    return out;
}

std::string PolyModP::to_string() const {
    if (is_zero()) return "0";
    std::string s;
    for (int i = degree(); i >= 0; --i) {
        const u64 c = coeffs_[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        if (!s.empty()) s += " + ";
        if (i == 0 || c != 1) s += std::to_string(c);
        if (i >= 1) s += c != 1 ? "*x" : "x";
        if (i > 1) s += "^" + std::to_string(i);
    }
    return s + " (mod " + std::to_string(modulus_) + ")";
}

PolyModP poly_gcd_mod_p(const PolyModP& f, const PolyModP& g) {
    if (f.modulus() != g.modulus())
        throw Error(ErrorKind::ModulusMismatch,
                    std::to_string(f.modulus()) + " vs " + std::to_string(g.modulus()));
    if (f.is_zero() && g.is_zero()) throw Error(ErrorKind::ParameterInconsistency, "gcd of two zero polynomials");
    PolyModP a = f, b = g;
    while (!b.is_zero()) {
        PolyModP r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

}  // namespace chainforge::arith
