#include "chainforge/repmodel.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "chainforge/error.hpp"

namespace chainforge {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
    for (const auto& [e, name] : table)
        if (name == s) return e;
    return std::nullopt;
}

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
    for (const auto& [v, name] : table)
        if (v == e) return name;
    return "?";
}

constexpr std::array<std::pair<LocalKind, std::string_view>, 5> kLocalKinds{{
    {LocalKind::Unramified, "unramified"},
    {LocalKind::PrincipalSeries, "principal_series"},
    {LocalKind::Steinberg, "steinberg"},
    {LocalKind::Supercuspidal, "supercuspidal"},
    {LocalKind::UnramifiedOrUnipotent, "unramified_or_unipotent"},
}};

constexpr std::array<std::pair<ImageLevel, std::string_view>, 4> kImageLevels{{
    {ImageLevel::SixExtraLarge, "six_extra_large"},
    {ImageLevel::Large, "large"},
    {ImageLevel::AdequateDihedral, "adequate_dihedral"},
    {ImageLevel::Irreducible, "irreducible"},
}};

constexpr std::array<std::pair<EvidenceKind, std::string_view>, 8> kEvidenceKinds{{
    {EvidenceKind::GoodDihedralWitness, "good_dihedral_witness"},
    {EvidenceKind::MgdOddRamification, "mgd_odd_ramification"},
    {EvidenceKind::RibetExclusion, "ribet_exclusion"},
    {EvidenceKind::WinterExclusion, "winter_exclusion"},
    {EvidenceKind::SplitPrimeContradiction, "split_prime_contradiction"},
    {EvidenceKind::ElementOrder, "element_order"},
    {EvidenceKind::ExplicitArithmetic, "explicit_arithmetic"},
    {EvidenceKind::ExternalCertificate, "external_certificate"},
}};

constexpr std::array<std::pair<LocalCondition, std::string_view>, 2> kConditions{{
    {LocalCondition::BothPotentiallyDiagonalizable, "both_potentially_diagonalizable"},
    {LocalCondition::BothOrdinary, "both_ordinary"},
}};

}  // namespace

std::string_view to_string(LocalKind kind) { return name_of(kLocalKinds, kind); }
std::optional<LocalKind> local_kind_from_string(std::string_view s) { return lookup(kLocalKinds, s); }
std::string_view to_string(ImageLevel level) { return name_of(kImageLevels, level); }
std::optional<ImageLevel> image_level_from_string(std::string_view s) { return lookup(kImageLevels, s); }
std::string_view to_string(EvidenceKind kind) { return name_of(kEvidenceKinds, kind); }
std::optional<EvidenceKind> evidence_kind_from_string(std::string_view s) { return lookup(kEvidenceKinds, s); }
std::string_view to_string(LocalCondition c) { return name_of(kConditions, c); }
std::optional<LocalCondition> local_condition_from_string(std::string_view s) { return lookup(kConditions, s); }

std::vector<std::string> ReprState::invariant_failures() const {
    std::vector<std::string> out;
    if (weight < 1) out.push_back("weight must be >= 1");
    for (const auto& [prime, lt] : level) {
        if (lt.has_order() && lt.order < 2)
            out.push_back("character order at " + prime.get_str() + " must be >= 2");
        if (!lt.has_order() && lt.order != 0)
            out.push_back("local type at " + prime.get_str() + " carries a stray order");
    }
    for (const auto& [prime, order] : nebentypus) {
        if (!level.contains(prime)) out.push_back("nebentypus prime " + prime.get_str() + " missing from level");
        if (order < 2) out.push_back("nebentypus order at " + prime.get_str() + " must be >= 2");
    }
    if (good_dihedral) {
        const auto* lt = local_at(good_dihedral->q);
        if (!lt || *lt != LocalType::supercuspidal(good_dihedral->t))
            out.push_back("good-dihedral prime " + good_dihedral->q.get_str() + " is not supercuspidal of order t");
    }
    if (mgd) {
        const auto* lt = local_at(arith::from_u64(mgd->p));
        if (!lt || *lt != LocalType::supercuspidal(arith::from_u64(mgd->ram_order)))
            out.push_back("MGD prime " + std::to_string(mgd->p) + " is not supercuspidal of its ramification order");
        if (mgd->ram_order % 2 == 0) out.push_back("MGD ramification order must be odd");
    }
    if (is_residual() && serre_alternatives.empty()) out.push_back("residual state without Serre weights");
    if (!is_residual() && !serre_alternatives.empty()) out.push_back("Serre weights on a non-residual state");
    return out;
}

void ReprState::check() const {
    const auto failures = invariant_failures();
    if (failures.empty()) return;
    std::string msg = "state invariants violated:";
    for (const auto& f : failures) msg += " " + f + ";";
    throw Error(ErrorKind::InvariantViolation, msg);
}

const LocalType* ReprState::local_at(const Integer& prime) const {
    const auto it = level.find(prime);
    return it == level.end() ? nullptr : &it->second;
}

std::string ReprState::describe() const {
    std::string s = "weight " + weight.get_str() + ", level ";
    if (level.empty()) s += "1";
    bool first = true;
    for (const auto& [prime, lt] : level) {
        if (!first) s += "*";
        first = false;
        s += prime.get_str() + "[" + std::string(to_string(lt.kind));
        if (lt.has_order()) s += " " + lt.order.get_str();
        s += "]";
    }
    return s;
}

bool same_form(const ReprState& a, const ReprState& b) {
    return a.weight == b.weight && a.level == b.level && a.nebentypus == b.nebentypus &&
           a.good_dihedral == b.good_dihedral && a.mgd == b.mgd;
}

bool same_signature(const ReprState& a, const ReprState& b) {
    return a.weight == b.weight && a.level == b.level && a.nebentypus == b.nebentypus;
}

std::string EvidenceItem::describe() const {
    std::string s(to_string(kind));
    if (!label.empty()) s += " " + label;
    if (!args.empty()) {
        s += " (";
        for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i].get_str();
        s += ")";
    }
    return s;
}

EvidenceItem EvidenceItem::good_dihedral(Integer q, Integer t) {
    return {EvidenceKind::GoodDihedralWitness, {std::move(q), std::move(t)}, {}};
}
EvidenceItem EvidenceItem::mgd_odd(Integer p, Integer order) {
    return {EvidenceKind::MgdOddRamification, {std::move(p), std::move(order)}, {}};
}
EvidenceItem EvidenceItem::ribet(Integer p, Integer k) { return {EvidenceKind::RibetExclusion, {std::move(p), std::move(k)}, {}}; }
EvidenceItem EvidenceItem::winter(Integer p, Integer k) { return {EvidenceKind::WinterExclusion, {std::move(p), std::move(k)}, {}}; }
EvidenceItem EvidenceItem::split_prime(std::vector<Integer> disc_primes, Integer split) {
    disc_primes.push_back(std::move(split));
    return {EvidenceKind::SplitPrimeContradiction, std::move(disc_primes), {}};
}
EvidenceItem EvidenceItem::element_order(Integer n) { return {EvidenceKind::ElementOrder, {std::move(n)}, {}}; }
EvidenceItem EvidenceItem::explicit_arithmetic(std::string lemma_id, std::vector<Integer> inputs) {
    return {EvidenceKind::ExplicitArithmetic, std::move(inputs), std::move(lemma_id)};
}
EvidenceItem EvidenceItem::external(std::string label) { return {EvidenceKind::ExternalCertificate, {}, std::move(label)}; }

ChainLink reverse_link(const ChainLink& link) {
    ChainLink r = link;
    std::swap(r.from, r.to);
    r.reversed = !link.reversed;
    return r;
}

Transcript concat(const Transcript& a, const Transcript& b) {
    if (!same_signature(a.end, b.end))
        throw Error(ErrorKind::EndpointMismatch,
                    "terminal states differ: " + a.end.describe() + " vs " + b.end.describe());
    Transcript out;
    out.start = a.start;
    out.end = b.start;
    out.links = a.links;
    for (auto it = b.links.rbegin(); it != b.links.rend(); ++it) out.links.push_back(reverse_link(*it));
    out.external_certs = a.external_certs;
    for (const auto& c : b.external_certs)
        if (std::find(out.external_certs.begin(), out.external_certs.end(), c) == out.external_certs.end())
            out.external_certs.push_back(c);
    out.reversible = a.reversible && b.reversible;
    out.branch_certificates = a.branch_certificates;
    for (const auto& c : b.branch_certificates)
        if (std::find(out.branch_certificates.begin(), out.branch_certificates.end(), c) ==
            out.branch_certificates.end())
            out.branch_certificates.push_back(c);
    return out;
}

}  // namespace chainforge
