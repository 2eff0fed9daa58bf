#pragma once

// Metadata model of the forms and residual representations a chain passes
// through. A state never stores eigenvalues, only the (weight, level,
// nebentypus) descriptor plus the two auxiliary-prime tags.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainforge/arith.hpp"

namespace chainforge {

using arith::Integer;

enum class LocalKind {
    Unramified,
    PrincipalSeries,
    Steinberg,
    Supercuspidal,
    UnramifiedOrUnipotent,  // residual descriptor: either case may occur
};

std::string_view to_string(LocalKind kind);
std::optional<LocalKind> local_kind_from_string(std::string_view s);

struct LocalType {
    LocalKind kind = LocalKind::Unramified;
    Integer order;  // character order for PrincipalSeries / Supercuspidal, 0 otherwise

    static LocalType unramified() { return {LocalKind::Unramified, 0}; }
    static LocalType principal_series(Integer c) { return {LocalKind::PrincipalSeries, std::move(c)}; }
    static LocalType steinberg() { return {LocalKind::Steinberg, 0}; }
    static LocalType supercuspidal(Integer c) { return {LocalKind::Supercuspidal, std::move(c)}; }
    static LocalType unramified_or_unipotent() { return {LocalKind::UnramifiedOrUnipotent, 0}; }

    bool has_order() const { return kind == LocalKind::PrincipalSeries || kind == LocalKind::Supercuspidal; }
    bool operator==(const LocalType&) const = default;
};

struct GoodDihedral {
    Integer q;
    Integer t;
    bool operator==(const GoodDihedral&) const = default;
};

struct Mgd {
    std::uint64_t p = 0;
    std::uint64_t ram_order = 0;
    bool operator==(const Mgd&) const = default;
};

enum class ContextKind { PAdicMember, Residual };

struct Context {
    ContextKind kind = ContextKind::PAdicMember;
    Integer p;
    bool operator==(const Context&) const = default;
};

struct ReprState {
    Integer weight;
    std::map<Integer, LocalType> level;
    std::map<Integer, Integer> nebentypus;  // prime -> character order
    std::optional<GoodDihedral> good_dihedral;
    std::optional<Mgd> mgd;
    Context context;
    // Residual states only: every Serre weight the reduction may have.
    std::vector<Integer> serre_alternatives;

    bool operator==(const ReprState&) const = default;

    std::vector<std::string> invariant_failures() const;
    /// Throws InvariantViolation listing every failed invariant.
    void check() const;

    bool is_residual() const { return context.kind == ContextKind::Residual; }
    const LocalType* local_at(const Integer& prime) const;
    std::string describe() const;
};

/// Same newform descriptor, ignoring from which residual prime it is viewed.
bool same_form(const ReprState& a, const ReprState& b);

/// Weight, level and nebentypus orders agree. Galois conjugate newforms
/// always share this signature; the converse is not claimed.
bool same_signature(const ReprState& a, const ReprState& b);

enum class ImageLevel { SixExtraLarge, Large, AdequateDihedral, Irreducible };

std::string_view to_string(ImageLevel level);
std::optional<ImageLevel> image_level_from_string(std::string_view s);

enum class EvidenceKind {
    GoodDihedralWitness,      // args: q, t
    MgdOddRamification,       // args: p, order
    RibetExclusion,           // args: p, k
    WinterExclusion,          // args: p, k
    SplitPrimeContradiction,  // args: disc_prime(s)..., split_prime (last)
    ElementOrder,             // args: order
    ExplicitArithmetic,       // label: lemma id, args: inputs
    ExternalCertificate,      // label
};

std::string_view to_string(EvidenceKind kind);
std::optional<EvidenceKind> evidence_kind_from_string(std::string_view s);

struct EvidenceItem {
    EvidenceKind kind = EvidenceKind::ElementOrder;
    std::vector<Integer> args;
    std::string label;

    bool operator==(const EvidenceItem&) const = default;
    std::string describe() const;

    static EvidenceItem good_dihedral(Integer q, Integer t);
    static EvidenceItem mgd_odd(Integer p, Integer order);
    static EvidenceItem ribet(Integer p, Integer k);
    static EvidenceItem winter(Integer p, Integer k);
    static EvidenceItem split_prime(std::vector<Integer> disc_primes, Integer split_prime);
    static EvidenceItem element_order(Integer n);
    static EvidenceItem explicit_arithmetic(std::string lemma_id, std::vector<Integer> inputs = {});
    static EvidenceItem external(std::string label);
};

struct ImageCert {
    ImageLevel level = ImageLevel::Irreducible;
    std::vector<EvidenceItem> evidence;
    bool operator==(const ImageCert&) const = default;
};

enum class LocalCondition { BothPotentiallyDiagonalizable, BothOrdinary };

std::string_view to_string(LocalCondition c);
std::optional<LocalCondition> local_condition_from_string(std::string_view s);

struct SafetyWitness {
    LocalCondition local_condition = LocalCondition::BothPotentiallyDiagonalizable;
    ImageCert image;
    Integer residual_char;
    bool structural = false;               // Galois conjugation: no lifting theorem needed
    std::vector<std::string> assumptions;  // recorded, not verified
    bool operator==(const SafetyWitness&) const = default;
};

using MoveParams = std::map<std::string, Integer>;

struct ChainLink {
    int step = 0;
    std::string move;
    MoveParams params;
    ReprState from;
    ReprState to;
    SafetyWitness witness;
    std::vector<Integer> serre_weights;  // candidates for the residual representation
    bool reversed = false;
    std::string notes;
    bool operator==(const ChainLink&) const = default;
};

struct ExternalCertificate {
    std::string label;
    std::string statement;
    std::string provenance;
    bool operator==(const ExternalCertificate&) const = default;
};

/// One node of a certified WRGC outcome tree.
struct BranchNode {
    Integer k;
    Integer p;
    Integer t;
    std::string exponent_kind;
    Integer k1;
    Integer k2;
    bool operator==(const BranchNode&) const = default;
};

/// Records that every outcome of a nondeterministic phase was certified,
/// not only the one the linear transcript follows.
struct BranchCertificate {
    int step = 0;
    std::vector<Integer> roots;
    std::vector<BranchNode> nodes;  // sorted by k descending
    std::vector<Integer> leaves;    // ascending
    bool operator==(const BranchCertificate&) const = default;
};

struct Transcript {
    ReprState start;
    std::vector<ChainLink> links;
    std::vector<ExternalCertificate> external_certs;
    ReprState end;
    bool reversible = true;
    std::vector<BranchCertificate> branch_certificates;
    bool operator==(const Transcript&) const = default;
};

ChainLink reverse_link(const ChainLink& link);

/// a forward, then b backwards: a transcript from a.start to b.start.
/// Throws EndpointMismatch unless a.end and b.end share a signature.
Transcript concat(const Transcript& a, const Transcript& b);

}  // namespace chainforge
