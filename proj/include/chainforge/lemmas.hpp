#pragma once

// Dihedral / exceptional exclusion lemmas and the explicit irreducibility
// arguments, plus the image certification that composes them.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainforge/repmodel.hpp"

namespace chainforge::lemmas {

struct ExclusionResult {
    bool excluded = false;
    EvidenceItem rule;
    std::string detail;
};

struct Axiom {
    std::string id;
    std::string statement;
    std::string provenance;
};

/// Facts taken on trust, loaded from a JSON sidecar.
class AxiomStore {
public:
    AxiomStore() = default;
    static AxiomStore load(const std::string& path);
    static AxiomStore parse(std::string_view text);

    bool contains(const std::string& id) const { return axioms_.contains(id); }
    const Axiom& get(const std::string& id) const;  // AxiomMissing
    void add(Axiom a);
    const std::map<std::string, Axiom>& all() const { return axioms_; }

private:
    std::map<std::string, Axiom> axioms_;
};

/// Axiom id of the ray class field fact used by the character enumeration.
std::string ray_class_axiom_id(std::uint64_t residual_char, std::uint64_t disc_prime);

/// True iff p = 2k-1 or p = 2k-3, i.e. bad-dihedral is not excluded.
/// WeightOutOfRange unless 2 <= k <= p+1.
bool ribet_bad_dihedral_possible(const Integer& p, const Integer& k);

/// True iff every inertia order away from p is odd.
bool winter_excludes_2k_minus_3(const Integer& p, const Integer& k, std::span<const Integer> inertia_orders_away_from_p);

/// True iff v splits in the quadratic field whose discriminant is the product
/// of p* = (-1)^((p-1)/2) p over disc_primes (all odd, none equal to v).
bool splits_in(std::span<const Integer> disc_primes, const Integer& v);

/// Single-prime form with disc_prime = 1 (mod 4): v is a square mod disc_prime.
bool split_prime_contradiction(const Integer& disc_prime, const Integer& irreducible_local_prime);

/// PGL(2, F_{p^r}) has an element of order n iff n = p or n | p^r - 1 or n | p^r + 1.
bool pgl2_has_element_of_order(std::uint64_t p, unsigned r, std::uint64_t n);

/// Upgrades a Large certificate to SixExtraLarge when allowed.
ImageCert six_extra_large_upgrade(std::uint64_t p, std::uint64_t projective_element_order, const ImageCert& base);

struct MagicShape {
    std::string name;         // "chi*psi + 1" or "chi + psi"
    std::uint64_t required;   // value psi(q) must take in F_ell for trace zero at q
};

struct MagicResult {
    ExclusionResult result;
    std::uint64_t order_of_q = 0;    // multiplicative order of q mod neb_prime
    std::uint64_t psi_q_order = 0;   // order of psi(q) in characteristic ell
    std::vector<MagicShape> shapes;
    bool shapes_agree = false;
};

/// Irreducibility of a mod-ell representation with trace-zero condition at a
/// supercuspidal prime q and nebentypus of order neb_order at neb_prime.
MagicResult lemma_magic_check(std::uint64_t q = 43, std::uint64_t neb_prime = 17, std::uint64_t neb_order = 8,
                              std::uint64_t residual_char = 11);

struct CharacterPair {
    unsigned i = 0;
    unsigned j = 0;
    bool operator==(const CharacterPair&) const = default;
};

struct CharacterExclusion {
    ExclusionResult result;
    unsigned pairs_checked = 0;
    std::vector<CharacterPair> survivors;
    bool conjugacy_fails = false;
};

/// Enumerates mu_1 = chi^i psi^j phi, mu_2 = chi^(1-i) psi^j phi^-1 over the
/// split prime ell of Q(sqrt(disc_prime)). AxiomMissing without the ray class record.
CharacterExclusion step7_character_exclusion(const AxiomStore& axioms, std::uint64_t residual_char = 7,
                                             std::uint64_t disc_prime = 29, bool check_conjugacy = true);

/// Projective order of the residual image of inertia at w != ell, or nullopt
/// when it is only known to be odd (unipotent or trivial).
struct InertiaOrder {
    Integer prime;
    std::optional<Integer> order;
    bool locally_irreducible = false;  // supercuspidal with stripped order >= 3
    bool odd() const;
};

std::vector<InertiaOrder> residual_inertia(const ReprState& source, const Integer& ell);

/// Candidate Serre weights of the reduction mod ell of a state when no move
/// parameters are available. Undecided when the candidates cannot be listed.
std::vector<Integer> candidate_serre_weights(const ReprState& state, const Integer& ell);

struct ImageContext {
    std::vector<Integer> serre_weights;
    std::vector<EvidenceItem> irreducibility;  // established by the caller
    std::optional<std::string> external_large; // label of an external largeness certificate
    const AxiomStore* axioms = nullptr;
};

/// Dihedral exclusion for a residual representation assumed irreducible.
ExclusionResult dihedral_exclusion(const ReprState& source, const Integer& ell, const ImageContext& ctx,
                                   std::vector<EvidenceItem>* trail = nullptr);
ExclusionResult dihedral_exclusion(const ReprState& state, const Integer& residual_char);

/// Full certificate for the residual image mod ell. Throws Undecided.
ImageCert certify_image(const ReprState& source, const Integer& ell, const ImageContext& ctx);

}  // namespace chainforge::lemmas
