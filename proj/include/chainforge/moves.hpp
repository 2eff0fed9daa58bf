#pragma once

// The congruence moves. Every move starts from a newform state, works in one
// residual characteristic and returns the link to the new newform together
// with its safety witness.

#include <optional>
#include <string>
#include <vector>

#include "chainforge/lemmas.hpp"
#include "chainforge/repmodel.hpp"

namespace chainforge::moves {

enum class ShapeKind { PotBarsottiTate2, Crystalline, Semistable2, Ordinary };

struct LiftShape {
    ShapeKind kind = ShapeKind::PotBarsottiTate2;
    Integer weight;  // 2 for the weight-2 shapes

    static LiftShape pot_bt2() { return {ShapeKind::PotBarsottiTate2, 2}; }
    static LiftShape crystalline(Integer k) { return {ShapeKind::Crystalline, std::move(k)}; }
    static LiftShape semistable2() { return {ShapeKind::Semistable2, 2}; }
    static LiftShape ordinary(Integer k) { return {ShapeKind::Ordinary, std::move(k)}; }
    bool operator==(const LiftShape&) const = default;
};

std::string describe(const LiftShape& s);

/// Throws UnsafeLink for combinations outside the two safe classes.
LocalCondition classify_link(const LiftShape& lhs, const LiftShape& rhs, const Integer& p);

/// Local shape at p of the p-adic representation attached to a state.
LiftShape shape_at(const ReprState& state, const Integer& p);

/// ForbiddenCharacteristic for {2,3,5}; MgdViolation for {11,43} when the
/// phase must keep the MGD prime.
void check_characteristic(const Integer& p, bool mgd_preserving);

struct MoveContext {
    int step = 0;
    bool mgd_preserving = false;
    std::vector<EvidenceItem> irreducibility;   // arguments established outside the state
    std::optional<std::string> external_large;  // image largeness taken from a certificate
    std::vector<std::string> assumptions;
    const lemmas::AxiomStore* axioms = nullptr;
};

struct MoveOutcome {
    ChainLink link;
    const ReprState& state() const { return link.to; }
    const SafetyWitness& witness() const { return link.witness; }
};

/// Residual descriptor of `state` mod p. When the nebentypus exponent at p
/// is known, it fixes the pair of candidate Serre weights.
ReprState reduce_mod(const ReprState& state, const Integer& p, bool mgd_preserving = false,
                     const std::optional<Integer>& exponent = std::nullopt);

MoveOutcome weight2_lift(const ReprState& from, const Integer& p, const MoveContext& ctx);
MoveOutcome galois_conjugate(const ReprState& from, const Integer& p, const Integer& t, const MoveContext& ctx);
/// From weight 2 with nebentypus omega^exponent at p to the crystalline form of weight k.
MoveOutcome crystalline_relift(const ReprState& from, const Integer& p, const Integer& exponent, const Integer& k,
                               const MoveContext& ctx);
MoveOutcome hida_specialize(const ReprState& from, const Integer& p, const Integer& k_new, const MoveContext& ctx);
MoveOutcome steinberg_raise(const ReprState& from, const Integer& ell, const Integer& w, const MoveContext& ctx);
MoveOutcome minimal_lift(const ReprState& from, const Integer& ell, const Integer& at, const MoveContext& ctx);
MoveOutcome supercuspidal_lift(const ReprState& from, const Integer& ell, const Integer& w, const Integer& order,
                               const MoveContext& ctx);
MoveOutcome good_dihedral_insert(const ReprState& from, const Integer& q, const Integer& t, const MoveContext& ctx);

/// Re-executes a recorded move from its from-state and parameters.
MoveOutcome apply_move(const std::string& move, const ReprState& from, const MoveParams& params, const MoveContext& ctx);

struct GoodDihedralParams {
    Integer r;
    Integer t;
    Integer q;
    Integer B;  // bound actually enforced
};

/// r = smallest prime > max(k, 17); t = smallest prime = 1 (mod 4) above
/// max(B, r); q = smallest prime > t with q = 1 (mod 8), q = 1 (mod p) for
/// every prime p <= B and q = -1 (mod t). In strict mode B is raised above
/// max(68, k, 2r).
GoodDihedralParams find_good_dihedral(const Integer& k, const Integer& B, bool strict, std::uint64_t budget,
                                      const arith::CandidatePredicate& extra = {},
                                      const std::optional<Integer>& r_override = std::nullopt);

/// Independent re-check of every stated congruence.
std::vector<std::string> good_dihedral_failures(const GoodDihedralParams& gd);

/// Step 1: lift mod r, insert the good-dihedral prime mod t, return mod r to
/// weight k (the twist-normalized Serre weight equal to the start weight).
std::vector<MoveOutcome> introduce_good_dihedral(const ReprState& start, const GoodDihedralParams& gd,
                                                 const MoveContext& ctx, const std::string& large_image_label);

/// Step 4: lift mod 43 (nebentypus order 7), Steinberg mod 7, supercuspidal
/// of order 11 mod 11. WeightClassViolation unless k = 2 (mod 3).
std::vector<MoveOutcome> introduce_mgd(const ReprState& state, const MoveContext& ctx);

}  // namespace chainforge::moves
