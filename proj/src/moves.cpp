#include "chainforge/moves.hpp"

#include <algorithm>

#include "chainforge/error.hpp"
#include "chainforge/sieve.hpp"
#include "chainforge/wrgc.hpp"

namespace chainforge::moves {

namespace {

Integer strip(const Integer& c, const Integer& ell) {
    Integer out;
    mpz_remove(out.get_mpz_t(), c.get_mpz_t(), ell.get_mpz_t());
    return out;
}

Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

bool in_ordinary_range(const Integer& k, const Integer& p) { return k == p + 1 || (k - 2) % (p - 1) == 0; }

const Integer& param(const MoveParams& params, const std::string& key, const std::string& move) {
    const auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorKind::ParameterInconsistency, move + " needs parameter '" + key + "'");
    return it->second;
}

ReprState padic(ReprState s, const Integer& p) {
    s.context = {ContextKind::PAdicMember, p};
    s.serre_alternatives.clear();
    return s;
}

void drop_prime(ReprState& s, const Integer& w) {
    s.level.erase(w);
    s.nebentypus.erase(w);
    if (s.good_dihedral && s.good_dihedral->q == w) s.good_dihedral.reset();
    if (s.mgd && arith::from_u64(s.mgd->p) == w) s.mgd.reset();
}

std::vector<Integer> weights_from_exponent(const Integer& p, const Integer& e) {
    const auto w = wrgc::serre_weights_from_exponent(p, e);
    std::vector<Integer> out{w.k1};
    if (w.k2 != w.k1) out.push_back(w.k2);
    return out;
}

// Fills residual_char, image certificate, local condition and assumptions.
MoveOutcome finish(ChainLink link, const Integer& ell, const MoveContext& ctx, bool structural = false) {
    link.step = ctx.step;
    link.from = padic(link.from, ell);
    link.to = padic(link.to, ell);
    link.from.check();
    link.to.check();
    for (const auto& k : link.serre_weights)
        if (k < 2 || mpz_odd_p(k.get_mpz_t()))
            throw Error(ErrorKind::InvariantViolation, "Serre weight " + k.get_str() + " is not even and >= 2");

    SafetyWitness& w = link.witness;
    w.residual_char = ell;
    w.structural = structural;
    w.assumptions = ctx.assumptions;
    w.local_condition = classify_link(shape_at(link.from, ell), shape_at(link.to, ell), ell);

    lemmas::ImageContext ictx;
    ictx.serre_weights = link.serre_weights;
    ictx.irreducibility = ctx.irreducibility;
    ictx.external_large = ctx.external_large;
    ictx.axioms = ctx.axioms;
    w.image = lemmas::certify_image(link.from, ell, ictx);
    return MoveOutcome{std::move(link)};
}

ChainLink start_link(const char* move, const ReprState& from, const Integer& ell, const MoveContext& ctx) {
    check_characteristic(ell, ctx.mgd_preserving);
    if (!arith::is_prime(ell)) throw Error(ErrorKind::PreconditionFailed, "characteristic " + ell.get_str() + " is not prime");
    if (from.is_residual()) throw Error(ErrorKind::PreconditionFailed, std::string(move) + " starts from a newform state");
    ChainLink link;
    link.move = move;
    link.from = from;
    link.to = from;
    return link;
}

}  // namespace

std::string describe(const LiftShape& s) {
    switch (s.kind) {
    case ShapeKind::PotBarsottiTate2: return "pot-BT weight 2";
    case ShapeKind::Crystalline: return "crystalline weight " + s.weight.get_str();
    case ShapeKind::Semistable2: return "semistable weight 2";
    case ShapeKind::Ordinary: return "ordinary weight " + s.weight.get_str();
    }
    return "?";
}

LocalCondition classify_link(const LiftShape& lhs, const LiftShape& rhs, const Integer& p) {
    auto podi = [&](const LiftShape& s) {
        return s.kind == ShapeKind::PotBarsottiTate2 || (s.kind == ShapeKind::Crystalline && s.weight <= p);
    };
    auto ordinary = [&](const LiftShape& s) {
        return s.kind == ShapeKind::Semistable2 || (s.kind == ShapeKind::Ordinary && in_ordinary_range(s.weight, p));
    };
    if (podi(lhs) && podi(rhs)) return LocalCondition::BothPotentiallyDiagonalizable;
    if (ordinary(lhs) && ordinary(rhs)) return LocalCondition::BothOrdinary;
    throw Error(ErrorKind::UnsafeLink, describe(lhs) + " against " + describe(rhs) + " at p = " + p.get_str());
}

LiftShape shape_at(const ReprState& state, const Integer& p) {
    const auto* lt = state.local_at(p);
    if (!lt || lt->kind == LocalKind::Unramified) {
        if (state.weight == 2) return LiftShape::pot_bt2();
        if (state.weight <= p) return LiftShape::crystalline(state.weight);
        return LiftShape::ordinary(state.weight);  // only reached as a Hida specialization
    }
    if (state.weight != 2)
        throw Error(ErrorKind::PreconditionFailed, "weight " + state.weight.get_str() + " with " + p.get_str() + " in the level");
    if (lt->kind == LocalKind::Steinberg) return LiftShape::semistable2();
    if (lt->kind == LocalKind::UnramifiedOrUnipotent)
        throw Error(ErrorKind::PreconditionFailed, "residual descriptor has no p-adic shape");
    return LiftShape::pot_bt2();
}

void check_characteristic(const Integer& p, bool mgd_preserving) {
    if (p == 2 || p == 3 || p == 5)
        throw Error(ErrorKind::ForbiddenCharacteristic, "residual characteristic " + p.get_str() + " is not allowed");
    if (mgd_preserving && (p == 11 || p == 43))
        throw Error(ErrorKind::MgdViolation, "characteristic " + p.get_str() + " would lose the MGD prime");
}

ReprState reduce_mod(const ReprState& state, const Integer& p, bool mgd_preserving, const std::optional<Integer>& exponent) {
    check_characteristic(p, mgd_preserving);
    if (state.is_residual()) throw Error(ErrorKind::PreconditionFailed, "state is already residual");

    ReprState res = state;
    res.serre_alternatives = exponent ? weights_from_exponent(p, *exponent) : lemmas::candidate_serre_weights(state, p);
    res.weight = res.serre_alternatives.front();
    res.context = {ContextKind::Residual, p};
    drop_prime(res, p);  // absorbed into the Serre weight

    for (auto& [w, lt] : res.level) {
        if (lt.kind == LocalKind::Steinberg) {
            lt = LocalType::unramified_or_unipotent();
        } else if (lt.has_order()) {
            const Integer c = strip(lt.order, p);
            if (c == 1)
                lt = LocalType::unramified_or_unipotent();
            else
                lt.order = c;
        }
    }
    for (auto it = res.nebentypus.begin(); it != res.nebentypus.end();) {
        const Integer c = strip(it->second, p);
        if (c == 1)
            it = res.nebentypus.erase(it);
        else
            (it++)->second = c;
    }
    if (res.good_dihedral) {
        const auto* lt = res.local_at(res.good_dihedral->q);
        if (!lt || *lt != LocalType::supercuspidal(res.good_dihedral->t)) res.good_dihedral.reset();
    }
    if (res.mgd) {
        const auto* lt = res.local_at(arith::from_u64(res.mgd->p));
        if (!lt || *lt != LocalType::supercuspidal(arith::from_u64(res.mgd->ram_order))) res.mgd.reset();
    }
    res.check();
    return res;
}

MoveOutcome weight2_lift(const ReprState& from, const Integer& p, const MoveContext& ctx) {
    ChainLink link = start_link("weight2_lift", from, p, ctx);
    const auto res = reduce_mod(from, p, ctx.mgd_preserving);
    const Integer& k = from.weight;
    if (res.serre_alternatives != std::vector<Integer>{k} || k <= 2 || from.local_at(p))
        throw Error(ErrorKind::PreconditionFailed,
                    "weight-2 lift mod " + p.get_str() + " needs an unramified weight 2 < k <= p, got " + from.describe());
    const auto neb = arith::nebentypus_order(p, k);
    if (neb.m == 1)
        throw Error(ErrorKind::PreconditionFailed, "weight " + k.get_str() + " gives a trivial nebentypus mod " + p.get_str());
    link.to.weight = 2;
    link.to.level[p] = LocalType::principal_series(neb.m);
    link.to.nebentypus[p] = neb.m;
    link.params = {{"p", p}, {"k", k}, {"exponent", k - 2}, {"d", neb.d}, {"m", neb.m}};
    link.serre_weights = {k};
    link.notes = "nebentypus omega^" + Integer(k - 2).get_str() + " of order " + neb.m.get_str() + " at " + p.get_str();
    return finish(std::move(link), p, ctx);
}

MoveOutcome galois_conjugate(const ReprState& from, const Integer& p, const Integer& t, const MoveContext& ctx) {
    ChainLink link = start_link("galois_conjugate", from, p, ctx);
    const auto* lt = from.local_at(p);
    if (from.weight != 2 || !lt || lt->kind != LocalKind::PrincipalSeries)
        throw Error(ErrorKind::PreconditionFailed, "conjugation needs a principal series prime " + p.get_str());
    const Integer& m = lt->order;
    if (gcd(t, m) != 1) throw Error(ErrorKind::NotCoprime, "t = " + t.get_str() + " not coprime to m = " + m.get_str());
    const Integer d = (p - 1) / m;
    link.params = {{"p", p}, {"t", t}, {"d", d}, {"m", m}, {"exponent", d * t}};
    link.serre_weights = weights_from_exponent(p, d * t);
    link.notes = "nebentypus becomes (omega^" + d.get_str() + ")^" + t.get_str() + "; orders unchanged";
    return finish(std::move(link), p, ctx, true);
}

MoveOutcome crystalline_relift(const ReprState& from, const Integer& p, const Integer& exponent, const Integer& k,
                               const MoveContext& ctx) {
    ChainLink link = start_link("crystalline_relift", from, p, ctx);
    const auto* lt = from.local_at(p);
    if (from.weight != 2 || !lt || lt->kind != LocalKind::PrincipalSeries)
        throw Error(ErrorKind::PreconditionFailed, "re-lift needs a weight-2 principal series prime " + p.get_str());
    if (exponent <= 0 || exponent >= p - 1 || (p - 1) / gcd(p - 1, exponent) != lt->order)
        throw Error(ErrorKind::ParameterInconsistency,
                    "exponent " + exponent.get_str() + " does not give order " + lt->order.get_str() + " at " + p.get_str());
    const auto res = reduce_mod(from, p, ctx.mgd_preserving, exponent);
    if (std::find(res.serre_alternatives.begin(), res.serre_alternatives.end(), k) == res.serre_alternatives.end())
        throw Error(ErrorKind::ParameterInconsistency, "weight " + k.get_str() + " is not a Serre weight of the reduction");
    link.to.weight = k;
    drop_prime(link.to, p);
    link.params = {{"p", p}, {"exponent", exponent}, {"k", k}};
    link.serre_weights = res.serre_alternatives;
    std::string alts;
    for (const auto& w : res.serre_alternatives) alts += (alts.empty() ? "" : " or ") + w.get_str();
    link.notes = "Serre weight " + alts + "; following " + k.get_str();
    return finish(std::move(link), p, ctx);
}

MoveOutcome hida_specialize(const ReprState& from, const Integer& p, const Integer& k_new, const MoveContext& ctx) {
    ChainLink link = start_link("hida_specialize", from, p, ctx);
    if (!in_ordinary_range(k_new, p))
        throw Error(ErrorKind::BadWeightClass,
                    "weight " + k_new.get_str() + " is neither p+1 nor 2 mod " + Integer(p - 1).get_str());
    const auto* lt = from.local_at(p);
    if (from.weight != 2 || !lt || lt->kind != LocalKind::Steinberg)
        throw Error(ErrorKind::PreconditionFailed, "Hida move needs a weight-2 form Steinberg at " + p.get_str());
    link.to.weight = k_new;
    drop_prime(link.to, p);
    link.params = {{"p", p}, {"k", k_new}};
    link.serre_weights = {Integer(2), p + 1};
    link.notes = "ordinary specialization of weight " + k_new.get_str();
    return finish(std::move(link), p, ctx);
}

MoveOutcome steinberg_raise(const ReprState& from, const Integer& ell, const Integer& w, const MoveContext& ctx) {
    ChainLink link = start_link("steinberg_raise", from, ell, ctx);
    if (w == ell) throw Error(ErrorKind::PreconditionFailed, "Steinberg prime must differ from the characteristic");
    const auto res = reduce_mod(from, ell, ctx.mgd_preserving);
    if (from.weight != 2 || res.serre_alternatives != std::vector<Integer>{2})
        throw Error(ErrorKind::PreconditionFailed, "Steinberg lift needs Serre weight 2 mod " + ell.get_str());
    const auto* r = res.local_at(w);
    if (r && r->kind != LocalKind::Unramified && r->kind != LocalKind::UnramifiedOrUnipotent)
        throw Error(ErrorKind::PreconditionFailed, w.get_str() + " is ramified in the residual representation mod " + ell.get_str());
    drop_prime(link.to, w);
    link.to.level[w] = LocalType::steinberg();
    link.params = {{"ell", ell}, {"w", w}};
    link.serre_weights = {2};
    const auto* before = from.local_at(w);
    link.notes = before && before->kind == LocalKind::Steinberg ? "already Steinberg at " + w.get_str()
                                                                 : "Steinberg at " + w.get_str();
    return finish(std::move(link), ell, ctx);
}

MoveOutcome minimal_lift(const ReprState& from, const Integer& ell, const Integer& at, const MoveContext& ctx) {
    ChainLink link = start_link("minimal_lift", from, ell, ctx);
    const auto* lt = from.local_at(at);
    if (!lt || lt->kind != LocalKind::PrincipalSeries)
        throw Error(ErrorKind::PreconditionFailed, "minimal lift needs a principal series prime " + at.get_str());
    if (!mpz_divisible_p(lt->order.get_mpz_t(), ell.get_mpz_t()))
        throw Error(ErrorKind::NothingToStrip, ell.get_str() + " does not divide the order " + lt->order.get_str());
    const auto res = reduce_mod(from, ell, ctx.mgd_preserving);
    if (from.weight != 2 || res.serre_alternatives != std::vector<Integer>{2})
        throw Error(ErrorKind::PreconditionFailed, "minimal lift needs Serre weight 2 mod " + ell.get_str());
    const Integer c = strip(lt->order, ell);
    if (c == 1) {
        drop_prime(link.to, at);
    } else {
        link.to.level[at] = LocalType::principal_series(c);
        link.to.nebentypus[at] = c;
    }
    link.params = {{"ell", ell}, {"at", at}, {"order_in", lt->order}, {"order_out", c}};
    link.serre_weights = {2};
    link.notes = "order at " + at.get_str() + ": " + lt->order.get_str() + " -> " + c.get_str();
    return finish(std::move(link), ell, ctx);
}

MoveOutcome supercuspidal_lift(const ReprState& from, const Integer& ell, const Integer& w, const Integer& order,
                               const MoveContext& ctx) {
    ChainLink link = start_link("supercuspidal_lift", from, ell, ctx);
    if (!mpz_divisible_p(Integer(w + 1).get_mpz_t(), order.get_mpz_t()) || strip(order, ell) != 1)
        throw Error(ErrorKind::ParameterInconsistency,
                    "order " + order.get_str() + " must divide " + Integer(w + 1).get_str() + " and be a power of " + ell.get_str());
    const auto res = reduce_mod(from, ell, ctx.mgd_preserving);
    const auto* r = res.local_at(w);
    if (from.weight != 2 || res.serre_alternatives != std::vector<Integer>{2} ||
        (r && r->kind != LocalKind::UnramifiedOrUnipotent && r->kind != LocalKind::Unramified))
        throw Error(ErrorKind::PreconditionFailed, "supercuspidal lift at " + w.get_str() + " not available mod " + ell.get_str());
    drop_prime(link.to, w);
    link.to.level[w] = LocalType::supercuspidal(order);
    if (mpz_odd_p(order.get_mpz_t())) link.to.mgd = Mgd{arith::to_u64(w), arith::to_u64(order)};
    link.params = {{"ell", ell}, {"w", w}, {"order", order}};
    link.serre_weights = {2};
    link.notes = "supercuspidal of order " + order.get_str() + " at " + w.get_str();
    return finish(std::move(link), ell, ctx);
}

MoveOutcome good_dihedral_insert(const ReprState& from, const Integer& q, const Integer& t, const MoveContext& ctx) {
    ChainLink link = start_link("good_dihedral_insert", from, t, ctx);
    if ((q + 1) % t != 0) throw Error(ErrorKind::ParameterInconsistency, "t must divide q+1");
    if (from.local_at(q) || from.local_at(t)) throw Error(ErrorKind::PreconditionFailed, "q and t must be new primes");
    const auto res = reduce_mod(from, t, ctx.mgd_preserving);
    if (from.weight != 2 || res.serre_alternatives != std::vector<Integer>{2})
        throw Error(ErrorKind::PreconditionFailed, "good-dihedral insertion needs Serre weight 2 mod t");
    link.to.level[q] = LocalType::supercuspidal(t);
    link.to.good_dihedral = GoodDihedral{q, t};
    link.params = {{"ell", t}, {"q", q}, {"t", t}};
    link.serre_weights = {2};
    link.notes = "supercuspidal of order t at q";
    return finish(std::move(link), t, ctx);
}

MoveOutcome apply_move(const std::string& move, const ReprState& from, const MoveParams& params, const MoveContext& ctx) {
    auto get = [&](const char* key) -> const Integer& { return param(params, key, move); };
    if (move == "weight2_lift") return weight2_lift(from, get("p"), ctx);
    if (move == "galois_conjugate") return galois_conjugate(from, get("p"), get("t"), ctx);
    if (move == "crystalline_relift") return crystalline_relift(from, get("p"), get("exponent"), get("k"), ctx);
    if (move == "hida_specialize") return hida_specialize(from, get("p"), get("k"), ctx);
    if (move == "steinberg_raise") return steinberg_raise(from, get("ell"), get("w"), ctx);
    if (move == "minimal_lift") return minimal_lift(from, get("ell"), get("at"), ctx);
    if (move == "supercuspidal_lift") return supercuspidal_lift(from, get("ell"), get("w"), get("order"), ctx);
    if (move == "good_dihedral_insert") return good_dihedral_insert(from, get("q"), get("t"), ctx);
    throw Error(ErrorKind::ParameterInconsistency, "unknown move '" + move + "'");
}

GoodDihedralParams find_good_dihedral(const Integer& k, const Integer& B, bool strict, std::uint64_t budget,
                                      const arith::CandidatePredicate& extra, const std::optional<Integer>& r_override) {
    if (B <= 68) throw Error(ErrorKind::PreconditionFailed, "the good-dihedral bound must exceed 68");
    GoodDihedralParams gd;
    gd.r = r_override ? *r_override : arith::next_prime(std::max(k, Integer(17)));
    if (gd.r <= std::max(k, Integer(17)) || !arith::is_prime(gd.r))
        throw Error(ErrorKind::ParameterInconsistency, "r must be a prime above max(k, 17)");
    gd.B = B;
    if (strict) {
        Integer floor = std::max(Integer(68), k);
        if (2 * gd.r > floor) floor = 2 * gd.r;
        gd.B = std::max(B, Integer(floor + 1));
    }

    gd.t = arith::next_prime(std::max(gd.B, gd.r));
    while (gd.t % 4 != 1) gd.t = arith::next_prime(gd.t);

    std::vector<arith::Congruence> system{{1, 8}, {gd.t - 1, gd.t}};
    if (!arith::fits_u64(gd.B)) throw Error(ErrorKind::ParameterInconsistency, "bound too large");
    for (auto p : arith::primes_up_to(static_cast<std::uint32_t>(arith::to_u64(gd.B))))
        if (p > 2) system.push_back({1, arith::from_u64(p)});
    const auto crt = arith::crt(system);
    if (!crt) throw Error(ErrorKind::ParameterInconsistency, "good-dihedral congruences are inconsistent");
    gd.q = arith::find_prime_in_progression(crt->residue, crt->modulus, gd.t + 1, extra ? extra : [](const Integer&) { return true; },
                                            budget);
    return gd;
}

std::vector<std::string> good_dihedral_failures(const GoodDihedralParams& gd) {
    std::vector<std::string> out;
    auto need = [&](bool ok, const std::string& what) {
        if (!ok) out.push_back(what);
    };
    need(arith::is_prime(gd.r), "r is prime");
    need(arith::is_prime(gd.t), "t is prime");
    need(arith::is_prime(gd.q), "q is prime");
    need(gd.B > 68, "B > 68");
    need(gd.t > gd.B && gd.t > gd.r, "t > max(B, r)");
    need(gd.q > gd.t, "q > t");
    need(gd.t % 4 == 1, "t = 1 mod 4");
    need(gd.q % 8 == 1, "q = 1 mod 8");
    need((gd.q + 1) % gd.t == 0, "t divides q+1");
    if (arith::fits_u64(gd.B))
        for (auto p : arith::primes_up_to(static_cast<std::uint32_t>(arith::to_u64(gd.B))))
            need(gd.q % arith::from_u64(p) == 1, "q = 1 mod " + std::to_string(p));
    return out;
}

std::vector<MoveOutcome> introduce_good_dihedral(const ReprState& start, const GoodDihedralParams& gd, const MoveContext& ctx,
                                                 const std::string& large_image_label) {
    if (start.weight < 4 || mpz_odd_p(start.weight.get_mpz_t()) || !start.level.empty())
        throw Error(ErrorKind::PreconditionFailed, "good-dihedral insertion starts from a level-one form of even weight");
    if (gd.r <= start.weight) throw Error(ErrorKind::PreconditionFailed, "r must exceed the weight");
    std::vector<MoveOutcome> out;
    MoveContext external = ctx;
    external.external_large = large_image_label;
    out.push_back(weight2_lift(start, gd.r, external));
    out.push_back(good_dihedral_insert(out.back().state(), gd.q, gd.t, external));
    out.push_back(crystalline_relift(out.back().state(), gd.r, start.weight - 2, start.weight, ctx));
    return out;
}

std::vector<MoveOutcome> introduce_mgd(const ReprState& state, const MoveContext& ctx) {
    const Integer& k = state.weight;
    if (k % 3 != 2) throw Error(ErrorKind::WeightClassViolation, "weight " + k.get_str() + " is not 2 mod 3");
    if (k <= 2 || k >= 43) throw Error(ErrorKind::PreconditionFailed, "MGD insertion needs 2 < k < 43");
    if (!state.good_dihedral) throw Error(ErrorKind::PreconditionFailed, "MGD insertion needs the good-dihedral prime");
    std::vector<MoveOutcome> out;
    out.push_back(weight2_lift(state, 43, ctx));
    if (out.back().state().nebentypus.at(43) != 7)
        throw Error(ErrorKind::InvariantViolation, "nebentypus at 43 must have order 7");
    out.push_back(steinberg_raise(out.back().state(), 7, 43, ctx));
    out.push_back(supercuspidal_lift(out.back().state(), 11, 43, 11, ctx));
    return out;
}

}  // namespace chainforge::moves
