#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "chainforge/error.hpp"
#include "chainforge/moves.hpp"
#include "chainforge/script.hpp"
#include "chainforge/sieve.hpp"
#include "chainforge/wrgc.hpp"

using namespace chainforge;
using namespace chainforge::moves;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::UsageError;
}

ReprState level_one(unsigned k) {
    ReprState s;
    s.weight = k;
    return s;
}

const GoodDihedralParams& gd12() {
    static const auto gd = find_good_dihedral(12, 70, false, 10'000'000);
    return gd;
}

// level-one weight k with the good-dihedral prime attached
ReprState tagged(unsigned k) {
    ReprState s = level_one(k);
    s.level[gd12().q] = LocalType::supercuspidal(gd12().t);
    s.good_dihedral = GoodDihedral{gd12().q, gd12().t};
    return s;
}

void check_replay(const MoveOutcome& o, const MoveContext& ctx) {
    const auto again = apply_move(o.link.move, o.link.from, o.link.params, ctx);
    CHECK(again.link == o.link);
}

}  // namespace

TEST_CASE("good-dihedral parameters satisfy every congruence") {
    const auto& gd = gd12();
    CHECK(gd.r == 19);
    CHECK(gd.t == 73);
    CHECK(gd.q == Integer("13359146636836453994994453001"));
    CHECK(good_dihedral_failures(gd).empty());

    for (unsigned k = 12; k <= 400; k += 2) {
        const auto g = find_good_dihedral(k, 70, k % 4 == 0, 10'000'000);
        CAPTURE(k);
        REQUIRE(good_dihedral_failures(g).empty());
        // independent re-check
        REQUIRE(g.r == arith::next_prime(std::max<std::uint64_t>(k, 17)));
        REQUIRE(arith::is_prime(g.q));
        REQUIRE(g.q % 8 == 1);
        REQUIRE((g.q + 1) % g.t == 0);
        for (auto p : arith::primes_up_to(static_cast<std::uint32_t>(arith::to_u64(g.B))))
            if (p > 2) REQUIRE(g.q % p == 1);
        // t is the first prime = 1 mod 4 above max(B, r)
        for (Integer x = std::max(g.B, g.r) + 1; x < g.t; ++x) REQUIRE_FALSE((arith::is_prime(x) && x % 4 == 1));
        if (k % 4 == 0) REQUIRE(g.B > std::max<Integer>(Integer(std::max(68u, k)), 2 * g.r));
    }
}

TEST_CASE("q is the first prime of its progression above t") {
    const auto& gd = gd12();
    Integer M = 8 * gd.t;
    for (auto p : arith::primes_up_to(70))
        if (p > 2) M *= p;
    Integer x = gd.q;
    while (x - M > gd.t) {
        x -= M;
        REQUIRE_FALSE(arith::is_prime(x));
    }
}

TEST_CASE("good-dihedral search errors") {
    CHECK(kind_of([] { find_good_dihedral(12, 68, false, 1000); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([] { find_good_dihedral(12, 70, false, 1000, {}, Integer(21)); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([] { find_good_dihedral(12, 70, false, 100, [](const Integer&) { return false; }); }) ==
          ErrorKind::SearchBudgetExceeded);
    CHECK(find_good_dihedral(12, 70, true, 10'000'000).B == 70);
    CHECK(find_good_dihedral(100, 70, true, 10'000'000).B == 203);
    auto broken = gd12();
    broken.q += 2;
    CHECK_FALSE(good_dihedral_failures(broken).empty());
}

TEST_CASE("local condition classification") {
    const Integer p = 19;
    CHECK(classify_link(LiftShape::pot_bt2(), LiftShape::crystalline(12), p) == LocalCondition::BothPotentiallyDiagonalizable);
    CHECK(classify_link(LiftShape::crystalline(19), LiftShape::pot_bt2(), p) == LocalCondition::BothPotentiallyDiagonalizable);
    CHECK(kind_of([&] { classify_link(LiftShape::pot_bt2(), LiftShape::crystalline(20), p); }) == ErrorKind::UnsafeLink);
    CHECK(classify_link(LiftShape::semistable2(), LiftShape::ordinary(20), p) == LocalCondition::BothOrdinary);
    CHECK(classify_link(LiftShape::semistable2(), LiftShape::ordinary(38), p) == LocalCondition::BothOrdinary);
    CHECK(kind_of([&] { classify_link(LiftShape::semistable2(), LiftShape::ordinary(22), p); }) == ErrorKind::UnsafeLink);
    CHECK(kind_of([&] { classify_link(LiftShape::pot_bt2(), LiftShape::semistable2(), p); }) == ErrorKind::UnsafeLink);

    CHECK(shape_at(level_one(12), 19) == LiftShape::crystalline(12));
    CHECK(shape_at(level_one(44), 43) == LiftShape::ordinary(44));
    ReprState st;
    st.weight = 2;
    st.level[Integer(43)] = LocalType::steinberg();
    CHECK(shape_at(st, 43) == LiftShape::semistable2());
    CHECK(shape_at(st, 7) == LiftShape::pot_bt2());
    ReprState bad = level_one(12);
    bad.level[Integer(19)] = LocalType::steinberg();
    CHECK(kind_of([&] { shape_at(bad, 19); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("characteristic rules") {
    for (int p : {2, 3, 5}) {
        CHECK(kind_of([&] { check_characteristic(p, false); }) == ErrorKind::ForbiddenCharacteristic);
        CHECK(kind_of([&] { reduce_mod(level_one(12), p); }) == ErrorKind::ForbiddenCharacteristic);
    }
    for (int p : {11, 43}) {
        CHECK(kind_of([&] { check_characteristic(p, true); }) == ErrorKind::MgdViolation);
        CHECK_NOTHROW(check_characteristic(p, false));
    }
    CHECK_NOTHROW(check_characteristic(7, true));
    MoveContext mgd;
    mgd.mgd_preserving = true;
    CHECK(kind_of([&] { weight2_lift(tagged(32), 43, mgd); }) == ErrorKind::MgdViolation);
    CHECK(kind_of([&] { weight2_lift(tagged(12), 9, {}); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("reduction to a residual descriptor") {
    ReprState s;
    s.weight = 2;
    s.level = {{Integer(43), LocalType::supercuspidal(11)}, {Integer(7), LocalType::steinberg()},
               {Integer(17), LocalType::principal_series(8)}};
    s.nebentypus = {{Integer(17), Integer(8)}};
    s.mgd = Mgd{43, 11};
    REQUIRE(s.invariant_failures().empty());
    const auto r = reduce_mod(s, 11);
    CHECK(r.is_residual());
    CHECK(r.serre_alternatives == std::vector<Integer>{2});
    CHECK(r.level.at(43).kind == LocalKind::UnramifiedOrUnipotent);
    CHECK(r.level.at(7).kind == LocalKind::UnramifiedOrUnipotent);
    CHECK(r.level.at(17) == LocalType::principal_series(8));
    CHECK_FALSE(r.mgd.has_value());
    const auto r7 = reduce_mod(s, 7);
    CHECK_FALSE(r7.level.contains(7));
    CHECK(r7.mgd == s.mgd);
    CHECK(kind_of([&] { reduce_mod(r, 13); }) == ErrorKind::PreconditionFailed);

    ReprState ps;
    ps.weight = 2;
    ps.level = {{Integer(43), LocalType::principal_series(7)}};
    ps.nebentypus = {{Integer(43), Integer(7)}};
    const auto with_exp = reduce_mod(ps, 43, false, Integer(24));
    CHECK(with_exp.serre_alternatives == std::vector<Integer>{26, 20});
}

TEST_CASE("good-dihedral introduction") {
    MoveContext ctx;
    ctx.step = 1;
    const auto links = introduce_good_dihedral(level_one(12), gd12(), ctx, std::string(script::kLevelOneLargeImage));
    REQUIRE(links.size() == 3);
    const auto& lift = links[0].link;
    CHECK(lift.move == "weight2_lift");
    CHECK(lift.to.weight == 2);
    CHECK(lift.to.level.at(19) == LocalType::principal_series(9));
    CHECK(lift.to.nebentypus.at(19) == 9);
    CHECK(lift.witness.residual_char == 19);
    const auto& ins = links[1].link;
    CHECK(ins.witness.residual_char == 73);
    CHECK(ins.to.good_dihedral == GoodDihedral{gd12().q, 73});
    CHECK(ins.to.level.at(gd12().q) == LocalType::supercuspidal(73));
    const auto& back = links[2].link;
    CHECK(back.move == "crystalline_relift");
    CHECK(same_form(back.to, tagged(12)));
    for (const auto& o : links) {
        CHECK(o.link.step == 1);
        CHECK(o.witness().image.level == ImageLevel::SixExtraLarge);
        CHECK(o.witness().local_condition == LocalCondition::BothPotentiallyDiagonalizable);
        CHECK(o.link.from.context.p == o.witness().residual_char);
    }
    CHECK(links[0].witness().image.evidence.front() == EvidenceItem::external(std::string(script::kLevelOneLargeImage)));
    // the return trip relies on the good-dihedral prime, not the external certificate
    CHECK(links[2].witness().image.evidence.front() == EvidenceItem::good_dihedral(gd12().q, 73));
    check_replay(links[2], ctx);
    MoveContext ext = ctx;
    ext.external_large = std::string(script::kLevelOneLargeImage);
    check_replay(links[0], ext);
    check_replay(links[1], ext);

    CHECK(kind_of([&] { introduce_good_dihedral(tagged(12), gd12(), ctx, "x"); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { introduce_good_dihedral(level_one(20), gd12(), ctx, "x"); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("one conjugation step matches the reduction table") {
    MoveContext ctx;
    ctx.step = 2;
    const auto step = wrgc::wrgc_step(32, wrgc::Mode::Step2);
    const auto lift = weight2_lift(tagged(32), step.p, ctx);
    CHECK(lift.link.params.at("d") == step.d);
    CHECK(lift.link.params.at("m") == step.m);
    CHECK(lift.link.params.at("exponent") == 30);
    const auto conj = galois_conjugate(lift.state(), step.p, step.exponent_used, ctx);
    CHECK(conj.witness().structural);
    CHECK(conj.state().level == lift.state().level);
    CHECK(conj.link.serre_weights == std::vector<Integer>{step.k1, step.k2});
    const auto relift = crystalline_relift(conj.state(), step.p, step.d * step.exponent_used, step.k1, ctx);
    CHECK(same_form(relift.state(), tagged(arith::to_u64(step.k1))));
    for (const auto* o : {&lift, &conj, &relift}) check_replay(*o, ctx);

    CHECK(kind_of([&] { galois_conjugate(lift.state(), 43, 7, ctx); }) == ErrorKind::NotCoprime);
    CHECK(kind_of([&] { galois_conjugate(tagged(32), 43, 4, ctx); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { crystalline_relift(conj.state(), 43, 24, 30, ctx); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([&] { crystalline_relift(conj.state(), 43, 25, 27, ctx); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([&] { weight2_lift(tagged(34), 31, ctx); }) == ErrorKind::Undecided);  // k > p + 1
    CHECK(kind_of([&] { weight2_lift(tagged(32), 31, ctx); }) == ErrorKind::PreconditionFailed);  // trivial nebentypus
}

TEST_CASE("MGD introduction, Steinberg and Hida moves") {
    MoveContext ctx;
    ctx.step = 4;
    const auto links = introduce_mgd(tagged(38), ctx);
    REQUIRE(links.size() == 3);
    CHECK(links[0].state().nebentypus.at(43) == 7);
    CHECK(links[1].link.move == "steinberg_raise");
    CHECK(links[1].witness().residual_char == 7);
    CHECK(links[1].state().level.at(43) == LocalType::steinberg());
    CHECK(links[2].witness().residual_char == 11);
    const auto& end = links[2].state();
    CHECK(end.mgd == Mgd{43, 11});
    CHECK(end.level.at(43) == LocalType::supercuspidal(11));
    CHECK(end.weight == 2);
    for (const auto& o : links) check_replay(o, ctx);

    CHECK(kind_of([&] { introduce_mgd(tagged(36), ctx); }) == ErrorKind::WeightClassViolation);
    CHECK(kind_of([&] { introduce_mgd(tagged(44), ctx); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { introduce_mgd(level_one(38), ctx); }) == ErrorKind::PreconditionFailed);

    const auto& st = links[1].state();
    const auto hida = hida_specialize(st, 43, 44, ctx);
    CHECK(hida.state().weight == 44);
    CHECK_FALSE(hida.state().level.contains(43));
    CHECK(hida.witness().local_condition == LocalCondition::BothOrdinary);
    CHECK(hida.link.serre_weights == std::vector<Integer>{2, 44});
    CHECK(hida_specialize(st, 43, 86, ctx).state().weight == 86);
    CHECK(kind_of([&] { hida_specialize(st, 43, 46, ctx); }) == ErrorKind::BadWeightClass);
    CHECK(kind_of([&] { hida_specialize(links[0].state(), 43, 44, ctx); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { steinberg_raise(st, 7, 7, ctx); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { supercuspidal_lift(st, 11, 43, 10, ctx); }) == ErrorKind::ParameterInconsistency);
}

TEST_CASE("minimal lift strips the characteristic from a principal series order") {
    MoveContext ctx;
    ctx.step = 7;
    const auto lift = weight2_lift(tagged(16), 53, ctx);
    CHECK(lift.state().level.at(53) == LocalType::principal_series(26));
    const auto ml = minimal_lift(lift.state(), 13, 53, ctx);
    CHECK(ml.state().level.at(53) == LocalType::principal_series(2));
    CHECK(ml.state().nebentypus.at(53) == 2);
    const auto up = crystalline_relift(ml.state(), 53, 26, 28, ctx);
    CHECK(up.state().weight == 28);
    CHECK(up.link.serre_weights == std::vector<Integer>{28});
    for (const auto* o : {&lift, &ml, &up}) check_replay(*o, ctx);
    CHECK(kind_of([&] { minimal_lift(lift.state(), 7, 53, ctx); }) == ErrorKind::NothingToStrip);
    CHECK(kind_of([&] { minimal_lift(lift.state(), 13, 59, ctx); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("good-dihedral insertion preconditions and replay parameters") {
    MoveContext ctx;
    const auto lift = weight2_lift(level_one(12), 19, MoveContext{.external_large = "x"});
    CHECK(kind_of([&] { good_dihedral_insert(lift.state(), gd12().q + 2, 73, ctx); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([&] { good_dihedral_insert(tagged(2), gd12().q, 73, ctx); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([&] { apply_move("teleport", level_one(12), {}, ctx); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([&] { apply_move("weight2_lift", level_one(12), {{"q", Integer(19)}}, ctx); }) ==
          ErrorKind::ParameterInconsistency);
    // without the external certificate nothing proves irreducibility at level one
    CHECK(kind_of([&] { weight2_lift(level_one(12), 19, ctx); }) == ErrorKind::Undecided);
}
