#include "chainforge/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "chainforge/error.hpp"
#include "chainforge/script.hpp"
#include "chainforge/transcript_json.hpp"
#include "chainforge/wrgc.hpp"

#ifndef CHAINFORGE_DATA_DIR
#define CHAINFORGE_DATA_DIR "data"
#endif

namespace chainforge::pipeline {

namespace {

using moves::MoveOutcome;

Integer I(unsigned v) { return Integer(v); }

// Appends move outcomes, tagging any failure with its step and link index.
class LinkSink {
public:
    explicit LinkSink(std::vector<ChainLink>& links, std::size_t offset = 0) : links_(links), offset_(offset) {}

    template <class F>
    const ReprState& add(int step, const char* what, F&& make) {
        const std::size_t index = offset_ + links_.size();
        try {
            MoveOutcome out = make();
            if (out.witness().image.level != ImageLevel::SixExtraLarge)
                throw Error(ErrorKind::Undecided, "image is only " + std::string(to_string(out.witness().image.level)));
            links_.push_back(std::move(out.link));
        } catch (const Error& e) {
            throw Error(e.kind(), "step " + std::to_string(step) + ", link " + std::to_string(index) + " (" + what + "): " + e.what());
        }
        return links_.back().to;
    }

    template <class F>
    const ReprState& add_all(int step, const char* what, F&& make) {
        const std::size_t index = offset_ + links_.size();
        std::vector<MoveOutcome> outs;
        try {
            outs = make();
        } catch (const Error& e) {
            throw Error(e.kind(), "step " + std::to_string(step) + ", link " + std::to_string(index) + " (" + what + "): " + e.what());
        }
        for (auto& o : outs) add(step, what, [&] { return std::move(o); });
        return links_.back().to;
    }

private:
    std::vector<ChainLink>& links_;
    std::size_t offset_;
};

moves::MoveContext context(int step, const lemmas::AxiomStore& axioms) {
    moves::MoveContext ctx;
    ctx.step = step;
    ctx.mgd_preserving = step >= 5 && step <= 8;
    ctx.axioms = &axioms;
    return ctx;
}

BranchCertificate certificate(int step, const wrgc::WrgcTree& tree) {
    BranchCertificate c;
    c.step = step;
    c.roots = {tree.root};
    for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
        const auto& s = it->second;
        c.nodes.push_back({s.k_in, s.p, s.exponent_used, std::string(wrgc::to_string(s.exponent_kind)), s.k1, s.k2});
    }
    c.leaves.assign(tree.leaves.begin(), tree.leaves.end());
    return c;
}

void expect(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvariantViolation, what);
}

// One WRGC step as lift, conjugate and re-lift along the k1 outcome.
const ReprState& wrgc_links(LinkSink& sink, int step, const ReprState& from, const wrgc::WrgcStep& s,
                            const moves::MoveContext& ctx) {
    const ReprState* state = &sink.add(step, "weight2_lift", [&] { return moves::weight2_lift(from, s.p, ctx); });
    expect(state->nebentypus.at(s.p) == s.m, "lift order differs from the WRGC step");
    state = &sink.add(step, "galois_conjugate", [&] { return moves::galois_conjugate(*state, s.p, s.exponent_used, ctx); });
    state = &sink.add(step, "crystalline_relift",
                      [&] { return moves::crystalline_relift(*state, s.p, s.d * s.exponent_used, s.k1, ctx); });
    expect(state->weight == s.k1, "re-lift weight differs from the WRGC step");
    return *state;
}

}  // namespace

void PipelineConfig::check() const {
    if (B <= 68) throw Error(ErrorKind::ParameterInconsistency, "B must exceed 68, got " + B.get_str());
    if (max_weight < 12 || max_weight % 2 != 0)
        throw Error(ErrorKind::ParameterInconsistency, "max_weight must be even and >= 12");
    if (bertrand_range / 2 < max_weight)
        throw Error(ErrorKind::ParameterInconsistency,
                    "bertrand_range " + std::to_string(bertrand_range) + " must be at least 2 * max_weight");
    if (search_budget == 0) throw Error(ErrorKind::ParameterInconsistency, "search_budget must be positive");
    if (shared_r && (!arith::is_prime(*shared_r) || *shared_r <= 17))
        throw Error(ErrorKind::ParameterInconsistency, "shared_r must be a prime above 17");
}

PipelineConfig default_config() {
    PipelineConfig c;
    c.axioms_path = std::string(CHAINFORGE_DATA_DIR) + "/axioms.json";
    return c;
}

struct ChainBuilder::Tail {
    ReprState start;  // context cleared
    std::vector<ChainLink> links;
    BranchCertificate step6;
    ExternalCertificate step11;
};

ChainBuilder::ChainBuilder(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.check();
    axioms_ = lemmas::AxiomStore::load(cfg_.axioms_path);
    if (cfg_.step10_data) {
        for (auto& rec : ingest::load_newform_data(*cfg_.step10_data))
            if (rec.level == 17 * 43 && rec.weight == 2 && rec.char_order == script::kStep8Order) {
                step10_ = std::move(rec);
                break;
            }
        if (!step10_)
            throw Error(ErrorKind::MissingHeckeData, *cfg_.step10_data + " has no level-731 weight-2 record with nebentypus order 8");
    }
}

moves::GoodDihedralParams ChainBuilder::good_dihedral_for(const Integer& k0) const {
    auto gd = moves::find_good_dihedral(k0, cfg_.B, cfg_.strict_bound, cfg_.search_budget, {}, cfg_.shared_r);
    const auto bad = moves::good_dihedral_failures(gd);
    if (!bad.empty()) throw Error(ErrorKind::InvariantViolation, "good-dihedral search output fails: " + bad.front());
    return gd;
}

ValidateOptions ChainBuilder::validate_options(ValidationCache* cache) const {
    ValidateOptions o;
    o.axioms = &axioms_;
    o.step10 = step10_record();
    o.cache = cache;
    return o;
}

Transcript ChainBuilder::build(const Integer& k0) const { return build(k0, good_dihedral_for(k0)); }

Transcript ChainBuilder::build(const Integer& k0, const moves::GoodDihedralParams& gd) const {
    if (mpz_odd_p(k0.get_mpz_t()) || k0 < 12 || k0 > arith::from_u64(cfg_.max_weight))
        throw Error(ErrorKind::WeightOutOfRange,
                    "starting weight must be even in [12, " + std::to_string(cfg_.max_weight) + "], got " + k0.get_str());
    if (gd.r <= k0) throw Error(ErrorKind::ParameterInconsistency, "r = " + gd.r.get_str() + " does not exceed k0");
    const auto bad = moves::good_dihedral_failures(gd);
    if (!bad.empty()) throw Error(ErrorKind::InvariantViolation, "good-dihedral parameters fail: " + bad.front());

    Transcript t;
    t.start.weight = k0;
    t.start.context = {ContextKind::PAdicMember, gd.r};
    LinkSink sink(t.links);

    // Step 1: the good-dihedral prime.
    const std::string large(script::kLevelOneLargeImage);
    axioms_.get(large);
    const ReprState* state =
        &sink.add_all(1, "introduce_good_dihedral", [&] { return moves::introduce_good_dihedral(t.start, gd, context(1, axioms_), large); });

    // Step 2: weight reduction; bad-dihedral outcomes with p > B fall back to the escape exponent.
    if (state->weight > 14) {
        const Integer q = gd.q;
        const wrgc::StepRule rule = [q](const Integer& k) {
            auto s = wrgc::wrgc_step(k, wrgc::Mode::Step2);
            const std::vector<Integer> disc{s.p};
            if (s.bad_dihedral_safe || lemmas::splits_in(disc, q)) return s;
            return wrgc::make_step(k, s.p, wrgc::escape_t_prime(s.m), wrgc::ExponentKind::Escape);
        };
        const auto tree = wrgc::wrgc_tree(state->weight, rule);
        const auto ctx = context(2, axioms_);
        for (const auto& s : tree.k1_path()) state = &wrgc_links(sink, 2, *state, s, ctx);
        t.branch_certificates.push_back(certificate(2, tree));
    }
    expect(state->weight <= 14 && state->weight >= 4, "weight after step 2 is outside [4, 14]");

    // Step 3: Sophie Germain pair (11, 23), Hida to 68, then the two explicit reductions.
    {
        const auto ctx = context(3, axioms_);
        state = &sink.add(3, "weight2_lift", [&] { return moves::weight2_lift(*state, I(script::kStep3Lift), ctx); });
        expect(state->nebentypus.at(I(script::kStep3Lift)) == script::kStep3Raise, "step-3 lift order is not 11");
        state = &sink.add(3, "steinberg_raise",
                          [&] { return moves::steinberg_raise(*state, I(script::kStep3Raise), I(script::kStep3Lift), ctx); });
        state = &sink.add(3, "hida_specialize",
                          [&] { return moves::hida_specialize(*state, I(script::kStep3Lift), I(script::kStep3Hida), ctx); });
        wrgc::WrgcTree tree;
        tree.root = I(script::kStep3Hida);
        for (const auto& e : script::kStep3Reductions) {
            const auto s = wrgc::make_step(I(e.k), I(e.p), I(e.t), wrgc::ExponentKind::Explicit);
            tree.nodes.emplace(s.k_in, s);
            if (state->weight == s.k_in) state = &wrgc_links(sink, 3, *state, s, ctx);
        }
        for (const auto& [k, s] : tree.nodes)
            for (const auto& c : {s.k1, s.k2})
                if (!tree.nodes.count(c)) tree.leaves.insert(c);
        t.branch_certificates.push_back(certificate(3, tree));
    }
    expect(std::find(script::kStep3Terminal.begin(), script::kStep3Terminal.end(), state->weight.get_ui()) !=
               script::kStep3Terminal.end(),
           "step-3 terminal weight outside {26, 32, 38}");

    // Step 4: the MGD prime.
    state = &sink.add_all(4, "introduce_mgd", [&] { return moves::introduce_mgd(*state, context(4, axioms_)); });

    // Steps 5-11 depend only on the state reached here.
    const auto tail = tail_for(*state, gd);
    t.links.insert(t.links.end(), tail->links.begin(), tail->links.end());
    t.branch_certificates.push_back(tail->step6);
    t.external_certs.push_back(tail->step11);
    t.end = t.links.back().to;
    return t;
}

std::shared_ptr<const ChainBuilder::Tail> ChainBuilder::tail_for(const ReprState& after_step4,
                                                                 const moves::GoodDihedralParams& gd) const {
    ReprState key = after_step4;
    key.context = {};
    {
        std::lock_guard lock(mu_);
        for (const auto& tl : tails_)
            if (tl->start == key) return tl;
    }

    auto tail = std::make_shared<Tail>();
    tail->start = key;
    LinkSink sink(tail->links, 0);
    const ReprState* state = &after_step4;

    // Step 5: drop the good-dihedral prime: Steinberg at q mod t, then Hida mod q to weight q+1.
    {
        const auto ctx = context(5, axioms_);
        state = &sink.add(5, "steinberg_raise", [&] { return moves::steinberg_raise(*state, gd.t, gd.q, ctx); });
        state = &sink.add(5, "hida_specialize", [&] { return moves::hida_specialize(*state, gd.q, gd.q + 1, ctx); });
    }

    // Step 6: weight reduction from q+1, escaping bad-dihedral outcomes.
    {
        const auto ctx = context(6, axioms_);
        const auto tree = wrgc::wrgc_tree(state->weight, wrgc::Mode::Step6);
        for (const auto& s : tree.k1_path()) state = &wrgc_links(sink, 6, *state, s, ctx);
        tail->step6 = certificate(6, tree);
    }

    // Step 7: pair (23, 47), Hida to 48, then minimal lifts mod 13 and mod 7.
    {
        const auto ctx = context(7, axioms_);
        const Integer lift = I(script::kStep7Lift);
        state = &sink.add(7, "weight2_lift", [&] { return moves::weight2_lift(*state, lift, ctx); });
        expect(state->nebentypus.at(lift) == script::kStep7Raise, "step-7 lift order is not 23");
        state = &sink.add(7, "steinberg_raise", [&] { return moves::steinberg_raise(*state, I(script::kStep7Raise), lift, ctx); });
        state = &sink.add(7, "hida_specialize", [&] { return moves::hida_specialize(*state, lift, I(script::kStep7Hida), ctx); });
        for (const auto& kh : script::kStep7Khare) {
            const Integer p = I(kh.p);
            state = &sink.add(7, "weight2_lift", [&] { return moves::weight2_lift(*state, p, ctx); });
            expect(state->nebentypus.at(p) == kh.order, "step-7 nebentypus order mismatch at " + p.get_str());
            state = &sink.add(7, "minimal_lift", [&] { return moves::minimal_lift(*state, I(kh.ell), p, ctx); });
            state = &sink.add(7, "crystalline_relift", [&] { return moves::crystalline_relift(*state, p, I(kh.k - 2), I(kh.k), ctx); });
        }
        expect(state->weight == script::kStep7Terminal, "step-7 terminal weight is not 16");
    }

    // Step 8: nebentypus of order 8 at 17.
    {
        const auto ctx = context(8, axioms_);
        state = &sink.add(8, "weight2_lift", [&] { return moves::weight2_lift(*state, I(script::kStep8Prime), ctx); });
        expect(state->nebentypus.at(I(script::kStep8Prime)) == script::kStep8Order, "step-8 nebentypus order is not 8");
    }

    // Step 9: irreducibility mod 11 by the trace-zero argument, then Steinberg at 43.
    {
        auto ctx = context(9, axioms_);
        const auto magic = lemmas::lemma_magic_check(script::kMgdPrime, script::kStep8Prime, script::kStep8Order, script::kStep3Raise);
        if (!magic.result.excluded) throw Error(ErrorKind::Undecided, "step 9: " + magic.result.detail);
        ctx.irreducibility = {magic.result.rule};
        state = &sink.add(9, "steinberg_raise", [&] { return moves::steinberg_raise(*state, I(script::kStep3Raise), I(script::kMgdPrime), ctx); });
    }

    // Step 10: Hida mod 43 to weight 44, level 17.
    {
        auto ctx = context(10, axioms_);
        if (step10_) {
            const auto res = ingest::step10_check(*step10_, script::kMgdPrime);
            if (!res.excluded) throw Error(ErrorKind::Undecided, "step 10: " + res.detail);
            ctx.irreducibility = {res.rule};
        } else {
            const std::string label(script::kStep10Assumed);
            axioms_.get(label);
            ctx.irreducibility = {EvidenceItem::external(label)};
            ctx.assumptions = {std::string(script::kStep10Assumption)};
        }
        state = &sink.add(10, "hida_specialize",
                          [&] { return moves::hida_specialize(*state, I(script::kMgdPrime), I(script::kStep10Weight), ctx); });
        expect(state->weight == script::kStep10Weight && state->level.size() == 1 && state->level.count(I(script::kStep8Prime)),
               "step-10 endpoint is not weight 44, level 17");
    }

    // Step 11: the single Galois orbit of the endpoint space.
    {
        const auto& ax = axioms_.get(std::string(script::kStep11SingleOrbit));
        tail->step11 = {ax.id, ax.statement, ax.provenance};
    }

    std::lock_guard lock(mu_);
    for (const auto& tl : tails_)
        if (tl->start == key) return tl;
    tails_.push_back(tail);
    return tail;
}

Transcript build_chain(const Integer& k0, const PipelineConfig& cfg) { return ChainBuilder(cfg).build(k0); }

moves::GoodDihedralParams shared_good_dihedral(std::uint64_t max_k, const PipelineConfig& cfg) {
    // r > 2 max_k keeps r away from 2k-1, 2k-3 and 2k-5 for every k <= max_k,
    // so no re-lift mod r can be bad-dihedral.
    const Integer k = arith::from_u64(max_k);
    const Integer r = cfg.shared_r ? *cfg.shared_r : arith::next_prime(std::max(Integer(2 * k), Integer(17)));
    auto gd = moves::find_good_dihedral(k, cfg.B, cfg.strict_bound, cfg.search_budget, {}, r);
    const auto bad = moves::good_dihedral_failures(gd);
    if (!bad.empty()) throw Error(ErrorKind::InvariantViolation, "good-dihedral search output fails: " + bad.front());
    return gd;
}

std::vector<lemmas::ExclusionResult> step7_verify_internals(const lemmas::AxiomStore& axioms) {
    std::vector<lemmas::ExclusionResult> out;
    for (const auto& [p, k] : {std::pair{13u, 2u}, std::pair{7u, 2u}, std::pair{47u, 48u}}) {
        lemmas::ExclusionResult r;
        r.excluded = !lemmas::ribet_bad_dihedral_possible(I(p), I(k));
        r.rule = EvidenceItem::ribet(I(p), I(k));
        r.detail = "bad-dihedral mod " + std::to_string(p) + " in weight " + std::to_string(k) +
                   (r.excluded ? " is impossible" : " is not ruled out");
        out.push_back(r);
    }
    const std::vector<Integer> away{I(script::kMgdOrder)};
    for (const auto& kh : script::kStep7Khare) {
        lemmas::ExclusionResult r;
        const Integer p = I(kh.p), k = I(kh.k);
        r.excluded = p == 2 * k - 3 && lemmas::winter_excludes_2k_minus_3(p, k, away);
        r.rule = EvidenceItem::winter(p, k);
        r.detail = p.get_str() + " = 2*" + k.get_str() + " - 3 and the inertia order 11 at 43 is odd";
        out.push_back(r);
    }
    {
        lemmas::ExclusionResult r;
        r.excluded = lemmas::split_prime_contradiction(I(53), I(script::kMgdPrime));
        r.rule = EvidenceItem::split_prime({I(53)}, I(script::kMgdPrime));
        r.detail = "43 splits in Q(sqrt 53) but is locally irreducible";
        out.push_back(r);
    }
    out.push_back(lemmas::step7_character_exclusion(axioms, 7, 29).result);
    return out;
}

void emit_transcript(const Transcript& t, const std::string& path, const ValidateOptions& options) {
    const auto report = validate(t, options);
    if (!report.ok()) throw Error(ErrorKind::ValidationFailed, report.describe());
    const std::string text = serialize(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write to " + path + " failed");
}

}  // namespace chainforge::pipeline
