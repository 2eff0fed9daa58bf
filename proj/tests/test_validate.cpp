#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "chainforge/error.hpp"
#include "chainforge/pipeline.hpp"
#include "chainforge/validate.hpp"
#include "chainforge/wrgc.hpp"

using namespace chainforge;

namespace {

const pipeline::ChainBuilder& builder() {
    static const pipeline::ChainBuilder b(pipeline::default_config());
    return b;
}

const Transcript& chain20() {
    static const Transcript t = builder().build(20);
    return t;
}

ValidationReport check(const Transcript& t) { return validate(t, builder().validate_options()); }

bool has_rule(const ValidationReport& r, const std::string& rule, std::optional<std::size_t> index = std::nullopt) {
    return std::any_of(r.failures.begin(), r.failures.end(), [&](const ValidationFailure& f) {
        return f.rule == rule && (!index || f.link_index == index);
    });
}

std::size_t first_link_of_step(const Transcript& t, int step) {
    for (std::size_t i = 0; i < t.links.size(); ++i)
        if (t.links[i].step == step) return i;
    FAIL("no link for step");
    return 0;
}

}  // namespace

TEST_CASE("a built chain validates with notes for the unverified facts") {
    const auto r = check(chain20());
    CHECK_MESSAGE(r.ok(), r.describe());
    CHECK(r.links_checked == chain20().links.size());
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("forbidden residual characteristic") {
    auto t = chain20();
    t.links[0].witness.residual_char = 5;
    const auto r = check(t);
    CHECK(has_rule(r, "forbidden_characteristic", 0));
}

TEST_CASE("characteristic 11 or 43 inside the MGD-preserving phase") {
    for (int step : {5, 6, 7, 8}) {
        auto t = chain20();
        const auto i = first_link_of_step(t, step);
        t.links[i].witness.residual_char = 11;
        CAPTURE(step);
        CHECK(has_rule(check(t), "mgd_phase_characteristic", i));
    }
    auto t = chain20();
    const auto i = first_link_of_step(t, 7);
    t.links[i].witness.residual_char = 43;
    CHECK(has_rule(check(t), "mgd_phase_characteristic", i));
}

TEST_CASE("tampered links are caught by replay and composition") {
    auto t = chain20();
    const auto i = first_link_of_step(t, 3) + 2;  // hida to 68
    t.links[i].to.weight = 70;
    t.links[i].params["k"] = 70;
    const auto r = check(t);
    CHECK(has_rule(r, "replay", i));
    CHECK_FALSE(r.ok());

    auto dropped = chain20();
    dropped.links.erase(dropped.links.begin() + static_cast<std::ptrdiff_t>(first_link_of_step(dropped, 3) + 1));
    CHECK(has_rule(check(dropped), "composition"));

    auto local = chain20();
    local.links[0].witness.local_condition = LocalCondition::BothOrdinary;
    CHECK(has_rule(check(local), "local_condition", 0));

    auto image = chain20();
    image.links[1].witness.image.level = ImageLevel::Large;
    CHECK(has_rule(check(image), "image_level", 1));

    auto prime = chain20();
    prime.links[0].witness.residual_char = 25;
    CHECK(has_rule(check(prime), "primality", 0));

    auto invariant = chain20();
    invariant.links[2].to.nebentypus[Integer(999)] = 3;
    CHECK(has_rule(check(invariant), "state_invariants", 2));
}

TEST_CASE("external labels must be known axioms") {
    auto t = chain20();
    t.links[0].witness.image.evidence.front().label = "made-up.label";
    CHECK(has_rule(check(t), "external_label", 0));

    auto certs = chain20();
    certs.external_certs.clear();
    CHECK(has_rule(check(certs), "external_certificate"));
}

TEST_CASE("branch certificates") {
    const auto& t = chain20();
    const Integer q = t.links[1].params.at("q");
    for (const auto& c : t.branch_certificates) {
        CAPTURE(c.step);
        CHECK(check_branch_certificate(c, q).empty());
    }
    // the weight-20 canonical outcome 12 has p = 2*12 - 1 and relies on q splitting
    CHECK_FALSE(check_branch_certificate(t.branch_certificates[0], std::nullopt).empty());
    auto bad_leaf = t;
    bad_leaf.branch_certificates[1].leaves = {26, 32, 40};
    CHECK(has_rule(check(bad_leaf), "branch_certificate"));

    auto bad_t = t;
    auto& node = bad_t.branch_certificates[0].nodes.front();
    node.t += 1;
    CHECK(has_rule(check(bad_t), "branch_certificate"));

    BranchCertificate wrong_step = t.branch_certificates[0];
    wrong_step.step = 4;
    CHECK_FALSE(check_branch_certificate(wrong_step, std::nullopt).empty());

    // the weight-18 canonical step of the first table may be bad-dihedral and needs the split rule
    BranchCertificate c18;
    c18.step = 2;
    c18.roots = {18};
    const auto s = wrgc::wrgc_step(18, wrgc::Mode::Step2);
    c18.nodes = {{s.k_in, s.p, s.exponent_used, "canonical", s.k1, s.k2}};
    c18.leaves = {s.k2, s.k1};
    std::sort(c18.leaves.begin(), c18.leaves.end());
    CHECK_FALSE(check_branch_certificate(c18, std::nullopt).empty());
}

TEST_CASE("step-10 data is re-checked when supplied") {
    auto cfg = pipeline::default_config();
    cfg.step10_data = std::string(CHAINFORGE_DATA_DIR) + "/newforms/level731_excluded.json";
    const pipeline::ChainBuilder with_data(cfg);
    const auto t = with_data.build(12);
    CHECK(validate(t, with_data.validate_options()).ok());

    // the same transcript against the shared-root record
    const auto shared = ingest::load_newform_data(std::string(CHAINFORGE_DATA_DIR) + "/newforms/level731_shared_root.json");
    auto opts = with_data.validate_options();
    opts.step10 = &shared[0];
    CHECK(has_rule(validate(t, opts), "step10_check"));
}

TEST_CASE("the cache never accepts a link that was not checked") {
    ValidationCache cache;
    const auto opts = builder().validate_options(&cache);
    CHECK(validate(chain20(), opts).ok());
    CHECK(cache.has_link(chain20().links[5]));
    CHECK(validate(chain20(), opts).ok());

    auto t = chain20();
    t.links[5].to.weight += 2;
    CHECK_FALSE(cache.has_link(t.links[5]));
    CHECK(has_rule(validate(t, opts), "replay", 5));
}

TEST_CASE("validate never throws") {
    Transcript empty;
    const auto r = check(empty);
    CHECK_FALSE(r.ok());
    CHECK_NOTHROW(r.describe());
}
