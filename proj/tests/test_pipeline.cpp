#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "chainforge/error.hpp"
#include "chainforge/pipeline.hpp"
#include "chainforge/script.hpp"
#include "chainforge/transcript_json.hpp"

using namespace chainforge;
using namespace chainforge::pipeline;
namespace fs = std::filesystem;

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

const ChainBuilder& builder() {
    static const ChainBuilder b(default_config());
    return b;
}

const ChainLink& last_of_step(const Transcript& t, int step) {
    const ChainLink* out = nullptr;
    for (const auto& l : t.links)
        if (l.step == step) out = &l;
    REQUIRE(out != nullptr);
    return *out;
}

bool has_evidence(const ChainLink& l, const EvidenceItem& e) {
    const auto& ev = l.witness.image.evidence;
    return std::find(ev.begin(), ev.end(), e) != ev.end();
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("chainforge_test_" + name); }

}  // namespace

TEST_CASE("chain from weight 12 reaches the weight-44 level-17 form") {
    const auto t = builder().build(12);
    CHECK(t.start.weight == 12);
    CHECK(t.start.level.empty());
    CHECK(t.end.weight == 44);
    REQUIRE(t.end.level.size() == 1);
    CHECK(t.end.level.at(17) == LocalType::principal_series(8));
    CHECK(t.end.nebentypus.at(17) == 8);
    CHECK_FALSE(t.end.good_dihedral.has_value());
    CHECK_FALSE(t.end.mgd.has_value());

    // steps appear in order and none is skipped except step 2 below weight 16
    std::set<int> steps;
    int prev = 0;
    for (const auto& l : t.links) {
        CHECK(l.step >= prev);
        prev = l.step;
        steps.insert(l.step);
        CHECK(l.witness.image.level == ImageLevel::SixExtraLarge);
    }
    CHECK(steps == std::set<int>{1, 3, 4, 5, 6, 7, 8, 9, 10});
    for (std::size_t i = 0; i + 1 < t.links.size(); ++i) CHECK(same_form(t.links[i].to, t.links[i + 1].from));

    const std::set<Integer> terminal3{26, 32, 38};
    CHECK(terminal3.contains(last_of_step(t, 3).to.weight));
    CHECK(last_of_step(t, 7).to.weight == script::kStep7Terminal);
    CHECK(last_of_step(t, 4).to.mgd == Mgd{43, 11});
    CHECK(last_of_step(t, 8).to.nebentypus.at(17) == 8);
    CHECK(has_evidence(last_of_step(t, 9), EvidenceItem::explicit_arithmetic("lemma_magic", {43, 17, 8, 11})));

    // without Hecke data the step-10 fact is an external assumption, recorded as such
    const auto& s10 = last_of_step(t, 10);
    CHECK(has_evidence(s10, EvidenceItem::external(std::string(script::kStep10Assumed))));
    CHECK(s10.witness.assumptions == std::vector<std::string>{std::string(script::kStep10Assumption)});

    REQUIRE(t.external_certs.size() == 1);
    CHECK(t.external_certs[0].label == script::kStep11SingleOrbit);
    CHECK(validate(t, builder().validate_options()).ok());
}

TEST_CASE("weights that need the WRGC phase") {
    for (unsigned k : {16u, 18u, 30u, 32u, 42u, 100u, 998u}) {
        CAPTURE(k);
        const auto t = builder().build(k);
        CHECK(t.links[3].step == 2);
        CHECK(last_of_step(t, 2).to.weight <= 14);
        CHECK(t.branch_certificates.front().step == 2);
        CHECK(t.branch_certificates.front().roots == std::vector<Integer>{k});
        CHECK(validate(t, builder().validate_options()).ok());
    }
}

TEST_CASE("Hecke data replaces the step-10 assumption") {
    auto cfg = default_config();
    cfg.step10_data = std::string(CHAINFORGE_DATA_DIR) + "/newforms/level731_excluded.json";
    const ChainBuilder b(cfg);
    const auto t = b.build(12);
    const auto& s10 = last_of_step(t, 10);
    CHECK(has_evidence(s10, EvidenceItem::explicit_arithmetic("step10_check", {43, 731})));
    CHECK(s10.witness.assumptions.empty());

    auto shared = default_config();
    shared.step10_data = std::string(CHAINFORGE_DATA_DIR) + "/newforms/level731_shared_root.json";
    const ChainBuilder bad(shared);
    CHECK(kind_of([&] { bad.build(12); }) == ErrorKind::Undecided);

    auto wrong = default_config();
    const auto path = temp_file("wrong_level.json");
    std::ofstream(path) << R"({"level": 17, "weight": 2, "char_modulus": 17, "char_order": 8, "hecke_poly": {"2": [1, 1]}})";
    wrong.step10_data = path.string();
    CHECK(kind_of([&] { ChainBuilder{wrong}; }) == ErrorKind::MissingHeckeData);
    fs::remove(path);
}

TEST_CASE("weights outside the supported range are rejected") {
    for (long k : {13L, 10L, 2L, 0L, -4L, 10002L})
        CHECK(kind_of([&] { builder().build(Integer(k)); }) == ErrorKind::WeightOutOfRange);
}

TEST_CASE("builds are deterministic and byte-identical") {
    const auto a = serialize(builder().build(24));
    const auto b = serialize(builder().build(24));
    const ChainBuilder fresh(default_config());
    const auto c = serialize(fresh.build(24));
    CHECK(a == b);
    CHECK(a == c);
    CHECK(serialize(build_chain(24, default_config())) == a);
}

TEST_CASE("the weight-independent tail is shared") {
    auto cfg = default_config();
    const auto gd = shared_good_dihedral(100, cfg);
    CHECK(gd.r == 211);
    CHECK(moves::good_dihedral_failures(gd).empty());
    const auto t12 = builder().build(12, gd);
    const auto t40 = builder().build(40, gd);
    auto tail = [](const Transcript& t) {
        std::vector<ChainLink> out;
        for (const auto& l : t.links)
            if (l.step >= 5) out.push_back(l);
        return out;
    };
    CHECK(tail(t12) == tail(t40));
    CHECK(t12.end == t40.end);
}

TEST_CASE("concatenation joins two chains at the common endpoint") {
    const auto t12 = builder().build(12);
    const auto t16 = builder().build(16);
    const auto both = concat(t12, t16);
    CHECK(both.start == t12.start);
    CHECK(same_form(both.end, t16.start));
    CHECK(both.links.size() == t12.links.size() + t16.links.size());
    const auto r = validate(both, builder().validate_options());
    CHECK_MESSAGE(r.ok(), r.describe());
}

TEST_CASE("emit_transcript writes only validated transcripts") {
    const auto t = builder().build(12);
    const auto good = temp_file("good.json");
    fs::remove(good);
    emit_transcript(t, good.string(), builder().validate_options());
    std::ifstream in(good);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(parse_transcript(ss.str()) == t);
    fs::remove(good);

    auto bad = t;
    bad.links[0].witness.residual_char = 5;
    const auto out = temp_file("bad.json");
    fs::remove(out);
    CHECK(kind_of([&] { emit_transcript(bad, out.string(), builder().validate_options()); }) == ErrorKind::ValidationFailed);
    CHECK_FALSE(fs::exists(out));
    CHECK(kind_of([&] { emit_transcript(t, "/nonexistent-dir/x.json", builder().validate_options()); }) == ErrorKind::IoError);
}

TEST_CASE("step-7 internal exclusions") {
    const auto results = step7_verify_internals(builder().axioms());
    REQUIRE(results.size() == 7);
    for (const auto& r : results) CHECK_MESSAGE(r.excluded, r.detail);
    CHECK(kind_of([] { step7_verify_internals(lemmas::AxiomStore{}); }) == ErrorKind::AxiomMissing);
}

TEST_CASE("configuration parsing and checks") {
    const auto kv = parse_config("# comment\nB = 80\nmax_weight = 200\nstrict_bound = true\nsearch_budget=5000\n");
    CHECK(kv.B == 80);
    CHECK(kv.max_weight == 200);
    CHECK(kv.strict_bound);
    CHECK(kv.search_budget == 5000);
    const auto js = parse_config(R"({"B": 90, "shared_r": 211, "bertrand_range": 100000})");
    CHECK(js.B == 90);
    CHECK(js.shared_r == Integer(211));
    CHECK(js.bertrand_range == 100000);
    CHECK(kind_of([] { parse_config("bertrand_range = 1000\n"); }) == ErrorKind::ParameterInconsistency);
    CHECK(kind_of([] { parse_config("colour = blue\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { parse_config(R"({"colour": 1})"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { parse_config("B = seventy\n"); }) == ErrorKind::ParseError);

    auto check_kind = [](auto mutate) {
        auto c = default_config();
        mutate(c);
        return kind_of([&] { c.check(); });
    };
    CHECK_NOTHROW(default_config().check());
    CHECK(check_kind([](PipelineConfig& c) { c.B = 68; }) == ErrorKind::ParameterInconsistency);
    CHECK(check_kind([](PipelineConfig& c) { c.max_weight = 201; }) == ErrorKind::ParameterInconsistency);
    CHECK(check_kind([](PipelineConfig& c) { c.bertrand_range = 100; }) == ErrorKind::ParameterInconsistency);
    CHECK(check_kind([](PipelineConfig& c) { c.search_budget = 0; }) == ErrorKind::ParameterInconsistency);
    CHECK(check_kind([](PipelineConfig& c) { c.shared_r = Integer(221); }) == ErrorKind::ParameterInconsistency);

    const auto path = temp_file("config.conf");
    std::ofstream(path) << "max_weight = 300\n";
    CHECK(load_config(path.string()).max_weight == 300);
    ::setenv("CHAINFORGE_CONFIG", path.string().c_str(), 1);
    CHECK(config_path_from_env() == path.string());
    ::setenv("CHAINFORGE_CONFIG", "", 1);
    CHECK_FALSE(config_path_from_env().has_value());
    ::unsetenv("CHAINFORGE_CONFIG");
    CHECK_FALSE(config_path_from_env().has_value());
    fs::remove(path);
    CHECK(kind_of([] { load_config("/nonexistent/chainforge.conf"); }) == ErrorKind::IoError);
}

TEST_CASE("strict bound and a shared r still give valid chains") {
    auto cfg = default_config();
    cfg.strict_bound = true;
    const ChainBuilder strict(cfg);
    const auto gd = strict.good_dihedral_for(100);
    CHECK(gd.B == 203);
    CHECK(validate(strict.build(100), strict.validate_options()).ok());

    cfg = default_config();
    cfg.shared_r = Integer(211);
    CHECK(shared_good_dihedral(100, cfg).r == 211);
    CHECK(kind_of([&] { shared_good_dihedral(5000, cfg); }) == ErrorKind::ParameterInconsistency);
    CHECK(shared_good_dihedral(5000, default_config()).r == 10007);
}
