#pragma once

// The eleven-step chain from a level-one form of weight k0 to the fixed
// weight-44 level-17 form, and its configuration.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainforge/ingest.hpp"
#include "chainforge/lemmas.hpp"
#include "chainforge/moves.hpp"
#include "chainforge/repmodel.hpp"
#include "chainforge/validate.hpp"

namespace chainforge::pipeline {

struct PipelineConfig {
    Integer B = 70;                         // good-dihedral bound, > 68
    std::uint64_t max_weight = 10000;       // largest supported starting weight, even
    std::uint64_t search_budget = 10'000'000;  // candidates tried in the q search
    bool strict_bound = false;              // also raise B above max(k, 2r)
    std::optional<std::string> step10_data;  // newform JSON for the mod-43 check
    std::string axioms_path;
    std::uint64_t bertrand_range = 100'000'000;
    std::optional<Integer> shared_r;        // one good-dihedral triple for every weight

    /// ParameterInconsistency on B <= 68, odd max_weight, or a Bertrand range
    /// that does not cover twice the largest weight.
    void check() const;
};

/// Defaults with the axiom file shipped in the data directory.
PipelineConfig default_config();

/// key = value lines (# comments) or a JSON object with the same keys:
/// B, max_weight, search_budget, strict_bound, step10_data, axioms_path,
/// bertrand_range, shared_r. Unknown keys are a ParseError.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = default_config());
PipelineConfig load_config(const std::string& path, PipelineConfig base = default_config());

/// Path from CHAINFORGE_CONFIG, if set and non-empty.
std::optional<std::string> config_path_from_env();

/// Holds the loaded axioms and Hecke data plus a cache of the weight-
/// independent tail (steps 5-11), which depends only on the good-dihedral
/// pair. Safe to share between threads.
class ChainBuilder {
public:
    explicit ChainBuilder(PipelineConfig cfg);

    const PipelineConfig& config() const { return cfg_; }
    const lemmas::AxiomStore& axioms() const { return axioms_; }
    const ingest::NewformRecord* step10_record() const { return step10_ ? &*step10_ : nullptr; }

    moves::GoodDihedralParams good_dihedral_for(const Integer& k0) const;

    Transcript build(const Integer& k0) const;
    Transcript build(const Integer& k0, const moves::GoodDihedralParams& gd) const;

    ValidateOptions validate_options(ValidationCache* cache = nullptr) const;

private:
    struct Tail;
    std::shared_ptr<const Tail> tail_for(const ReprState& after_step4, const moves::GoodDihedralParams& gd) const;

    PipelineConfig cfg_;
    lemmas::AxiomStore axioms_;
    std::optional<ingest::NewformRecord> step10_;
    mutable std::mutex mu_;
    mutable std::vector<std::shared_ptr<const Tail>> tails_;
};

/// Steps 1-11 for an even 12 <= k0 <= max_weight. Aborts with the step, the
/// link index and the failing rule on any undecided or unsafe link.
Transcript build_chain(const Integer& k0, const PipelineConfig& cfg);

/// Each internal exclusion of the step-7 reductions, run in isolation.
std::vector<lemmas::ExclusionResult> step7_verify_internals(const lemmas::AxiomStore& axioms);

/// Validates, then writes the JSON transcript. ValidationFailed (no file
/// written) or IoError.
void emit_transcript(const Transcript& t, const std::string& path, const ValidateOptions& options);

/// Good-dihedral triple shared by every weight up to max_k: r is the smallest
/// prime above 2 max_k unless the config fixes it.
moves::GoodDihedralParams shared_good_dihedral(std::uint64_t max_k, const PipelineConfig& cfg);

}  // namespace chainforge::pipeline
