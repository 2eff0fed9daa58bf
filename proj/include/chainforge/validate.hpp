#pragma once

// Independent re-check of a transcript: every link is replayed from its
// from-state and recorded parameters, every witness is recomputed and every
// branch certificate is rebuilt from the WRGC step rules.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chainforge/ingest.hpp"
#include "chainforge/lemmas.hpp"
#include "chainforge/repmodel.hpp"

namespace chainforge {

struct ValidationFailure {
    std::optional<std::size_t> link_index;  // nullopt for transcript-level failures
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFailure> failures;
    std::vector<std::string> notes;  // unverified assumptions and external facts
    std::size_t links_checked = 0;

    bool ok() const { return failures.empty(); }
    std::string describe() const;
};

/// Memo of links and branch certificates already replayed successfully.
/// Entries are compared by full equality, so a cache hit never accepts a
/// link that differs from the one that was checked. Thread-safe.
class ValidationCache {
public:
    bool has_link(const ChainLink& link) const;
    void add_link(const ChainLink& link);
    bool has_branch(const BranchCertificate& cert) const;
    void add_branch(const BranchCertificate& cert);
    std::optional<bool> prime(const Integer& n) const;
    void add_prime(const Integer& n, bool is_prime);

private:
    static std::string key(const ChainLink& link);
    mutable std::mutex mu_;
    std::map<std::string, std::vector<ChainLink>> links_;
    std::vector<BranchCertificate> branches_;
    std::map<Integer, bool> primes_;
};

struct ValidateOptions {
    const lemmas::AxiomStore* axioms = nullptr;
    const ingest::NewformRecord* step10 = nullptr;  // re-runs the mod-43 check when present
    ValidationCache* cache = nullptr;
};

/// Never throws on a bad transcript; every problem is a report entry.
ValidationReport validate(const Transcript& t, const ValidateOptions& options = {});

/// Re-verifies one branch certificate; returns the failures found.
std::vector<std::string> check_branch_certificate(const BranchCertificate& cert, const std::optional<Integer>& split_prime);

}  // namespace chainforge
