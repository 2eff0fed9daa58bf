#include "chainforge/validate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "chainforge/error.hpp"
#include "chainforge/moves.hpp"
#include "chainforge/script.hpp"
#include "chainforge/wrgc.hpp"

namespace chainforge {

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

bool is_irreducibility_lemma(const EvidenceItem& e) {
    return e.kind == EvidenceKind::ExplicitArithmetic && (e.label == "lemma_magic" || e.label == "step10_check");
}

class Checker {
public:
    Checker(const Transcript& t, const ValidateOptions& o) : t_(t), o_(o) {}

    ValidationReport run() {
        check_endpoints();
        for (std::size_t i = 0; i < t_.links.size(); ++i) check_link(i);
        check_composition();
        check_branches();
        check_external_certs();
        r_.links_checked = t_.links.size();
        return std::move(r_);
    }

private:
    void fail(std::optional<std::size_t> i, std::string rule, std::string detail) {
        r_.failures.push_back({i, std::move(rule), std::move(detail)});
    }
    void note(std::string s) {
        if (std::find(r_.notes.begin(), r_.notes.end(), s) == r_.notes.end()) r_.notes.push_back(std::move(s));
    }

    bool prime(const Integer& n) {
        if (o_.cache)
            if (auto hit = o_.cache->prime(n)) return *hit;
        const bool p = arith::is_prime(n);
        if (o_.cache) o_.cache->add_prime(n, p);
        return p;
    }

    void check_state(std::optional<std::size_t> i, const ReprState& s, const char* which) {
        for (const auto& f : s.invariant_failures()) fail(i, "state_invariants", std::string(which) + ": " + f);
    }

    void check_endpoints() {
        check_state(std::nullopt, t_.start, "start");
        check_state(std::nullopt, t_.end, "end");
        if (t_.links.empty()) fail(std::nullopt, "composition", "transcript has no links");
    }

    void check_composition() {
        if (t_.links.empty()) return;
        if (!same_form(t_.start, t_.links.front().from))
            fail(0, "composition", "first link does not start at the transcript start");
        for (std::size_t i = 0; i + 1 < t_.links.size(); ++i)
            if (!same_form(t_.links[i].to, t_.links[i + 1].from))
                fail(i + 1, "composition", "link does not start where the previous one ends");
        if (!same_form(t_.links.back().to, t_.end))
            fail(t_.links.size() - 1, "composition", "last link does not end at the transcript end");
    }

    void check_external_label(std::size_t i, const std::string& label) {
        if (!o_.axioms) {
            note("external fact '" + label + "' not checked against an axiom store");
        } else if (!o_.axioms->contains(label)) {
            fail(i, "external_label", "external fact '" + label + "' is not a loaded axiom");
        } else {
            note("external fact '" + label + "' taken on trust");
        }
    }

    // Rebuilds the caller-side context of a move from the recorded evidence.
    moves::MoveContext context_for(std::size_t i, const ChainLink& link) {
        moves::MoveContext ctx;
        ctx.step = link.step;
        ctx.mgd_preserving = link.step >= 5 && link.step <= 8;
        ctx.assumptions = link.witness.assumptions;
        ctx.axioms = o_.axioms;
        for (const auto& e : link.witness.image.evidence) {
            if (e.kind == EvidenceKind::ExternalCertificate) {
                check_external_label(i, e.label);
                if (starts_with(e.label, "large-image")) {
                    if (!ctx.external_large) ctx.external_large = e.label;
                } else {
                    ctx.irreducibility.push_back(e);
                }
            } else if (is_irreducibility_lemma(e)) {
                check_irreducibility_lemma(i, link, e);
                ctx.irreducibility.push_back(e);
            }
        }
        for (const auto& a : link.witness.assumptions) note("link " + std::to_string(i) + " assumes: " + a);
        return ctx;
    }

    void check_irreducibility_lemma(std::size_t i, const ChainLink& link, const EvidenceItem& e) {
        const Integer& ell = link.witness.residual_char;
        if (e.label == "lemma_magic") {
            if (e.args.size() != 4 || !std::all_of(e.args.begin(), e.args.end(), [](const Integer& a) { return a > 0 && arith::fits_u64(a); })) {
                fail(i, "lemma_magic", "malformed arguments");
                return;
            }
            const auto& from = link.reversed ? link.to : link.from;
            const auto neb = from.nebentypus.find(e.args[1]);
            if (e.args[3] != ell || neb == from.nebentypus.end() || neb->second != e.args[2] || !from.local_at(e.args[0])) {
                fail(i, "lemma_magic", "arguments do not match the link's state and characteristic");
                return;
            }
            try {
                const auto m = lemmas::lemma_magic_check(arith::to_u64(e.args[0]), arith::to_u64(e.args[1]),
                                                         arith::to_u64(e.args[2]), arith::to_u64(e.args[3]));
                if (!m.result.excluded) fail(i, "lemma_magic", "reducible shape not excluded: " + m.result.detail);
            } catch (const Error& err) {
                fail(i, "lemma_magic", err.what());
            }
        } else {
            if (e.args.size() != 2 || e.args[0] != ell) {
                fail(i, "step10_check", "malformed arguments");
                return;
            }
            if (!o_.step10) {
                note("link " + std::to_string(i) + ": resultant check recorded but not re-run (no Hecke data supplied)");
                return;
            }
            try {
                if (arith::from_u64(o_.step10->level) != e.args[1])
                    fail(i, "step10_check", "Hecke data is for level " + std::to_string(o_.step10->level));
                const auto res = ingest::step10_check(*o_.step10, arith::to_u64(ell));
                if (!res.excluded) fail(i, "step10_check", res.detail);
            } catch (const Error& err) {
                fail(i, "step10_check", err.what());
            }
        }
    }

    void check_link(std::size_t i) {
        const ChainLink& link = t_.links[i];
        const Integer& ell = link.witness.residual_char;

        if (link.step < 1 || link.step > 11) fail(i, "step_range", "step " + std::to_string(link.step) + " outside 1..11");
        if (ell == 2 || ell == 3 || ell == 5)
            fail(i, "forbidden_characteristic", "residual characteristic " + ell.get_str() + " is in {2,3,5}");
        if (link.step >= 5 && link.step <= 8 && (ell == 11 || ell == 43))
            fail(i, "mgd_phase_characteristic",
                 "step " + std::to_string(link.step) + " works mod " + ell.get_str() + "; steps 5-8 must avoid 11 and 43");
        if (!prime(ell)) fail(i, "primality", "residual characteristic " + ell.get_str() + " is not prime");
        for (const char* key : {"p", "q", "w", "at", "ell"})
            if (const auto it = link.params.find(key); it != link.params.end() && !prime(it->second))
                fail(i, "primality", std::string("parameter ") + key + " = " + it->second.get_str() + " is not prime");
        if (link.witness.image.level != ImageLevel::SixExtraLarge)
            fail(i, "image_level", "image certificate is " + std::string(to_string(link.witness.image.level)));
        for (const auto* s : {&link.from, &link.to}) {
            if (s->context.kind != ContextKind::PAdicMember || s->context.p != ell)
                fail(i, "context", "state context does not match the residual characteristic " + ell.get_str());
            check_state(i, *s, s == &link.from ? "from" : "to");
        }

        // Read backwards, the same witness must classify the same way.
        try {
            const auto fwd = moves::classify_link(moves::shape_at(link.from, ell), moves::shape_at(link.to, ell), ell);
            const auto bwd = moves::classify_link(moves::shape_at(link.to, ell), moves::shape_at(link.from, ell), ell);
            if (fwd != link.witness.local_condition || bwd != fwd)
                fail(i, "local_condition", "recorded " + std::string(to_string(link.witness.local_condition)) +
                                               ", recomputed " + std::string(to_string(fwd)));
        } catch (const Error& e) {
            fail(i, "local_condition", e.what());
        }

        const ChainLink forward = link.reversed ? reverse_link(link) : link;
        const auto ctx = context_for(i, forward);
        if (o_.cache && o_.cache->has_link(forward)) return;
        try {
            const auto out = moves::apply_move(forward.move, forward.from, forward.params, ctx);
            if (out.link != forward) {
                std::string what;
                if (out.link.to != forward.to) what += " to-state";
                if (out.link.witness != forward.witness) what += " witness";
                if (out.link.serre_weights != forward.serre_weights) what += " serre_weights";
                if (out.link.params != forward.params) what += " params";
                if (out.link.notes != forward.notes) what += " notes";
                if (out.link.step != forward.step) what += " step";
                fail(i, "replay", "recomputed " + forward.move + " differs in" + (what.empty() ? std::string(" metadata") : what));
            } else if (o_.cache) {
                o_.cache->add_link(forward);
            }
        } catch (const Error& e) {
            fail(i, "replay", forward.move + ": " + e.what());
        }
    }

    std::optional<Integer> good_dihedral_prime() const {
        for (const auto& l : t_.links)
            if (l.from.good_dihedral) return l.from.good_dihedral->q;
        return std::nullopt;
    }

    void check_branches() {
        const auto q = good_dihedral_prime();
        for (const auto& cert : t_.branch_certificates) {
            if (o_.cache && o_.cache->has_branch(cert)) continue;
            const auto errs = check_branch_certificate(cert, q);
            for (const auto& e : errs) fail(std::nullopt, "branch_certificate", "step " + std::to_string(cert.step) + ": " + e);
            if (errs.empty() && o_.cache) o_.cache->add_branch(cert);
        }
    }

    void check_external_certs() {
        for (const auto& c : t_.external_certs) {
            if (c.label.empty() || c.statement.empty()) fail(std::nullopt, "external_certificate", "certificate without label or statement");
            else if (o_.axioms && !o_.axioms->contains(c.label))
                fail(std::nullopt, "external_certificate", "'" + c.label + "' is not a loaded axiom");
            else
                note("external certificate '" + c.label + "' taken on trust");
        }
        const bool reaches_endpoint =
            std::any_of(t_.links.begin(), t_.links.end(), [](const ChainLink& l) { return l.step == 10; });
        const bool has_orbit = std::any_of(t_.external_certs.begin(), t_.external_certs.end(), [](const ExternalCertificate& c) {
            return c.label == script::kStep11SingleOrbit;
        });
        if (reaches_endpoint && !has_orbit)
            fail(std::nullopt, "external_certificate",
                 "chain reaches the weight-44 form but carries no '" + std::string(script::kStep11SingleOrbit) + "' certificate");
    }

    const Transcript& t_;
    const ValidateOptions& o_;
    ValidationReport r_;
};

std::optional<wrgc::ExponentKind> exponent_kind(const std::string& s) {
    for (auto k : {wrgc::ExponentKind::Canonical, wrgc::ExponentKind::Escape, wrgc::ExponentKind::Explicit})
        if (wrgc::to_string(k) == s) return k;
    return std::nullopt;
}

}  // namespace

std::string ValidationReport::describe() const {
    std::ostringstream os;
    os << (ok() ? "valid" : "INVALID") << ": " << links_checked << " links, " << failures.size() << " failures";
    for (const auto& f : failures) {
        os << "\n  ";
        if (f.link_index) os << "link " << *f.link_index << ": ";
        os << "[" << f.rule << "] " << f.detail;
    }
    return os.str();
}

std::string ValidationCache::key(const ChainLink& link) {
    std::string k = std::to_string(link.step) + "|" + link.move;
    for (const auto& [name, v] : link.params) k += "|" + name + "=" + v.get_str();
    return k;
}

bool ValidationCache::has_link(const ChainLink& link) const {
    std::lock_guard lock(mu_);
    const auto it = links_.find(key(link));
    return it != links_.end() && std::find(it->second.begin(), it->second.end(), link) != it->second.end();
}

void ValidationCache::add_link(const ChainLink& link) {
    std::lock_guard lock(mu_);
    auto& v = links_[key(link)];
    if (std::find(v.begin(), v.end(), link) == v.end()) v.push_back(link);
}

bool ValidationCache::has_branch(const BranchCertificate& cert) const {
    std::lock_guard lock(mu_);
    return std::find(branches_.begin(), branches_.end(), cert) != branches_.end();
}

void ValidationCache::add_branch(const BranchCertificate& cert) {
    std::lock_guard lock(mu_);
    if (std::find(branches_.begin(), branches_.end(), cert) == branches_.end()) branches_.push_back(cert);
}

std::optional<bool> ValidationCache::prime(const Integer& n) const {
    std::lock_guard lock(mu_);
    const auto it = primes_.find(n);
    if (it == primes_.end()) return std::nullopt;
    return it->second;
}

void ValidationCache::add_prime(const Integer& n, bool is_prime) {
    std::lock_guard lock(mu_);
    primes_.emplace(n, is_prime);
}

std::vector<std::string> check_branch_certificate(const BranchCertificate& cert, const std::optional<Integer>& split_prime) {
    std::vector<std::string> errs;
    const bool scripted = cert.step == 3;
    if (cert.step != 2 && cert.step != 3 && cert.step != 6) {
        errs.push_back("no branching phase at this step");
        return errs;
    }
    if (cert.roots.empty()) errs.push_back("no roots");

    std::map<Integer, const BranchNode*> by_k;
    for (std::size_t i = 0; i < cert.nodes.size(); ++i) {
        const auto& n = cert.nodes[i];
        if (i > 0 && !(cert.nodes[i - 1].k > n.k)) errs.push_back("nodes not sorted by decreasing weight");
        by_k[n.k] = &n;
        const std::string at = "node k=" + n.k.get_str();
        const auto kind = exponent_kind(n.exponent_kind);
        if (!kind) {
            errs.push_back(at + ": unknown exponent kind '" + n.exponent_kind + "'");
            continue;
        }
        try {
            const auto s = wrgc::make_step(n.k, n.p, n.t, *kind);
            if (s.k1 != n.k1 || s.k2 != n.k2) errs.push_back(at + ": recorded outcomes differ from the recomputed step");
            if (!arith::is_prime(n.p)) errs.push_back(at + ": p is not prime");
            if (scripted) {
                const bool listed = std::any_of(script::kStep3Reductions.begin(), script::kStep3Reductions.end(), [&](const auto& e) {
                    return n.k == e.k && n.p == e.p && n.t == e.t;
                });
                if (!listed || *kind != wrgc::ExponentKind::Explicit) errs.push_back(at + ": not a scripted reduction");
                continue;
            }
            const Integer expect_p = cert.step == 2 ? wrgc::choose_prime_step2(n.k) : wrgc::choose_prime_step6(n.k);
            if (n.p != expect_p) errs.push_back(at + ": p differs from the prime-choice rule");
            if (*kind == wrgc::ExponentKind::Canonical && n.t != wrgc::canonical_t(s.m))
                errs.push_back(at + ": t is not the canonical exponent");
            if (*kind == wrgc::ExponentKind::Escape && n.t != wrgc::escape_t_prime(s.m))
                errs.push_back(at + ": t is not the escape exponent");
            if (*kind == wrgc::ExponentKind::Explicit) errs.push_back(at + ": explicit exponent outside the scripted phase");
            if (!s.bad_dihedral_safe) {
                const std::vector<Integer> disc{n.p};
                if (cert.step == 6 || !split_prime || !lemmas::splits_in(disc, *split_prime))
                    errs.push_back(at + ": outcome may be bad-dihedral and no split prime rules it out");
            }
        } catch (const Error& e) {
            errs.push_back(at + ": " + e.what());
        }
    }

    // Closure: every outcome is either expanded further or a recorded leaf.
    std::set<Integer> expected_leaves, reached;
    std::vector<Integer> stack(cert.roots.begin(), cert.roots.end());
    for (const auto& r : cert.roots)
        if (!by_k.count(r)) errs.push_back("root " + r.get_str() + " has no node");
    while (!stack.empty()) {
        const Integer k = stack.back();
        stack.pop_back();
        if (!reached.insert(k).second) continue;
        const auto it = by_k.find(k);
        if (it == by_k.end()) continue;
        for (const auto& c : {it->second->k1, it->second->k2}) {
            if (by_k.count(c))
                stack.push_back(c);
            else
                expected_leaves.insert(c);
        }
    }
    for (const auto& [k, n] : by_k)
        if (!reached.count(k)) errs.push_back("node k=" + k.get_str() + " unreachable from the roots");
    if (std::vector<Integer>(expected_leaves.begin(), expected_leaves.end()) != cert.leaves)
        errs.push_back("recorded leaves differ from the outcomes of the tree");
    if (scripted) {
        std::vector<Integer> terminal;
        for (auto k : script::kStep3Terminal) terminal.push_back(k);
        if (cert.leaves != terminal) errs.push_back("terminal weights are not {26, 32, 38}");
    } else {
        for (const auto& [k, n] : by_k)
            if (k <= 14) errs.push_back("node k=" + k.get_str() + " is already terminal");
        for (const auto& l : cert.leaves)
            if (l > 14) errs.push_back("leaf " + l.get_str() + " is above 14");
    }
    return errs;
}

ValidationReport validate(const Transcript& t, const ValidateOptions& options) {
    try {
        return Checker(t, options).run();
    } catch (const std::exception& e) {
        ValidationReport r;
        r.failures.push_back({std::nullopt, "internal", e.what()});
        return r;
    }
}

}  // namespace chainforge
