#include "chainforge/lemmas.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chainforge/error.hpp"

namespace chainforge::lemmas {

namespace {

using u64 = std::uint64_t;

Integer strip(const Integer& c, const Integer& ell) {
    if (c == 0) return c;
    Integer out;
    mpz_remove(out.get_mpz_t(), c.get_mpz_t(), ell.get_mpz_t());
    return out;
}

bool is_odd(const Integer& n) { return mpz_odd_p(n.get_mpz_t()) != 0; }

u64 mod_inverse(u64 a, u64 p) {
    u64 r = 1, b = a % p, e = p - 2;
    while (e) {
        if (e & 1) r = static_cast<u64>(static_cast<unsigned __int128>(r) * b % p);
        b = static_cast<u64>(static_cast<unsigned __int128>(b) * b % p);
        e >>= 1;
    }
    return r;
}

std::optional<u64> small(const Integer& n) {
    if (n < 0 || !arith::fits_u64(n)) return std::nullopt;
    return arith::to_u64(n);
}

void append_unique(std::vector<EvidenceItem>& v, const EvidenceItem& e) {
    if (std::find(v.begin(), v.end(), e) == v.end()) v.push_back(e);
}

}  // namespace

AxiomStore AxiomStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open axiom file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

AxiomStore AxiomStore::parse(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string("axiom file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("axioms") || !j["axioms"].is_array())
        throw Error(ErrorKind::ParseError, "axiom file: expected {\"axioms\": [...]}");
    AxiomStore store;
    for (std::size_t i = 0; i < j["axioms"].size(); ++i) {
        const auto& a = j["axioms"][i];
        for (const char* key : {"id", "statement", "provenance"})
            if (!a.contains(key) || !a[key].is_string())
                throw Error(ErrorKind::ParseError, "axioms[" + std::to_string(i) + "]." + key + ": expected a string");
        store.add({a["id"].get<std::string>(), a["statement"].get<std::string>(), a["provenance"].get<std::string>()});
    }
    return store;
}

const Axiom& AxiomStore::get(const std::string& id) const {
    const auto it = axioms_.find(id);
    if (it == axioms_.end()) throw Error(ErrorKind::AxiomMissing, "axiom '" + id + "' not loaded");
    return it->second;
}

void AxiomStore::add(Axiom a) {
    std::string id = a.id;
    axioms_.insert_or_assign(std::move(id), std::move(a));
}

std::string ray_class_axiom_id(u64 residual_char, u64 disc_prime) {
    return "ray_class_field.Q(sqrt" + std::to_string(disc_prime) + ").conductor_" + std::to_string(residual_char) + "hat";
}

bool ribet_bad_dihedral_possible(const Integer& p, const Integer& k) {
    if (k < 2 || k > p + 1)
        throw Error(ErrorKind::WeightOutOfRange, "Serre weight " + k.get_str() + " outside [2, " + Integer(p + 1).get_str() + "]");
    return p == 2 * k - 1 || p == 2 * k - 3;
}

bool winter_excludes_2k_minus_3(const Integer&, const Integer&, std::span<const Integer> orders) {
    return std::all_of(orders.begin(), orders.end(), [](const Integer& o) { return is_odd(o); });
}

bool splits_in(std::span<const Integer> disc_primes, const Integer& v) {
    int symbol = 1;
    for (const auto& w : disc_primes) {
        // (p*/v) = (v/p) for odd primes p != v.
        symbol *= mpz_legendre(v.get_mpz_t(), w.get_mpz_t());
    }
    return symbol == 1;
}

bool split_prime_contradiction(const Integer& disc_prime, const Integer& irreducible_local_prime) {
    return arith::is_square_mod(irreducible_local_prime, disc_prime);
}

bool pgl2_has_element_of_order(u64 p, unsigned r, u64 n) {
    if (n == 0) return false;
    if (n == 1 || n == p) return true;
    unsigned __int128 q = 1;
    for (unsigned i = 0; i < r; ++i) q *= p;
    return (q - 1) % n == 0 || (q + 1) % n == 0;
}

ImageCert six_extra_large_upgrade(u64 p, u64 projective_element_order, const ImageCert& base) {
    if (base.level != ImageLevel::Large)
        throw Error(ErrorKind::PreconditionFailed, "upgrade needs a Large certificate");
    ImageCert out = base;
    if (p != 11 && p != 13) {
        out.level = ImageLevel::SixExtraLarge;
    } else if (!pgl2_has_element_of_order(p, 1, projective_element_order)) {
        out.level = ImageLevel::SixExtraLarge;
        append_unique(out.evidence, EvidenceItem::element_order(arith::from_u64(projective_element_order)));
    }
    return out;
}

MagicResult lemma_magic_check(u64 q, u64 neb_prime, u64 neb_order, u64 residual_char) {
    if (neb_order == 0 || (neb_prime - 1) % neb_order != 0)
        throw Error(ErrorKind::ParameterInconsistency,
                    "nebentypus order " + std::to_string(neb_order) + " does not divide " + std::to_string(neb_prime - 1));
    if (q % neb_prime == 0 || q % residual_char == 0)
        throw Error(ErrorKind::ParameterInconsistency, "q must be prime to the nebentypus prime and the characteristic");

    MagicResult r;
    r.order_of_q = arith::multiplicative_order(static_cast<std::int64_t>(q), neb_prime);
    // q = w^a for a primitive root w; gcd(neb_prime-1, a) = (neb_prime-1)/ord(q).
    const u64 psi_order = arith::char_value_order(neb_order, static_cast<std::int64_t>((neb_prime - 1) / r.order_of_q));
    u64 psi_order_ell = psi_order;
    while (psi_order_ell % residual_char == 0) psi_order_ell /= residual_char;
    r.psi_q_order = psi_order_ell;

    // Trace zero at q: mu_1(q) + mu_2(q) = 0 in F_ell, with chi(q) = q mod ell.
    const u64 c = q % residual_char;
    const u64 minus_inv_c = residual_char - mod_inverse(c, residual_char);
    const u64 minus_c = residual_char - c;
    r.shapes = {{"chi*psi + 1", minus_inv_c % residual_char}, {"chi + psi", minus_c % residual_char}};
    r.shapes_agree = r.shapes[0].required == r.shapes[1].required;

    bool excluded = true;
    std::string detail = "order of " + std::to_string(q) + " mod " + std::to_string(neb_prime) + " is " +
                         std::to_string(r.order_of_q) + "; psi(" + std::to_string(q) + ") has order " +
                         std::to_string(psi_order_ell);
    for (const auto& s : r.shapes) {
        const u64 need = arith::multiplicative_order(static_cast<std::int64_t>(s.required), residual_char);
        detail += "; shape " + s.name + " needs psi(" + std::to_string(q) + ") = " + std::to_string(s.required) +
                  " of order " + std::to_string(need);
        if (need == psi_order_ell) excluded = false;
    }
    r.result.excluded = excluded;
    r.result.rule = EvidenceItem::explicit_arithmetic(
        "lemma_magic", {arith::from_u64(q), arith::from_u64(neb_prime), arith::from_u64(neb_order), arith::from_u64(residual_char)});
    r.result.detail = detail + (excluded ? "; no reducible shape is possible" : "; a reducible shape survives");
    return r;
}

CharacterExclusion step7_character_exclusion(const AxiomStore& axioms, u64 ell, u64 disc, bool check_conjugacy) {
    const std::string id = ray_class_axiom_id(ell, disc);
    if (!axioms.contains(id)) throw Error(ErrorKind::AxiomMissing, "axiom '" + id + "' not loaded");
    if (disc % 4 != 1 || !arith::is_prime(disc) || !arith::is_prime(ell) || ell < 5)
        throw Error(ErrorKind::PreconditionFailed, "need a prime discriminant = 1 mod 4 and a prime characteristic >= 5");
    if (!arith::is_square_mod(static_cast<std::int64_t>(disc), ell))
        throw Error(ErrorKind::PreconditionFailed, std::to_string(ell) + " does not split in Q(sqrt" + std::to_string(disc) + ")");

    // Exponents of omega (order n = ell-1) on inertia at the two primes above ell.
    // chi restricts to omega at both; psi (the square root of a generator of
    // the first prime) to omega^(n/2) at the first and trivially at the second.
    const long n = static_cast<long>(ell) - 1;
    auto md = [n](long a) { return ((a % n) + n) % n; };
    auto is_chi_plus_one = [](long a, long b) { return (a == 1 && b == 0) || (a == 0 && b == 1); };

    CharacterExclusion out;
    for (unsigned i = 1; i + 2 <= ell; ++i) {
        for (unsigned j = 0; j <= 1; ++j) {
            ++out.pairs_checked;
            const long a1 = md(i + j * n / 2), a2 = md(1 - static_cast<long>(i) + j * n / 2);
            const long b1 = md(i), b2 = md(1 - static_cast<long>(i));
            if (is_chi_plus_one(a1, a2) && is_chi_plus_one(b1, b2)) out.survivors.push_back({i, j});
        }
    }
    out.conjugacy_fails = true;
    for (const auto& s : out.survivors) {
        const long a1 = md(s.i + s.j * n / 2), a2 = md(1 - static_cast<long>(s.i) + s.j * n / 2);
        const long b1 = md(s.i), b2 = md(1 - static_cast<long>(s.i));
        // Induced from K forces mu_2 = mu_1^sigma, and sigma swaps the two primes.
        if (b1 == a2 && a1 == b2) out.conjugacy_fails = false;
    }

    out.result.rule = EvidenceItem::explicit_arithmetic("step7_character_exclusion", {arith::from_u64(ell), arith::from_u64(disc)});
    out.result.excluded = out.survivors.empty() || (check_conjugacy && out.conjugacy_fails);
    std::string detail = std::to_string(out.pairs_checked) + " pairs checked; survivors:";
    for (const auto& s : out.survivors) detail += " (" + std::to_string(s.i) + "," + std::to_string(s.j) + ")";
    if (!check_conjugacy)
        detail += "; conjugacy check disabled";
    else
        detail += out.conjugacy_fails ? "; conjugacy fails for every survivor" : "; a survivor is conjugation-compatible";
    out.result.detail = detail;
    return out;
}

bool InertiaOrder::odd() const { return !order || is_odd(*order); }

std::vector<InertiaOrder> residual_inertia(const ReprState& source, const Integer& ell) {
    std::vector<InertiaOrder> out;
    for (const auto& [w, lt] : source.level) {
        if (w == ell) continue;
        InertiaOrder io{w, std::nullopt, false};
        switch (lt.kind) {
        case LocalKind::Unramified: io.order = Integer(1); break;
        case LocalKind::PrincipalSeries: io.order = strip(lt.order, ell); break;
        case LocalKind::Supercuspidal: {
            const Integer c = strip(lt.order, ell);
            Integer g;
            mpz_gcd_ui(g.get_mpz_t(), c.get_mpz_t(), 2);
            io.order = c / g;
            io.locally_irreducible = c >= 3;
            break;
        }
        case LocalKind::Steinberg:
        case LocalKind::UnramifiedOrUnipotent: break;
        }
        out.push_back(std::move(io));
    }
    return out;
}

std::vector<Integer> candidate_serre_weights(const ReprState& state, const Integer& ell) {
    if (state.is_residual() && state.context.p == ell) return state.serre_alternatives;
    const auto* lt = state.local_at(ell);
    const Integer& k = state.weight;
    std::vector<Integer> out;
    if (!lt || lt->kind == LocalKind::Unramified) {
        if (k <= ell + 1) return {k};
        if ((k - 2) % (ell - 1) == 0) return {2, ell + 1};
        throw Error(ErrorKind::Undecided, "Serre weight of weight " + k.get_str() + " mod " + ell.get_str() + " not determined");
    }
    if (k == 2 && lt->kind == LocalKind::Steinberg) return {2, ell + 1};
    if (k == 2 && lt->kind == LocalKind::PrincipalSeries) {
        const auto c = small(lt->order);
        if (!c || *c > 100000)
            throw Error(ErrorKind::Undecided, "too many nebentypus exponents to enumerate at " + ell.get_str());
        const Integer d = (ell - 1) / lt->order;
        for (u64 s = 1; s < *c; ++s) {
            if (arith::gcd(s, *c) != 1) continue;
            const Integer e = d * arith::from_u64(s);
            out.push_back(e + 2);
            out.push_back(ell + 1 - e);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    throw Error(ErrorKind::Undecided, "no Serre weight recipe for local type " + std::string(to_string(lt->kind)) + " at " + ell.get_str());
}

ExclusionResult dihedral_exclusion(const ReprState& source, const Integer& ell, const ImageContext& ctx,
                                   std::vector<EvidenceItem>* trail) {
    std::vector<EvidenceItem> local;
    auto& ev = trail ? *trail : local;
    if (ctx.serre_weights.empty()) throw Error(ErrorKind::InvariantViolation, "dihedral exclusion without Serre weights");

    const auto inertia = residual_inertia(source, ell);
    std::vector<Integer> orders_away;
    std::vector<Integer> ramified;  // primes where K may ramify
    for (const auto& io : inertia) {
        orders_away.push_back(io.order ? *io.order : ell);
        if (io.order && *io.order == 2) ramified.push_back(io.prime);
    }
    if (source.mgd) {
        const Integer p = arith::from_u64(source.mgd->p);
        for (const auto& io : inertia)
            if (io.prime == p && io.order && is_odd(*io.order))
                append_unique(ev, EvidenceItem::mgd_odd(p, *io.order));
    }

    EvidenceItem first_rule;
    bool have_rule = false;
    bool ell_may_ramify = false;
    for (const auto& k : ctx.serre_weights) {
        EvidenceItem item;
        if (!ribet_bad_dihedral_possible(ell, k)) {
            item = EvidenceItem::ribet(ell, k);
        } else if (ell == 2 * k - 3 && winter_excludes_2k_minus_3(ell, k, orders_away)) {
            item = EvidenceItem::winter(ell, k);
        } else {
            ell_may_ramify = true;
            continue;
        }
        append_unique(ev, item);
        if (!have_rule) first_rule = item, have_rule = true;
    }
    if (ell_may_ramify) ramified.push_back(ell);

    ExclusionResult res;
    if (ramified.empty()) {
        res.excluded = true;
        res.rule = have_rule ? first_rule : EvidenceItem::ribet(ell, ctx.serre_weights.front());
        res.detail = "no prime can ramify in the inducing field";
        return res;
    }

    const std::size_t n = ramified.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<Integer> disc;
        for (std::size_t b = 0; b < n; ++b)
            if (mask >> b & 1) disc.push_back(ramified[b]);
        bool settled = false;
        for (const auto& io : inertia) {
            if (!io.locally_irreducible || std::find(disc.begin(), disc.end(), io.prime) != disc.end()) continue;
            if (splits_in(disc, io.prime)) {
                res.rule = EvidenceItem::split_prime(disc, io.prime);
                append_unique(ev, res.rule);
                settled = true;
                break;
            }
        }
        if (!settled && disc.size() == 1 && ctx.axioms) {
            const auto e = small(ell), d = small(disc[0]);
            if (e && d && ctx.axioms->contains(ray_class_axiom_id(*e, *d))) {
                const auto ce = step7_character_exclusion(*ctx.axioms, *e, *d);
                if (ce.result.excluded) {
                    res.rule = ce.result.rule;
                    append_unique(ev, res.rule);
                    settled = true;
                }
            }
        }
        if (!settled) {
            res.excluded = false;
            std::string s;
            for (const auto& p : disc) s += (s.empty() ? "" : "*") + p.get_str();
            res.rule = EvidenceItem::explicit_arithmetic("undecided", disc);
            res.detail = "dihedral image induced from the field ramified at " + s + " is not excluded";
            return res;
        }
    }
    res.excluded = true;
    res.detail = "every candidate inducing field is contradicted";
    return res;
}

ExclusionResult dihedral_exclusion(const ReprState& state, const Integer& residual_char) {
    ImageContext ctx;
    try {
        ctx.serre_weights = candidate_serre_weights(state, residual_char);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Undecided) throw;
        return {false, EvidenceItem::explicit_arithmetic("undecided"), e.what()};
    }
    return dihedral_exclusion(state, residual_char, ctx);
}

ImageCert certify_image(const ReprState& source, const Integer& ell, const ImageContext& ctx) {
    if (ell == 2 || ell == 3 || ell == 5)
        throw Error(ErrorKind::ForbiddenCharacteristic, "residual characteristic " + ell.get_str());
    const auto inertia = residual_inertia(source, ell);
    const auto small_ell = small(ell);
    const bool eleven_or_thirteen = small_ell && (*small_ell == 11 || *small_ell == 13);

    auto upgrade = [&](ImageCert cert) {
        if (!eleven_or_thirteen) {
            cert.level = ImageLevel::SixExtraLarge;
            return cert;
        }
        for (const auto& io : inertia) {
            if (!io.order || *io.order <= 1) continue;
            const auto n = small(*io.order);
            if (!n || !pgl2_has_element_of_order(*small_ell, 1, *n)) {
                cert.level = ImageLevel::SixExtraLarge;
                append_unique(cert.evidence, EvidenceItem::element_order(*io.order));
                return cert;
            }
        }
        return cert;
    };

    ImageCert cert;
    cert.level = ImageLevel::Large;
    if (ctx.external_large) {
        cert.evidence.push_back(EvidenceItem::external(*ctx.external_large));
        return upgrade(cert);
    }

    // Irreducibility: a locally irreducible prime away from ell, else the caller's argument.
    bool irreducible = false;
    if (source.good_dihedral) {
        const auto& gd = *source.good_dihedral;
        for (const auto& io : inertia)
            if (io.prime == gd.q && io.locally_irreducible) {
                cert.evidence.push_back(EvidenceItem::good_dihedral(gd.q, gd.t));
                irreducible = true;
            }
    }
    if (!irreducible && source.mgd) {
        const Integer p = arith::from_u64(source.mgd->p);
        for (const auto& io : inertia)
            if (io.prime == p && io.locally_irreducible) {
                cert.evidence.push_back(EvidenceItem::mgd_odd(p, *io.order));
                irreducible = true;
            }
    }
    if (!irreducible) {
        if (ctx.irreducibility.empty())
            throw Error(ErrorKind::Undecided, "no irreducibility argument mod " + ell.get_str() + " for " + source.describe());
        for (const auto& e : ctx.irreducibility) cert.evidence.push_back(e);
    }

    const auto dih = dihedral_exclusion(source, ell, ctx, &cert.evidence);
    if (!dih.excluded) throw Error(ErrorKind::Undecided, dih.detail + " (mod " + ell.get_str() + ")");

    // Exceptional images have element orders <= 5.
    std::optional<Integer> big;
    for (const auto& io : inertia)
        if (io.order && *io.order > 5 && (!big || *io.order > *big)) big = *io.order;
    if (!big) throw Error(ErrorKind::Undecided, "no projective element of order > 5 mod " + ell.get_str());
    append_unique(cert.evidence, EvidenceItem::element_order(*big));

    return upgrade(cert);
}

}  // namespace chainforge::lemmas
