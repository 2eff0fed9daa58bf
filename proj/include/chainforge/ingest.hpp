#pragma once

// Newform Hecke data loaded from LMFDB-style JSON, and the mod-43 common-root
// check that rules out reducible residual images in the final congruence.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chainforge/lemmas.hpp"
#include "chainforge/poly.hpp"

namespace chainforge::ingest {

struct NewformRecord {
    std::string label;  // optional, informational
    std::uint64_t level = 0;
    std::uint64_t weight = 0;
    std::uint64_t char_modulus = 0;
    std::uint64_t char_order = 0;
    // prime -> characteristic polynomial of T_prime, lowest degree first
    std::map<std::uint64_t, std::vector<Integer>> hecke_poly;

    bool operator==(const NewformRecord&) const = default;
};

/// Accepts a single record, an array of records or {"newforms": [...]}.
/// ParseError with line/field context; InvariantViolation on bad values.
std::vector<NewformRecord> parse_newform_data(std::string_view text, const std::string& source = "<memory>");
std::vector<NewformRecord> load_newform_data(const std::string& path);

/// Reducible shape of the residual representation at the prime 2:
/// trace = scale * psi(2) + shift with psi(2) a root of unity of the
/// nebentypus order.
struct TraceShape {
    std::string name;
    std::int64_t scale = 1;
    std::int64_t shift = 0;
};

/// chi*psi + 1 and chi + psi, with chi(2) = 2 for the weight-2 cyclotomic character.
std::vector<TraceShape> step10_shapes();

/// (x - shift)^order - scale^order over F_p: every trace the shape allows.
arith::PolyModP trace_polynomial(const TraceShape& shape, unsigned order, std::uint64_t p);

struct Step10Detail {
    lemmas::ExclusionResult result;
    std::vector<arith::PolyModP> q_polys;  // one per shape
    std::vector<arith::PolyModP> gcds;     // gcd(P_2 mod p, Q_i)
};

/// Excluded iff P_2 mod p shares no root with any shape's trace polynomial.
/// MissingHeckeData without T_2; PreconditionFailed unless char_order = 8.
Step10Detail step10_check_detail(const NewformRecord& rec, std::uint64_t p = 43);
lemmas::ExclusionResult step10_check(const NewformRecord& rec, std::uint64_t p = 43);

}  // namespace chainforge::ingest
