#include "chainforge/ingest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chainforge/error.hpp"

namespace chainforge::ingest {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ParseError, where + ": " + what);
}

std::uint64_t natural(const json& rec, const char* key, const std::string& path) {
    const auto it = rec.find(key);
    if (it == rec.end()) fail(path + "." + key, "missing");
    if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    const auto v = it->get<std::int64_t>();
    if (v < 0) throw Error(ErrorKind::InvariantViolation, path + "." + key + " is negative");
    return static_cast<std::uint64_t>(v);
}

Integer coefficient(const json& c, const std::string& path) {
    if (c.is_number_unsigned()) return arith::from_u64(c.get<std::uint64_t>());
    if (c.is_number_integer()) return Integer(static_cast<long>(c.get<std::int64_t>()));
    if (c.is_string()) {
        Integer n;
        if (n.set_str(c.get<std::string>(), 10) != 0) fail(path, "not a decimal integer");
        return n;
    }
    fail(path, "expected an integer coefficient");
}

NewformRecord parse_record(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    NewformRecord r;
    if (const auto it = j.find("label"); it != j.end()) {
        if (!it->is_string()) fail(path + ".label", "expected a string");
        r.label = it->get<std::string>();
    }
    r.level = natural(j, "level", path);
    r.weight = natural(j, "weight", path);
    r.char_modulus = natural(j, "char_modulus", path);
    r.char_order = natural(j, "char_order", path);

    const auto hp = j.find("hecke_poly");
    if (hp == j.end()) fail(path + ".hecke_poly", "missing");
    if (!hp->is_object()) fail(path + ".hecke_poly", "expected an object keyed by prime");
    for (const auto& [key, coeffs] : hp->items()) {
        const std::string cpath = path + ".hecke_poly." + key;
        std::uint64_t prime = 0;
        try {
            std::size_t used = 0;
            prime = std::stoull(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            fail(cpath, "key is not a prime number");
        }
        if (!arith::is_prime(prime)) throw Error(ErrorKind::InvariantViolation, cpath + ": " + key + " is not prime");
        if (!coeffs.is_array()) fail(cpath, "expected a coefficient list");
        if (coeffs.empty()) throw Error(ErrorKind::InvariantViolation, cpath + ": coefficient list is empty");
        auto& out = r.hecke_poly[prime];
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            out.push_back(coefficient(coeffs[i], cpath + "[" + std::to_string(i) + "]"));
    }

    auto positive = [&](std::uint64_t v, const char* key) {
        if (v < 1) throw Error(ErrorKind::InvariantViolation, path + "." + key + " must be >= 1");
    };
    positive(r.level, "level");
    positive(r.weight, "weight");
    positive(r.char_modulus, "char_modulus");
    positive(r.char_order, "char_order");
    return r;
}

}  // namespace

std::vector<NewformRecord> parse_newform_data(std::string_view text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(source, e.what());
    }
    std::vector<NewformRecord> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_record(j[i], source + "[" + std::to_string(i) + "]"));
    } else if (j.is_object() && j.contains("newforms")) {
        const auto& arr = j["newforms"];
        if (!arr.is_array()) fail(source + ".newforms", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.push_back(parse_record(arr[i], source + ".newforms[" + std::to_string(i) + "]"));
    } else {
        out.push_back(parse_record(j, source));
    }
    if (out.empty()) fail(source, "no newform records");
    return out;
}

std::vector<NewformRecord> load_newform_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open newform data " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_newform_data(ss.str(), path);
}

std::vector<TraceShape> step10_shapes() {
    const std::int64_t chi2 = 2;
    return {{"chi*psi + 1", chi2, 1}, {"chi + psi", 1, chi2}};
}

arith::PolyModP trace_polynomial(const TraceShape& shape, unsigned order, std::uint64_t p) {
    const auto x_minus_shift = arith::PolyModP::x_minus(p, shape.shift);
    const auto scale_pow = arith::PolyModP::constant(p, shape.scale).pow(order);
    return x_minus_shift.pow(order) - scale_pow;
}

Step10Detail step10_check_detail(const NewformRecord& rec, std::uint64_t p) {
    const auto it = rec.hecke_poly.find(2);
    if (it == rec.hecke_poly.end())
        throw Error(ErrorKind::MissingHeckeData, "record " + (rec.label.empty() ? std::to_string(rec.level) : rec.label) +
                                                     " has no Hecke polynomial for T_2");
    if (rec.char_order != 8)
        throw Error(ErrorKind::PreconditionFailed, "nebentypus order must be 8, got " + std::to_string(rec.char_order));

    Step10Detail d;
    const auto p2 = arith::PolyModP::from_integers(p, it->second);
    bool excluded = true;
    std::string detail = "P_2 mod " + std::to_string(p) + " = " + p2.to_string();
    for (const auto& shape : step10_shapes()) {
        auto q = trace_polynomial(shape, static_cast<unsigned>(rec.char_order), p);
        auto g = arith::poly_gcd_mod_p(p2, q);
        detail += "; gcd with " + q.to_string() + " has degree " + std::to_string(g.degree());
        if (g.degree() > 0) excluded = false;
        d.q_polys.push_back(std::move(q));
        d.gcds.push_back(std::move(g));
    }
    d.result.excluded = excluded;
    d.result.rule = EvidenceItem::explicit_arithmetic("step10_check", {arith::from_u64(p), arith::from_u64(rec.level)});
    d.result.detail = detail;
    return d;
}

lemmas::ExclusionResult step10_check(const NewformRecord& rec, std::uint64_t p) { return step10_check_detail(rec, p).result; }

}  // namespace chainforge::ingest
