#include "chainforge/transcript_json.hpp"

#include <json.hpp>

#include "chainforge/error.hpp"

namespace chainforge {

namespace {

using json = nlohmann::ordered_json;

const Integer kInt63 = Integer(1) << 63;

json int_json(const Integer& n) {
    if (n < kInt63 && n > -kInt63) return json(n.get_si());
    return json(n.get_str());
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::ParseError, path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
}

Integer int_from(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.is_number_unsigned() ? arith::from_u64(j.get<std::uint64_t>()) : Integer(static_cast<long>(j.get<std::int64_t>()));
    if (j.is_string()) {
        Integer n;
        if (n.set_str(j.get<std::string>(), 10) != 0) fail(path, "not a decimal integer");
        return n;
    }
    fail(path, "expected an integer");
}

std::string str_from(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool bool_from(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

const json& array_field(const json& obj, const char* key, const std::string& path) {
    const json& a = field(obj, key, path);
    if (!a.is_array()) fail(path + "." + key, "expected an array");
    return a;
}

template <class E>
E enum_from(const json& j, const std::string& path, std::optional<E> (*parse)(std::string_view)) {
    const auto s = str_from(j, path);
    const auto e = parse(s);
    if (!e) fail(path, "unknown value '" + s + "'");
    return *e;
}

json ints_json(const std::vector<Integer>& v) {
    json a = json::array();
    for (const auto& n : v) a.push_back(int_json(n));
    return a;
}

std::vector<Integer> ints_from(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<Integer> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(int_from(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

json state_json(const ReprState& s) {
    json j;
    j["weight"] = int_json(s.weight);
    json level = json::array();
    for (const auto& [prime, lt] : s.level) {
        json e;
        e["prime"] = int_json(prime);
        e["type"] = to_string(lt.kind);
        if (lt.has_order()) e["order"] = int_json(lt.order);
        level.push_back(std::move(e));
    }
    j["level"] = std::move(level);
    json neb = json::array();
    for (const auto& [prime, order] : s.nebentypus) neb.push_back(json{{"prime", int_json(prime)}, {"order", int_json(order)}});
    j["nebentypus"] = std::move(neb);
    if (s.good_dihedral) j["good_dihedral"] = json{{"q", int_json(s.good_dihedral->q)}, {"t", int_json(s.good_dihedral->t)}};
    if (s.mgd) j["mgd"] = json{{"p", s.mgd->p}, {"ram_order", s.mgd->ram_order}};
    j["context"] = json{{"kind", s.is_residual() ? "residual" : "padic_member"}, {"p", int_json(s.context.p)}};
    if (!s.serre_alternatives.empty()) j["serre_alternatives"] = ints_json(s.serre_alternatives);
    return j;
}

ReprState state_from(const json& j, const std::string& path) {
    ReprState s;
    s.weight = int_from(field(j, "weight", path), path + ".weight");
    const auto& level = array_field(j, "level", path);
    for (std::size_t i = 0; i < level.size(); ++i) {
        const std::string lp = path + ".level[" + std::to_string(i) + "]";
        LocalType lt;
        lt.kind = enum_from(field(level[i], "type", lp), lp + ".type", &local_kind_from_string);
        if (lt.has_order()) lt.order = int_from(field(level[i], "order", lp), lp + ".order");
        const Integer prime = int_from(field(level[i], "prime", lp), lp + ".prime");
        if (!s.level.emplace(prime, std::move(lt)).second) fail(lp, "duplicate prime");
    }
    const auto& neb = array_field(j, "nebentypus", path);
    for (std::size_t i = 0; i < neb.size(); ++i) {
        const std::string np = path + ".nebentypus[" + std::to_string(i) + "]";
        const Integer prime = int_from(field(neb[i], "prime", np), np + ".prime");
        if (!s.nebentypus.emplace(prime, int_from(field(neb[i], "order", np), np + ".order")).second)
            fail(np, "duplicate prime");
    }
    if (j.contains("good_dihedral")) {
        const auto& g = j["good_dihedral"];
        const std::string gp = path + ".good_dihedral";
        s.good_dihedral = GoodDihedral{int_from(field(g, "q", gp), gp + ".q"), int_from(field(g, "t", gp), gp + ".t")};
    }
    if (j.contains("mgd")) {
        const auto& m = j["mgd"];
        const std::string mp = path + ".mgd";
        s.mgd = Mgd{arith::to_u64(int_from(field(m, "p", mp), mp + ".p")),
                    arith::to_u64(int_from(field(m, "ram_order", mp), mp + ".ram_order"))};
    }
    const auto& ctx = field(j, "context", path);
    const auto kind = str_from(field(ctx, "kind", path + ".context"), path + ".context.kind");
    if (kind == "residual")
        s.context.kind = ContextKind::Residual;
    else if (kind == "padic_member")
        s.context.kind = ContextKind::PAdicMember;
    else
        fail(path + ".context.kind", "unknown value '" + kind + "'");
    s.context.p = int_from(field(ctx, "p", path + ".context"), path + ".context.p");
    if (j.contains("serre_alternatives")) s.serre_alternatives = ints_from(j["serre_alternatives"], path + ".serre_alternatives");
    return s;
}

json evidence_json(const EvidenceItem& e) {
    json j;
    j["kind"] = to_string(e.kind);
    if (!e.label.empty()) j["label"] = e.label;
    j["args"] = ints_json(e.args);
    return j;
}

EvidenceItem evidence_from(const json& j, const std::string& path) {
    EvidenceItem e;
    e.kind = enum_from(field(j, "kind", path), path + ".kind", &evidence_kind_from_string);
    if (j.contains("label")) e.label = str_from(j["label"], path + ".label");
    e.args = ints_from(field(j, "args", path), path + ".args");
    return e;
}

json link_json(const ChainLink& l) {
    json j;
    j["step"] = l.step;
    j["move"] = l.move;
    json params = json::object();
    for (const auto& [k, v] : l.params) params[k] = int_json(v);
    j["params"] = std::move(params);
    j["residual_char"] = int_json(l.witness.residual_char);
    j["local_condition"] = to_string(l.witness.local_condition);
    if (l.witness.structural) j["structural"] = true;
    if (!l.witness.assumptions.empty()) j["assumptions"] = l.witness.assumptions;
    json evidence = json::array();
    for (const auto& e : l.witness.image.evidence) evidence.push_back(evidence_json(e));
    j["image_cert"] = json{{"level", to_string(l.witness.image.level)}, {"evidence", std::move(evidence)}};
    j["serre_weights"] = ints_json(l.serre_weights);
    j["from"] = state_json(l.from);
    j["to"] = state_json(l.to);
    if (l.reversed) j["reversed"] = true;
    j["notes"] = l.notes;
    return j;
}

ChainLink link_from(const json& j, const std::string& path) {
    ChainLink l;
    const auto& step = field(j, "step", path);
    if (!step.is_number_integer()) fail(path + ".step", "expected an integer");
    l.step = step.get<int>();
    l.move = str_from(field(j, "move", path), path + ".move");
    const auto& params = field(j, "params", path);
    if (!params.is_object()) fail(path + ".params", "expected an object");
    for (const auto& [k, v] : params.items()) l.params[k] = int_from(v, path + ".params." + k);
    l.witness.residual_char = int_from(field(j, "residual_char", path), path + ".residual_char");
    l.witness.local_condition =
        enum_from(field(j, "local_condition", path), path + ".local_condition", &local_condition_from_string);
    if (j.contains("structural")) l.witness.structural = bool_from(j["structural"], path + ".structural");
    if (j.contains("assumptions")) {
        const auto& a = j["assumptions"];
        if (!a.is_array()) fail(path + ".assumptions", "expected an array");
        for (std::size_t i = 0; i < a.size(); ++i)
            l.witness.assumptions.push_back(str_from(a[i], path + ".assumptions[" + std::to_string(i) + "]"));
    }
    const auto& cert = field(j, "image_cert", path);
    l.witness.image.level = enum_from(field(cert, "level", path + ".image_cert"), path + ".image_cert.level", &image_level_from_string);
    const auto& ev = array_field(cert, "evidence", path + ".image_cert");
    for (std::size_t i = 0; i < ev.size(); ++i)
        l.witness.image.evidence.push_back(evidence_from(ev[i], path + ".image_cert.evidence[" + std::to_string(i) + "]"));
    l.serre_weights = ints_from(field(j, "serre_weights", path), path + ".serre_weights");
    l.from = state_from(field(j, "from", path), path + ".from");
    l.to = state_from(field(j, "to", path), path + ".to");
    if (j.contains("reversed")) l.reversed = bool_from(j["reversed"], path + ".reversed");
    l.notes = str_from(field(j, "notes", path), path + ".notes");
    return l;
}

json branch_json(const BranchCertificate& b) {
    json j;
    j["step"] = b.step;
    j["roots"] = ints_json(b.roots);
    json nodes = json::array();
    for (const auto& n : b.nodes)
        nodes.push_back(json{{"k", int_json(n.k)},
                             {"p", int_json(n.p)},
                             {"t", int_json(n.t)},
                             {"exponent_kind", n.exponent_kind},
                             {"k1", int_json(n.k1)},
                             {"k2", int_json(n.k2)}});
    j["nodes"] = std::move(nodes);
    j["leaves"] = ints_json(b.leaves);
    return j;
}

BranchCertificate branch_from(const json& j, const std::string& path) {
    BranchCertificate b;
    const auto& step = field(j, "step", path);
    if (!step.is_number_integer()) fail(path + ".step", "expected an integer");
    b.step = step.get<int>();
    b.roots = ints_from(field(j, "roots", path), path + ".roots");
    const auto& nodes = array_field(j, "nodes", path);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string np = path + ".nodes[" + std::to_string(i) + "]";
        const auto& n = nodes[i];
        b.nodes.push_back({int_from(field(n, "k", np), np + ".k"), int_from(field(n, "p", np), np + ".p"),
                           int_from(field(n, "t", np), np + ".t"),
                           str_from(field(n, "exponent_kind", np), np + ".exponent_kind"),
                           int_from(field(n, "k1", np), np + ".k1"), int_from(field(n, "k2", np), np + ".k2")});
    }
    b.leaves = ints_from(field(j, "leaves", path), path + ".leaves");
    return b;
}

json transcript_json(const Transcript& t) {
    json j;
    j["version"] = kTranscriptVersion;
    j["start"] = state_json(t.start);
    json links = json::array();
    for (const auto& l : t.links) links.push_back(link_json(l));
    j["links"] = std::move(links);
    json certs = json::array();
    for (const auto& c : t.external_certs)
        certs.push_back(json{{"label", c.label}, {"statement", c.statement}, {"provenance", c.provenance}});
    j["external_certs"] = std::move(certs);
    j["end"] = state_json(t.end);
    j["reversible"] = t.reversible;
    if (!t.branch_certificates.empty()) {
        json b = json::array();
        for (const auto& c : t.branch_certificates) b.push_back(branch_json(c));
        j["branch_certificates"] = std::move(b);
    }
    return j;
}

}  // namespace

std::string serialize(const Transcript& t) { return transcript_json(t).dump(2) + "\n"; }

std::string serialize_state(const ReprState& s) { return state_json(s).dump(); }

Transcript parse_transcript(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string("transcript is not valid JSON: ") + e.what());
    }
    const std::string root = "$";
    const auto version = str_from(field(j, "version", root), "$.version");
    if (version != kTranscriptVersion) fail("$.version", "unsupported version '" + version + "'");
    Transcript t;
    t.start = state_from(field(j, "start", root), "$.start");
    const auto& links = array_field(j, "links", root);
    t.links.reserve(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) t.links.push_back(link_from(links[i], "$.links[" + std::to_string(i) + "]"));
    const auto& certs = array_field(j, "external_certs", root);
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const std::string cp = "$.external_certs[" + std::to_string(i) + "]";
        t.external_certs.push_back({str_from(field(certs[i], "label", cp), cp + ".label"),
                                    str_from(field(certs[i], "statement", cp), cp + ".statement"),
                                    str_from(field(certs[i], "provenance", cp), cp + ".provenance")});
    }
    t.end = state_from(field(j, "end", root), "$.end");
    t.reversible = bool_from(field(j, "reversible", root), "$.reversible");
    if (j.contains("branch_certificates")) {
        const auto& b = j["branch_certificates"];
        if (!b.is_array()) fail("$.branch_certificates", "expected an array");
        for (std::size_t i = 0; i < b.size(); ++i)
            t.branch_certificates.push_back(branch_from(b[i], "$.branch_certificates[" + std::to_string(i) + "]"));
    }
    return t;
}

}  // namespace chainforge
