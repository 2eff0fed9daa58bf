#include "chainforge/cli.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainforge/error.hpp"
#include "chainforge/ingest.hpp"
#include "chainforge/lemmas.hpp"
#include "chainforge/pipeline.hpp"
#include "chainforge/transcript_json.hpp"
#include "chainforge/validate.hpp"
#include "chainforge/wrgc.hpp"

namespace chainforge::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json int_json(const Integer& n) {
    if (arith::fits_u64(n)) return json(arith::to_u64(n));
    return json(n.get_str());
}

struct Overrides {
    std::string config;
    std::string axioms;
    std::string data;
    std::uint64_t B = 0;
    std::uint64_t max_weight = 0;
    std::uint64_t search_budget = 0;
    bool strict = false;
};

// Defaults, then CHAINFORGE_CONFIG, then --config, then individual flags.
pipeline::PipelineConfig resolve_config(const Overrides& o) {
    auto cfg = pipeline::default_config();
    if (const auto env = pipeline::config_path_from_env()) cfg = pipeline::load_config(*env, cfg);
    if (!o.config.empty()) cfg = pipeline::load_config(o.config, cfg);
    if (!o.axioms.empty()) cfg.axioms_path = o.axioms;
    if (!o.data.empty()) cfg.step10_data = o.data;
    if (o.B) cfg.B = arith::from_u64(o.B);
    if (o.max_weight) cfg.max_weight = o.max_weight;
    if (o.search_budget) cfg.search_budget = o.search_budget;
    if (o.strict) cfg.strict_bound = true;
    cfg.check();
    return cfg;
}

void add_config_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "config file (key = value or JSON)");
    cmd->add_option("--axioms", o.axioms, "axiom sidecar JSON");
    cmd->add_option("--B", o.B, "good-dihedral bound (> 68)");
    cmd->add_option("--max-weight", o.max_weight, "largest supported starting weight");
    cmd->add_option("--search-budget", o.search_budget, "candidate budget of the q search");
    cmd->add_flag("--strict-bound", o.strict, "raise B above max(68, k, 2r)");
}

struct Output {
    std::ostream& out;
    bool as_json = false;
    json doc;
    std::ostringstream text;

    int finish(bool ok) {
        if (as_json) {
            doc["ok"] = ok;
            out << doc.dump(2) << "\n";
        } else {
            out << text.str();
            out << (ok ? "OK" : "FAILED") << "\n";
        }
        return ok ? 0 : 1;
    }
};

int cmd_wrgc_tables(Output& o) {
    bool ok = true;
    auto table = [&](const char* name, const std::vector<wrgc::TableRow>& rows, wrgc::Mode mode) {
        o.text << name << "\n"
               << "   k    p   d   m   t  esc   k1   k2 | computed                    | status\n";
        json arr = json::array();
        for (const auto& r : rows) {
            const auto s = wrgc::wrgc_step(Integer(r.k), mode);
            const bool esc = s.exponent_kind == wrgc::ExponentKind::Escape;
            const bool match = s.p == r.p && s.d == r.d && s.m == r.m && s.exponent_used == r.t && esc == r.escape &&
                               s.k1 == r.k1 && s.k2 == r.k2;
            ok = ok && match;
            o.text << std::setw(4) << r.k << std::setw(5) << r.p << std::setw(4) << r.d << std::setw(4) << r.m << std::setw(4)
                   << r.t << std::setw(5) << (r.escape ? "t'" : "t") << std::setw(5) << r.k1 << std::setw(5) << r.k2 << " | p="
                   << std::setw(3) << s.p.get_str() << " d=" << s.d.get_str() << " m=" << std::setw(2) << s.m.get_str()
                   << " t=" << std::setw(2) << s.exponent_used.get_str() << (esc ? "'" : " ") << " -> " << std::setw(2)
                   << s.k1.get_str() << "," << std::setw(2) << s.k2.get_str() << "  | " << (match ? "MATCH" : "MISMATCH") << "\n";
            arr.push_back({{"k", r.k},
                           {"p", int_json(s.p)},
                           {"d", int_json(s.d)},
                           {"m", int_json(s.m)},
                           {"t", int_json(s.exponent_used)},
                           {"escape", esc},
                           {"k1", int_json(s.k1)},
                           {"k2", int_json(s.k2)},
                           {"match", match}});
        }
        return arr;
    };
    o.doc["step2"] = table("Step 2 (canonical exponents)", wrgc::step2_reference_rows(), wrgc::Mode::Step2);
    o.doc["step6"] = table("Step 6 (escape exponent t' where marked)", wrgc::step6_reference_rows(), wrgc::Mode::Step6);
    return o.finish(ok);
}

int cmd_bertrand(Output& o, std::uint64_t max, std::uint64_t consequence_max) {
    const auto t0 = Clock::now();
    const auto r = wrgc::verify_bertrand_ratio(max);
    const auto c = wrgc::verify_bertrand_consequence(consequence_max);
    const double secs = seconds_since(t0);
    o.text << "max p_{n+1}/p_n for 37 <= p_n, p_{n+1} <= " << max << ": " << std::setprecision(8) << r.ratio << " at (" << r.lower
           << ", " << r.upper << "), " << r.primes_scanned << " primes scanned, " << (r.below_constant ? "< 1.144" : ">= 1.144")
           << "\n(p-1)/(k-2) < 6/5 for even k in [38, " << consequence_max << "]: " << (c.holds ? "holds" : "FAILS")
           << "; worst k = " << c.worst_k << ", p = " << c.worst_p << "\n"
           << "time " << std::setprecision(3) << secs << " s\n";
    o.doc["max"] = max;
    o.doc["ratio"] = r.ratio;
    o.doc["lower"] = r.lower;
    o.doc["upper"] = r.upper;
    o.doc["primes_scanned"] = r.primes_scanned;
    o.doc["below_constant"] = r.below_constant;
    o.doc["consequence"] = {{"max_k", consequence_max}, {"holds", c.holds}, {"worst_k", c.worst_k}, {"worst_p", c.worst_p}};
    o.doc["seconds"] = secs;
    return o.finish(r.below_constant && c.holds);
}

int cmd_highschool(Output& o, std::uint64_t max) {
    const auto t0 = Clock::now();
    const auto r = wrgc::verify_highschool(max);
    o.text << "p' < 0.6 m and t' < 0.8 m for odd m in [7, " << max << "]: " << (r.holds ? "holds" : "FAILS") << " (" << r.checked
           << " values)";
    if (r.first_failure) o.text << ", first failure m = " << *r.first_failure;
    o.text << "\n";
    o.doc["max"] = max;
    o.doc["holds"] = r.holds;
    o.doc["checked"] = r.checked;
    if (r.first_failure) o.doc["first_failure"] = *r.first_failure;
    o.doc["seconds"] = seconds_since(t0);
    return o.finish(r.holds);
}

int cmd_magic(Output& o) {
    const auto m = lemmas::lemma_magic_check();
    o.text << m.result.detail << "\n";
    o.doc["order_of_q"] = m.order_of_q;
    o.doc["psi_q_order"] = m.psi_q_order;
    json shapes = json::array();
    for (const auto& s : m.shapes) shapes.push_back({{"shape", s.name}, {"required_value", s.required}});
    o.doc["shapes"] = shapes;
    o.doc["shapes_agree"] = m.shapes_agree;
    o.doc["excluded"] = m.result.excluded;
    return o.finish(m.result.excluded);
}

int cmd_step7(Output& o, const pipeline::PipelineConfig& cfg) {
    const auto axioms = lemmas::AxiomStore::load(cfg.axioms_path);
    bool ok = true;
    json arr = json::array();
    for (const auto& r : pipeline::step7_verify_internals(axioms)) {
        ok = ok && r.excluded;
        o.text << (r.excluded ? "excluded  " : "OPEN      ") << r.rule.describe() << ": " << r.detail << "\n";
        arr.push_back({{"rule", r.rule.describe()}, {"excluded", r.excluded}, {"detail", r.detail}});
    }
    const auto ce = lemmas::step7_character_exclusion(axioms, 7, 29);
    const bool square = arith::is_square_mod(Integer(43), Integer(53));
    o.text << "43 is a square mod 53: " << (square ? "yes" : "no") << "; character pairs checked: " << ce.pairs_checked
           << "; survivors:";
    json surv = json::array();
    for (const auto& s : ce.survivors) {
        o.text << " (" << s.i << "," << s.j << ")";
        surv.push_back({s.i, s.j});
    }
    o.text << "; conjugacy " << (ce.conjugacy_fails ? "fails" : "holds") << "\n";
    ok = ok && square;
    o.doc["exclusions"] = arr;
    o.doc["square_43_mod_53"] = square;
    o.doc["pairs_checked"] = ce.pairs_checked;
    o.doc["survivors"] = surv;
    o.doc["conjugacy_fails"] = ce.conjugacy_fails;
    return o.finish(ok);
}

int cmd_step10(Output& o, const std::string& data) {
    bool ok = true;
    json shapes = json::array();
    for (const auto& s : ingest::step10_shapes()) {
        const auto q = ingest::trace_polynomial(s, 8, 43);
        o.text << "shape " << s.name << ": Q = (x - " << s.shift << ")^8 - " << s.scale << "^8 = " << q.to_string() << "\n";
        shapes.push_back({{"shape", s.name}, {"q", q.to_string()}});
    }
    o.doc["shapes"] = shapes;
    json recs = json::array();
    if (!data.empty()) {
        for (const auto& rec : ingest::load_newform_data(data)) {
            const auto d = ingest::step10_check_detail(rec, 43);
            ok = ok && d.result.excluded;
            o.text << (rec.label.empty() ? "record" : rec.label) << ": " << (d.result.excluded ? "no common root" : "COMMON ROOT")
                   << " (" << d.result.detail << ")\n";
            recs.push_back({{"label", rec.label}, {"level", rec.level}, {"excluded", d.result.excluded}, {"detail", d.result.detail}});
        }
    } else {
        o.text << "no Hecke data supplied; only the trace polynomials were derived\n";
    }
    o.doc["records"] = recs;
    return o.finish(ok);
}

void summarize(std::ostream& os, json& doc, const Transcript& t) {
    std::map<int, std::size_t> per_step;
    for (const auto& l : t.links) ++per_step[l.step];
    os << "start " << t.start.describe() << "\nend   " << t.end.describe() << "\n" << t.links.size() << " links;";
    json steps = json::object();
    for (const auto& [s, n] : per_step) {
        os << " step " << s << ": " << n;
        steps[std::to_string(s)] = n;
    }
    os << "\n";
    doc["links"] = t.links.size();
    doc["links_per_step"] = steps;
    doc["end"] = t.end.describe();
}

int cmd_chain_build(Output& o, const pipeline::PipelineConfig& cfg, std::uint64_t weight, const std::string& out_path) {
    const auto t0 = Clock::now();
    const pipeline::ChainBuilder builder(cfg);
    const auto gd = builder.good_dihedral_for(arith::from_u64(weight));
    const double search = seconds_since(t0);
    const auto t = builder.build(arith::from_u64(weight), gd);
    pipeline::emit_transcript(t, out_path, builder.validate_options());
    o.text << "good-dihedral r = " << gd.r.get_str() << ", t = " << gd.t.get_str() << ", q = " << gd.q.get_str() << " ("
           << mpz_sizeinbase(gd.q.get_mpz_t(), 2) << " bits), B = " << gd.B.get_str() << "\n";
    summarize(o.text, o.doc, t);
    o.text << "transcript written to " << out_path << " (validated)\n";
    o.doc["weight"] = weight;
    o.doc["good_dihedral"] = {{"r", int_json(gd.r)}, {"t", int_json(gd.t)}, {"q", int_json(gd.q)}, {"B", int_json(gd.B)}};
    o.doc["transcript"] = out_path;
    o.doc["search_seconds"] = search;
    o.doc["seconds"] = seconds_since(t0);
    return o.finish(true);
}

int cmd_validate(Output& o, const pipeline::PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto t = parse_transcript(ss.str());
    const pipeline::ChainBuilder builder(cfg);
    const auto report = validate(t, builder.validate_options());
    o.text << report.describe() << "\n";
    for (const auto& n : report.notes) o.text << "  note: " << n << "\n";
    json failures = json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"link", f.link_index ? json(*f.link_index) : json(nullptr)}, {"rule", f.rule}, {"detail", f.detail}});
    o.doc["links"] = report.links_checked;
    o.doc["failures"] = failures;
    o.doc["notes"] = report.notes;
    return o.finish(report.ok());
}

int cmd_sweep(Output& o, pipeline::PipelineConfig cfg, std::uint64_t from, std::uint64_t to, unsigned threads) {
    if (from % 2) ++from;
    if (from < 12 || to < from || to > cfg.max_weight)
        throw Error(ErrorKind::UsageError, "sweep range must be even weights within [12, max_weight]");
    const auto t0 = Clock::now();
    const auto gd = pipeline::shared_good_dihedral(to, cfg);
    const double search = seconds_since(t0);
    cfg.shared_r = gd.r;
    const pipeline::ChainBuilder builder(cfg);
    ValidationCache cache;

    std::vector<std::uint64_t> weights;
    for (auto k = from; k <= to; k += 2) weights.push_back(k);
    struct Row {
        bool ok = false;
        std::size_t links = 0;
        std::string detail;
    };
    std::vector<Row> rows(weights.size());
    std::atomic<std::size_t> next{0};
    const auto t1 = Clock::now();
    auto worker = [&] {
        for (std::size_t i; (i = next++) < weights.size();) {
            auto& row = rows[i];
            try {
                const auto t = builder.build(arith::from_u64(weights[i]), gd);
                const auto report = validate(t, builder.validate_options(&cache));
                row.ok = report.ok();
                row.links = t.links.size();
                if (!row.ok) row.detail = report.describe();
            } catch (const std::exception& e) {
                row.detail = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    const double sweep = seconds_since(t1);

    std::size_t failed = 0;
    json arr = json::array();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& r = rows[i];
        if (!r.ok) {
            ++failed;
            o.text << "k0 = " << weights[i] << ": FAILED " << r.detail << "\n";
        }
        arr.push_back({{"k0", weights[i]}, {"ok", r.ok}, {"links", r.links}, {"detail", r.detail}});
    }
    o.text << "good-dihedral r = " << gd.r.get_str() << ", t = " << gd.t.get_str() << ", q = " << gd.q.get_str() << " ("
           << std::setprecision(3) << search << " s)\n"
           << weights.size() - failed << "/" << weights.size() << " weights built and validated in " << sweep << " s\n";
    o.doc["from"] = from;
    o.doc["to"] = to;
    o.doc["good_dihedral"] = {{"r", int_json(gd.r)}, {"t", int_json(gd.t)}, {"q", int_json(gd.q)}, {"B", int_json(gd.B)}};
    o.doc["search_seconds"] = search;
    o.doc["sweep_seconds"] = sweep;
    o.doc["results"] = arr;
    return o.finish(failed == 0);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"chainforge: safe congruence chains between modular forms"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    Overrides ov;
    std::uint64_t weight = 0, max = 0, consequence_max = 1'000'000, from = 12, to = 0;
    unsigned threads = 0;
    std::string out_path, transcript, data;

    auto* build = app.add_subcommand("chain-build", "build, validate and write the transcript for one weight");
    build->add_option("--weight", weight, "even starting weight >= 12")->required();
    build->add_option("--out", out_path, "transcript path")->required();
    build->add_option("--data", ov.data, "newform JSON for the mod-43 check");
    add_config_flags(build, ov);

    auto* tables = app.add_subcommand("verify-wrgc-tables", "reproduce the weight-reduction tables");

    auto* bertrand = app.add_subcommand("verify-bertrand", "maximal consecutive prime ratio");
    bertrand->add_option("--max", max, "largest prime scanned (default: configured range)");
    bertrand->add_option("--consequence-max", consequence_max, "largest even k for (p-1)/(k-2) < 6/5");
    add_config_flags(bertrand, ov);

    auto* hs = app.add_subcommand("verify-highschool", "escape exponent bounds for odd m");
    std::uint64_t hs_max = 1'000'000;
    hs->add_option("--max", hs_max, "largest odd m");

    auto* magic = app.add_subcommand("verify-lemma-magic", "irreducibility mod 11 of the step-8 form");

    auto* step7 = app.add_subcommand("verify-step7", "every exclusion inside the step-7 reductions");
    add_config_flags(step7, ov);

    auto* step10 = app.add_subcommand("verify-step10", "trace polynomials and the mod-43 common-root check");
    step10->add_option("--data", data, "newform JSON");

    auto* val = app.add_subcommand("validate", "re-check a transcript file");
    val->add_option("--transcript", transcript, "transcript JSON")->required();
    val->add_option("--data", ov.data, "newform JSON for the mod-43 check");
    add_config_flags(val, ov);

    auto* sweep = app.add_subcommand("sweep", "build and validate every even weight in a range");
    sweep->add_option("--from", from, "first weight");
    sweep->add_option("--to", to, "last weight")->required();
    sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
    sweep->add_option("--data", ov.data, "newform JSON for the mod-43 check");
    add_config_flags(sweep, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    Output o{out, as_json, json::object(), {}};
    try {
        if (*tables) return (o.doc["command"] = "verify-wrgc-tables", cmd_wrgc_tables(o));
        if (*hs) return (o.doc["command"] = "verify-highschool", cmd_highschool(o, hs_max));
        if (*magic) return (o.doc["command"] = "verify-lemma-magic", cmd_magic(o));
        if (*step10) return (o.doc["command"] = "verify-step10", cmd_step10(o, data));
        pipeline::PipelineConfig cfg;
        try {
            cfg = resolve_config(ov);
        } catch (const Error& e) {
            err << "configuration error: " << e.what() << "\n";
            return 2;
        }
        if (*bertrand) return (o.doc["command"] = "verify-bertrand", cmd_bertrand(o, max ? max : cfg.bertrand_range, consequence_max));
        if (*step7) return (o.doc["command"] = "verify-step7", cmd_step7(o, cfg));
        if (*build) return (o.doc["command"] = "chain-build", cmd_chain_build(o, cfg, weight, out_path));
        if (*val) return (o.doc["command"] = "validate", cmd_validate(o, cfg, transcript));
        if (*sweep) return (o.doc["command"] = "sweep", cmd_sweep(o, cfg, from, to, threads));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::UsageError || e.kind() == ErrorKind::WeightOutOfRange) {
            err << "usage error: " << e.what() << "\n";
            return 2;
        }
        if (as_json) {
            o.doc["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
            return o.finish(false);
        }
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace chainforge::cli
