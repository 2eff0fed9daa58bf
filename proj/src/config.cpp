#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chainforge/error.hpp"
#include "chainforge/pipeline.hpp"

namespace chainforge::pipeline {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_natural(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const auto n = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "config key '" + key + "': expected a natural number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::ParseError, "config key '" + key + "': expected true or false, got '" + v + "'");
}

void apply(PipelineConfig& c, const std::string& key, const std::string& v) {
    if (key == "B") {
        c.B = arith::from_u64(to_natural(key, v));
    } else if (key == "max_weight") {
        c.max_weight = to_natural(key, v);
    } else if (key == "search_budget") {
        c.search_budget = to_natural(key, v);
    } else if (key == "strict_bound") {
        c.strict_bound = to_bool(key, v);
    } else if (key == "step10_data") {
        if (v.empty())
            c.step10_data.reset();
        else
            c.step10_data = v;
    } else if (key == "axioms_path") {
        c.axioms_path = v;
    } else if (key == "bertrand_range") {
        c.bertrand_range = to_natural(key, v);
    } else if (key == "shared_r") {
        if (v.empty())
            c.shared_r.reset();
        else
            c.shared_r = arith::from_u64(to_natural(key, v));
    } else {
        throw Error(ErrorKind::ParseError, "unknown config key '" + key + "'");
    }
}

}  // namespace

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
        }
        for (const auto& [key, v] : j.items()) {
            if (v.is_string())
                apply(base, key, v.get<std::string>());
            else if (v.is_boolean())
                apply(base, key, v.get<bool>() ? "true" : "false");
            else if (v.is_number_unsigned())
                apply(base, key, std::to_string(v.get<std::uint64_t>()));
            else if (v.is_null())
                apply(base, key, "");
            else
                throw Error(ErrorKind::ParseError, "config key '" + key + "': unsupported value " + v.dump());
        }
    } else {
        std::istringstream in{std::string(text)};
        std::string line;
        for (int n = 1; std::getline(in, line); ++n) {
            const auto hash = line.find('#');
            const std::string l = trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (l.empty()) continue;
            const auto eq = l.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorKind::ParseError, "config line " + std::to_string(n) + ": expected key = value");
            apply(base, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
        }
    }
    base.check();
    return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::optional<std::string> config_path_from_env() {
    const char* v = std::getenv("CHAINFORGE_CONFIG");
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace chainforge::pipeline
