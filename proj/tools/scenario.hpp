#pragma once
// Scenario files: a JSON object whose keys are checked against a fixed table
// before anything runs. Command-line flags are merged in as the same keys.

#include "fnv/core.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace fnv::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& task_names() {
    static const std::vector<std::string> t{"verify", "curvature", "growth", "fmt", "crofton", "order", "volume"};
    return t;
}

enum class Kind { String, Number, Integer, Bool, Window, StringOrList, ComplexList, Object };

struct KeySpec {
    Kind kind;
    const std::map<std::string, KeySpec>* children = nullptr;
};

inline const std::map<std::string, KeySpec>& base_keys() {
    static const std::map<std::string, KeySpec> k{
        {"n", {Kind::Integer}}, {"c", {Kind::Number}}, {"sigma_floor", {Kind::Number}}};
    return k;
}
inline const std::map<std::string, KeySpec>& subject_keys() {
    static const std::map<std::string, KeySpec> k{
        {"map", {Kind::String}}, {"sigma", {Kind::String}}, {"section", {Kind::String}}, {"kind", {Kind::String}}};
    return k;
}
inline const std::map<std::string, KeySpec>& grid_keys() {
    static const std::map<std::string, KeySpec> k{{"r_min", {Kind::Number}},      {"r_max", {Kind::Number}},
                                                  {"per_decade", {Kind::Integer}}, {"r", {Kind::Number}},
                                                  {"s", {Kind::Number}},           {"window", {Kind::Window}}};
    return k;
}
inline const std::map<std::string, KeySpec>& budget_keys() {
    static const std::map<std::string, KeySpec> k{
        {"samples", {Kind::Integer}}, {"seed", {Kind::Integer}},  {"angular", {Kind::Integer}},
        {"fiber", {Kind::Integer}},   {"probes", {Kind::Integer}}, {"k", {Kind::Integer}},
        {"mc", {Kind::Integer}}};
    return k;
}
inline const std::map<std::string, KeySpec>& point_keys() {
    static const std::map<std::string, KeySpec> k{{"z", {Kind::ComplexList}}, {"v", {Kind::ComplexList}}};
    return k;
}
inline const std::map<std::string, KeySpec>& top_keys() {
    static const std::map<std::string, KeySpec> k{
        {"task", {Kind::String}},          {"suite", {Kind::String}},          {"metric", {Kind::StringOrList}},
        {"kappa", {Kind::Number}},         {"lambda", {Kind::Number}},         {"output", {Kind::String}},
        {"plot", {Kind::Bool}},            {"base", {Kind::Object, &base_keys()}},
        {"subject", {Kind::Object, &subject_keys()}}, {"grid", {Kind::Object, &grid_keys()}},
        {"budget", {Kind::Object, &budget_keys()}},   {"point", {Kind::Object, &point_keys()}}};
    return k;
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::SchemaError, (path.empty() ? std::string("scenario") : path) + ": " + what);
}

inline void check_kind(const json& v, Kind kind, const std::string& path) {
    auto is_pair = [](const json& p) { return p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(); };
    switch (kind) {
    case Kind::String:
        if (!v.is_string()) schema_error(path, "expected a string");
        return;
    case Kind::Number:
        if (!v.is_number() || !std::isfinite(v.get<double>())) schema_error(path, "expected a finite number");
        return;
    case Kind::Integer:
        if (!v.is_number_integer()) schema_error(path, "expected an integer");
        return;
    case Kind::Bool:
        if (!v.is_boolean()) schema_error(path, "expected true or false");
        return;
    case Kind::Window:
        if (!is_pair(v) || !(v[0].get<double>() > 0.0 && v[1].get<double>() > v[0].get<double>()))
            schema_error(path, "expected [lo, hi] with 0 < lo < hi");
        return;
    case Kind::StringOrList:
        if (v.is_string()) return;
        if (!v.is_array() || v.empty()) schema_error(path, "expected a string or a nonempty list of strings");
        for (const auto& x : v)
            if (!x.is_string()) schema_error(path, "expected a list of strings");
        return;
    case Kind::ComplexList:
        if (!v.is_array() || v.empty()) schema_error(path, "expected a nonempty list of [re, im] pairs");
        for (const auto& x : v)
            if (!is_pair(x)) schema_error(path, "expected [re, im] pairs");
        return;
    case Kind::Object:
        if (!v.is_object()) schema_error(path, "expected an object");
        return;
    }
}

inline void validate_object(const json& obj, const std::map<std::string, KeySpec>& keys, const std::string& path) {
    if (!obj.is_object()) schema_error(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        const std::string p = path.empty() ? key : path + "." + key;
        const auto it = keys.find(key);
        if (it == keys.end()) schema_error(p, "unknown key");
        check_kind(value, it->second.kind, p);
        if (it->second.children) validate_object(value, *it->second.children, p);
    }
}

/// Key table check plus the value constraints that do not depend on the task.
inline void validate_scenario(const json& s) {
    validate_object(s, top_keys(), "");
    if (!s.contains("task")) schema_error("task", "missing");
    const auto task = s["task"].get<std::string>();
    if (std::find(task_names().begin(), task_names().end(), task) == task_names().end())
        schema_error("task", "unknown task '" + task + "'");
    if (s.contains("suite")) {
        static const std::set<std::string> suites{"identities", "phi_tilde", "base", "sphere", "all"};
        if (!suites.count(s["suite"].get<std::string>())) schema_error("suite", "unknown suite");
    }
    auto positive = [&](const json& obj, const char* key, const std::string& path) {
        if (obj.contains(key) && !(obj[key].get<double>() > 0.0)) schema_error(path + "." + key, "must be positive");
    };
    if (s.contains("grid")) {
        for (const char* k : {"r_min", "r_max", "per_decade", "r"}) positive(s["grid"], k, "grid");
        if (s["grid"].contains("s") && s["grid"]["s"].get<double>() < 0.0) schema_error("grid.s", "must be >= 0");
    }
    if (s.contains("budget"))
        for (const char* k : {"samples", "angular", "fiber", "probes", "k", "mc"}) positive(s["budget"], k, "budget");
    if (s.contains("budget") && s["budget"].contains("seed") && s["budget"]["seed"].get<long long>() < 0)
        schema_error("budget.seed", "must be >= 0");
    if (s.contains("base")) positive(s["base"], "n", "base");
}

/// Parses and validates a scenario file; every failure is a SchemaError.
inline json load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::SchemaError, "cannot read scenario file '" + path + "'");
    json s;
    try {
        s = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, "malformed JSON in '" + path + "': " + e.what());
    }
    if (!s.is_object()) throw Error(ErrorKind::SchemaError, "scenario must be a JSON object");
    return s;
}

/// "re:im,re:im" (or plain reals) into a list of [re, im] pairs.
inline json parse_complex_list(const std::string& text) {
    json out = json::array();
    std::stringstream in(text);
    for (std::string tok; std::getline(in, tok, ',');) {
        const auto colon = tok.find(':');
        try {
            const double re = std::stod(tok.substr(0, colon));
            const double im = colon == std::string::npos ? 0.0 : std::stod(tok.substr(colon + 1));
            out.push_back({re, im});
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaError, "cannot parse complex value '" + tok + "'");
        }
    }
    if (out.empty()) throw Error(ErrorKind::SchemaError, "empty complex list");
    return out;
}

/// Typed lookup with a default; the scenario has already been validated.
template <class T>
T get_or(const json& s, const json::json_pointer& p, T fallback) {
    return s.contains(p) ? s.at(p).get<T>() : fallback;
}

}  // namespace fnv::cli
