#pragma once

// JSON kernel files:
//   {"prefix": [a_1, a_2, ...],
//    "tail": {"kind": "zero"} | {"kind": "parametric", "c": .., "q": .., "alpha": .., "beta": ..}}

#include <volterra/kernel.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace volterra {

class KernelParseError : public std::runtime_error {
public:
    KernelParseError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw KernelParseError(path + key, "missing");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw KernelParseError(path + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw KernelParseError(path + key, "not a finite number");
    return d;
}

}  // namespace detail

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw KernelParseError("<root>", "expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "prefix" && key != "tail") throw KernelParseError(key, "unknown field");
    if (!j.contains("prefix")) throw KernelParseError("prefix", "missing");
    if (!j.contains("tail")) throw KernelParseError("tail", "missing");

    const auto& jp = j.at("prefix");
    if (!jp.is_array()) throw KernelParseError("prefix", "expected an array of numbers");
    std::vector<double> prefix;
    prefix.reserve(jp.size());
    for (std::size_t i = 0; i < jp.size(); ++i) {
        const std::string field = "prefix[" + std::to_string(i) + "]";
        if (!jp[i].is_number()) throw KernelParseError(field, "expected a number");
        const double d = jp[i].get<double>();
        if (!std::isfinite(d)) throw KernelParseError(field, "not a finite number");
        prefix.push_back(d);
    }

    const auto& jt = j.at("tail");
    if (!jt.is_object()) throw KernelParseError("tail", "expected an object");
    if (!jt.contains("kind") || !jt.at("kind").is_string()) throw KernelParseError("tail.kind", "missing or not a string");
    const auto kind = jt.at("kind").get<std::string>();
    if (kind == "zero") {
        for (const auto& [key, _] : jt.items())
            if (key != "kind") throw KernelParseError("tail." + key, "unknown field");
        return KernelSpec::finite(std::move(prefix));
    }
    if (kind != "parametric") throw KernelParseError("tail.kind", "expected \"zero\" or \"parametric\"");
    for (const auto& [key, _] : jt.items())
        if (key != "kind" && key != "c" && key != "q" && key != "alpha" && key != "beta")
            throw KernelParseError("tail." + key, "unknown field");
    ParametricTail t;
    t.c = detail::require_number(jt, "c", "tail.");
    t.q = detail::require_number(jt, "q", "tail.");
    t.alpha = detail::require_number(jt, "alpha", "tail.");
    t.beta = detail::require_number(jt, "beta", "tail.");
    if (t.alpha < 0.0) throw KernelParseError("tail.alpha", "must be >= 0");
    if (t.beta < 0.0) throw KernelParseError("tail.beta", "must be >= 0");
    return {std::move(prefix), t};
}

inline KernelSpec parse_kernel(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw KernelParseError("<document>", e.what());
    }
    return kernel_from_json(j);
}

inline KernelSpec load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw KernelParseError("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kernel(ss.str());
}

inline nlohmann::json to_json(const KernelSpec& k) {
    nlohmann::json j;
    j["prefix"] = k.prefix();
    if (const auto* p = k.parametric_tail())
        j["tail"] = {{"kind", "parametric"}, {"c", p->c}, {"q", p->q}, {"alpha", p->alpha}, {"beta", p->beta}};
    else
        j["tail"] = {{"kind", "zero"}};
    return j;
}

}  // namespace volterra
