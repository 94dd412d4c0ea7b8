#pragma once

// Internal JSON/CSV plumbing shared by the persistence and pipeline
// translation units. Not part of the public API.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "f2gan/classify.hpp"
#include "f2gan/fdi.hpp"
#include "f2gan/gan.hpp"
#include "f2gan/types.hpp"
#include "json.hpp"

namespace f2gan::jsonio {

using nlohmann::json;

/// Objects dump with sorted keys and shortest round-trip decimals, so
/// identical values always produce identical bytes.
void write_json_file(const json& j, const std::string& path);

/// Parses, then checks format_version and kind; failures name the file.
json read_json_file(const std::string& path, const std::string& expected_kind);

json stamped(const char* kind);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& what);

GanVariantKind variant_kind_from_string(const std::string& s);
AttackKind attack_kind_from_string(const std::string& s);

json architecture_to_json(const GanArchitecture& a);
GanArchitecture architecture_from_json(const json& j);

json normalization_to_json(const NormalizationParams& p);
NormalizationParams normalization_from_json(const json& j);

json svm_config_to_json(const SvmConfig& c);
SvmConfig svm_config_from_json(const json& j);
json ann_config_to_json(const AnnConfig& c);
AnnConfig ann_config_from_json(const json& j);

/// Rejects keys outside the allowed set, so config typos cannot pass silently.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where);

template <class T>
json index_list_to_json(const std::vector<T>& xs) {
    json out = json::array();
    for (T x : xs) out.push_back(static_cast<long long>(x));
    return out;
}

template <class T>
std::vector<T> index_list_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array");
    std::vector<T> out;
    out.reserve(j.size());
    for (const json& x : j) out.push_back(static_cast<T>(x.get<long long>()));
    return out;
}

/// Rethrows nlohmann access errors (missing key, wrong type) as ConfigError
/// with the offending file in front.
template <class Fn>
auto with_context(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// %.17g: enough digits that text -> double -> text is a fixed point.
inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& cell, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw ConfigError(where + ": bad numeric value '" + cell + "'");
    return v;
}

}  // namespace f2gan::jsonio
