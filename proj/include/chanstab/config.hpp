#pragma once

// Configuration files: JSON or TOML, both read into a JSON document. Numeric
// entries may also be short expressions such as "2*pi" or "sqrt(3)".

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace chanstab {

using Json = nlohmann::json;

/// TOML when the extension is .toml, JSON otherwise.
Json load_config(const std::filesystem::path& path);
Json parse_toml(std::string_view text);

/// Arithmetic over numbers, pi, sqrt(), + - * / ^ and parentheses.
double eval_expression(std::string_view text);

/// Number or expression string at `key`, or `fallback` when absent.
double get_number(const Json& obj, const std::string& key, double fallback);
/// Same, but the key must exist.
double require_number(const Json& obj, const std::string& key);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const Json& cfg);

}  // namespace chanstab
