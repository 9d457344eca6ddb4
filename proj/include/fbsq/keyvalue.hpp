#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fbsq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` text. Blank lines and lines starting with `#`
/// are ignored; a key may contain at most one dot; duplicates are rejected.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, std::string_view source = "<input>");
KeyValues read_key_values(const std::filesystem::path& path);
/// One `key = value` line per entry, in key order.
void write_key_values(std::ostream& out, const KeyValues& kv);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

/// Shortest decimal text that parses back to the same double ("inf" for infinity).
std::string format_double(double x);

double parse_double(std::string_view text, std::string_view key);
long long parse_integer(std::string_view text, std::string_view key);
std::uint64_t parse_unsigned(std::string_view text, std::string_view key);
bool parse_bool(std::string_view text, std::string_view key);
/// Comma-separated list of doubles; empty items are rejected.
std::vector<double> parse_double_list(std::string_view text, std::string_view key);
std::string format_double_list(const std::vector<double>& values);

}  // namespace fbsq
