#include "fbsq/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fbsq {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view text, const char* what) {
  throw ConfigError(std::string(key) + ": expected " + what + ", got '" + std::string(text) + "'");
}

}  // namespace

KeyValues parse_key_values(std::istream& in, std::string_view source) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto where = std::string(source) + ":" + std::to_string(lineno) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "missing '='");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + "empty key");
    for (char c : key) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
      if (!ok) throw ConfigError(where + "invalid character in key '" + key + "'");
    }
    const auto dot = key.find('.');
    if (dot != std::string::npos &&
        (dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos)) {
      throw ConfigError(where + "key '" + key + "' must be name or section.name");
    }
    if (!kv.emplace(key, value).second) throw ConfigError(where + "duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "a number");
  }
  return x;
}

long long parse_integer(std::string_view text, std::string_view key) {
  text = trim(text);
  long long x = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "an integer");
  }
  return x;
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view key) {
  text = trim(text);
  std::uint64_t x = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "a nonnegative integer");
  }
  return x;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(key, text, "true or false");
}

std::vector<double> parse_double_list(std::string_view text, std::string_view key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? text.npos
                                                                              : comma - start));
    if (item.empty()) bad_value(key, text, "a comma-separated list of numbers");
    out.push_back(parse_double(item, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double_list(const std::vector<double>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << format_double(values[i]);
  return os.str();
}

}  // namespace fbsq
