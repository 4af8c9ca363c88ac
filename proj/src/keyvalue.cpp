#include "fracpq/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracpq/error.hpp"

namespace fracpq {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* expected) {
  throw Error(ErrorCode::malformed_config, "key '" + key + "': cannot read '" + text + "' as " + expected);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::malformed_config,
                  origin + ":" + std::to_string(line) + ": expected 'key = value', got '" + s + "'");
    }
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::malformed_config, origin + ":" + std::to_string(line) + ": empty key");
    }
    if (out.entries_.count(key)) {
      throw Error(ErrorCode::malformed_config, origin + ":" + std::to_string(line) + ": key '" + key +
                                                   "' repeats line " + std::to_string(out.entries_[key].line));
    }
    out.entries_[key] = Entry{trim(s.substr(eq + 1)), line};
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const KeyValueFile::Entry& KeyValueFile::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::malformed_config, "missing key '" + key + "' in " + origin_);
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) const { return at(key).value; }
double KeyValueFile::get_double(const std::string& key) const { return parse_double(at(key).value, key); }
int KeyValueFile::get_int(const std::string& key) const { return parse_int(at(key).value, key); }
std::uint64_t KeyValueFile::get_uint64(const std::string& key) const { return parse_uint64(at(key).value, key); }
bool KeyValueFile::get_bool(const std::string& key) const { return parse_bool(at(key).value, key); }

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(at(key).value)) out.push_back(parse_double(item, key));
  return out;
}

std::vector<std::string> KeyValueFile::get_strings(const std::string& key) const {
  return split_list(at(key).value);
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) out.push_back(key);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    bad_value(key, text, "a finite real");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, text, "an integer");
  return v;
}

std::uint64_t parse_uint64(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, text, "a nonnegative integer");
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, text, "a boolean");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace fracpq
