#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fracpq {

/// Flat `key = value` document. Blank lines and lines starting with '#' are
/// ignored; a repeated key is an error.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& origin() const { return origin_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  /// Typed lookups; malformed values throw malformed-config naming the key.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Keys not in `known`, in sorted order.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

 private:
  const Entry& at(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Entry> entries_;
};

double parse_double(const std::string& text, const std::string& key);
int parse_int(const std::string& text, const std::string& key);
std::uint64_t parse_uint64(const std::string& text, const std::string& key);
bool parse_bool(const std::string& text, const std::string& key);
std::vector<std::string> split_list(const std::string& text);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace fracpq
