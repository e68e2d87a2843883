#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tvs {

// Plain-text run configuration: one `key = value` pair per line, `#` starts
// a comment, blank lines ignored. The schema is strict: parsing against a
// known key set rejects anything it does not recognize.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  // Throws listing every unknown key.
  void validate_keys(const std::set<std::string>& known) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_flag(const std::string& key, bool fallback) const;  // on/off
  std::optional<long> get_optional_long(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }
  std::string serialize() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace tvs
