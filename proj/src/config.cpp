#include "tvs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tvs {

namespace {

std::string trim(const std::string& s) {
  std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    if (config.entries_.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    config.entries_[key] = value;
  }
  return config;
}

void KeyValueConfig::validate_keys(const std::set<std::string>& known) const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (!known.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw std::invalid_argument("config: unknown keys: " + unknown);
}

bool KeyValueConfig::has(const std::string& key) const {
  auto it = entries_.find(key);
  return it != entries_.end() && !it->second.empty();
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() || it->second.empty() ? fallback : it->second;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string& value = entries_.at(key);
  char* end = nullptr;
  long parsed = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw std::invalid_argument("config: key '" + key +
                                "' is not an integer: " + value);
  return parsed;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  if (!has(key)) return fallback;
  const std::string& value = entries_.at(key);
  char* end = nullptr;
  double parsed = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw std::invalid_argument("config: key '" + key +
                                "' is not a number: " + value);
  return parsed;
}

bool KeyValueConfig::get_flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& value = entries_.at(key);
  if (value == "on" || value == "true" || value == "yes" || value == "1")
    return true;
  if (value == "off" || value == "false" || value == "no" || value == "0")
    return false;
  throw std::invalid_argument("config: key '" + key +
                              "' must be on or off, got: " + value);
}

std::optional<long> KeyValueConfig::get_optional_long(
    const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_long(key, 0);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

}  // namespace tvs
