#include "nof1/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nof1/dataset.hpp"
#include "nof1/errors.hpp"

namespace nof1 {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = first + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[trim(key)] = trim(value);
}

void KeyValueConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  return v ? to_double(key, *v) : fallback;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  long out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (v->empty() || res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
  }
  return out;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (v->empty() || res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + *v + "'");
  }
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (const auto v = raw(key)) {
    for (const auto& item : split_list(*v)) out.push_back(to_double(key, item));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
  const auto v = raw(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

void ResolvedConfig::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}
void ResolvedConfig::add(const std::string& key, double value) { add(key, format_double(value)); }
void ResolvedConfig::add(const std::string& key, long value) { add(key, std::to_string(value)); }
void ResolvedConfig::add(const std::string& key, bool value) {
  add(key, std::string(value ? "true" : "false"));
}

void ResolvedConfig::write_comments(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << "# " << k << '=' << v << '\n';
}

}  // namespace nof1
