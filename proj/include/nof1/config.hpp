#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nof1 {

/// Plain-text `key = value` configuration. '#' starts a comment; blank lines
/// are ignored. Later assignments override earlier ones, so CLI overrides are
/// applied with set() after the file is parsed.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  /// Parses a single "key=value" override.
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Rejects keys outside `known`, naming the first offender.
  void require_known(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Ordered record of every resolved setting, echoed into outputs.
class ResolvedConfig {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, long value);
  void add(const std::string& key, bool value);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  /// "# key=value" lines.
  void write_comments(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace nof1
