#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace diffnet {

/// Flat `key = value` configuration with optional `[section]` prefixes and
/// `#` comments. Section headers prepend `section.` to the keys that follow.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(const std::string& key,
                         std::uint64_t fallback) const;

  /// Comma-separated list of reals.
  std::vector<double> get_list(const std::string& key) const;

  /// Per-node profile: a scalar broadcasts, a comma list must have `count`
  /// entries, and `uniform(lo,hi)` draws a seeded fixture.
  std::vector<double> get_profile(const std::string& key, int count,
                                  double fallback, std::uint64_t seed,
                                  std::uint64_t tag) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace diffnet
