#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seld3d {

/// Flat key=value text with '#' comments and blank lines. Keys keep
/// insertion order so serialized files are stable. Used for run configs,
/// scene specs, manifests, and score reports.
class KeyValueFile {
public:
  KeyValueFile() = default;

  static KeyValueFile parse_string(const std::string& text);
  static KeyValueFile parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const;

  /// Throws ConfigError when the key is absent or the value does not parse.
  std::string get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64_or(const std::string& key, std::uint64_t fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, long long value);
  void set_uint64(const std::string& key, std::uint64_t value);
  void set_double(const std::string& key, double value);  // round-trip exact
  void set_bool(const std::string& key, bool value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

private:
  const std::string* find(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace seld3d
