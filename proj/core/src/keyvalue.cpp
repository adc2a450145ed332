#include "seld3d/keyvalue.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seld3d/errors.hpp"

namespace seld3d {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shorter %.15g when it does too.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  }
  return buf;
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("key=value parse error at line " + std::to_string(line_no) +
                        ": missing '='");
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("key=value parse error at line " + std::to_string(line_no) +
                        ": empty key");
    }
    kv.set(key, trim(stripped.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool KeyValueFile::has(const std::string& key) const { return find(key) != nullptr; }

std::string KeyValueFile::get(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError("missing key: " + key);
  return *v;
}

long long KeyValueFile::get_int(const std::string& key) const {
  const std::string v = get(key);
  char* end = nullptr;
  const long long r = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("key " + key + ": not an integer: '" + v + "'");
  }
  return r;
}

std::uint64_t KeyValueFile::get_uint64(const std::string& key) const {
  const std::string v = get(key);
  char* end = nullptr;
  const unsigned long long r = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("key " + key + ": not an unsigned integer: '" + v + "'");
  }
  return r;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get(key);
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("key " + key + ": not a number: '" + v + "'");
  }
  return r;
}

bool KeyValueFile::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key " + key + ": not a boolean: '" + v + "'");
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

long long KeyValueFile::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueFile::get_uint64_or(const std::string& key,
                                          std::uint64_t fallback) const {
  return has(key) ? get_uint64(key) : fallback;
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KeyValueFile::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueFile::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_uint64(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void KeyValueFile::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

std::string KeyValueFile::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write config file: " + path.string());
  }
  out << serialize();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

}  // namespace seld3d
