// Minimal key = value run-configuration files: '#' comments, blank lines,
// whitespace-insensitive. Typed getters raise errors that name the offending
// field, and unknown keys can be rejected wholesale so typos fail loudly.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsplab::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class KeyValues {
 public:
  static KeyValues parse_file(const std::string& path);
  static KeyValues parse_text(const std::string& text,
                              const std::string& origin = "<inline>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list (spaces allowed).
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // Throws if any present key is outside `allowed`.
  void restrict_keys(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

// Shortest representation that round-trips an IEEE double ("%.17g").
std::string format_double(double v);

}  // namespace rsplab::config
