#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace malalab {

// Strict flat config: "key = value" lines with [section] / [section.sub]
// headers producing dotted key paths. Values: integers, floats, booleans,
// quoted strings, and numeric arrays [a, b, c]. '#' starts a comment.
// Unknown keys are an error at the consumer (require_known_keys); duplicate
// keys and malformed lines are an error at parse time. All errors are
// config_error and name the offending key or line.
struct ConfigValue {
  enum class Kind { Int, Float, Bool, String, Array };
  Kind kind = Kind::Int;
  std::int64_t i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<double> arr;
  bool arr_all_int = false;
  std::string repr;  // canonical text form
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;

  std::int64_t get_int(const std::string& key) const;
  double get_float(const std::string& key) const;  // accepts integer values
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_float_array(const std::string& key) const;
  std::vector<std::int64_t> get_int_array(const std::string& key) const;

  std::int64_t get_int_or(const std::string& key, std::int64_t def) const;
  double get_float_or(const std::string& key, double def) const;
  bool get_bool_or(const std::string& key, bool def) const;
  std::string get_string_or(const std::string& key, const std::string& def) const;

  // Throws config_error naming the first key not in `allowed`.
  void require_known_keys(const std::set<std::string>& allowed) const;
  void require_keys(const std::vector<std::string>& required) const;

  // Sorted "key = value" lines; stable across runs, used for provenance.
  std::vector<std::string> canonical_lines() const;

  const std::map<std::string, ConfigValue>& entries() const { return entries_; }

 private:
  const ConfigValue& at(const std::string& key) const;
  std::map<std::string, ConfigValue> entries_;
  std::string origin_;
};

}
