#include "malalab/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "malalab/errors.hpp"

namespace malalab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key_part(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConfigValue parse_scalar(const std::string& tok, const std::string& where) {
  ConfigValue v;
  if (tok == "true" || tok == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.b = tok == "true";
    v.repr = tok;
    return v;
  }
  // integer?
  {
    std::int64_t iv = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(first, last, iv);
    if (ec == std::errc() && p == last) {
      v.kind = ConfigValue::Kind::Int;
      v.i = iv;
      v.f = double(iv);
      v.repr = tok;
      return v;
    }
  }
  // float?
  {
    char* end = nullptr;
    const double fv = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() + tok.size() && !tok.empty()) {
      v.kind = ConfigValue::Kind::Float;
      v.f = fv;
      v.repr = fmt_double(fv);
      return v;
    }
  }
  throw config_error(where + ": cannot parse value '" + tok + "'");
}

}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string prefix;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    // strip comment (quotes may contain '#')
    std::string line;
    bool in_quote = false;
    for (char c : raw) {
      if (c == '"') in_quote = !in_quote;
      if (c == '#' && !in_quote) break;
      line.push_back(c);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw config_error(where + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_key_part(name)) throw config_error(where + ": bad section name '" + name + "'");
      prefix = name + ".";
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(where + ": expected 'key = value', got '" + line + "'");
    const std::string key_part = trim(line.substr(0, eq));
    const std::string val_part = trim(line.substr(eq + 1));
    if (!valid_key_part(key_part)) throw config_error(where + ": bad key '" + key_part + "'");
    if (val_part.empty()) throw config_error(where + ": missing value for key '" + key_part + "'");
    const std::string key = prefix + key_part;
    if (cfg.entries_.count(key)) throw config_error(where + ": duplicate key '" + key + "'");

    ConfigValue v;
    if (val_part.front() == '"') {
      if (val_part.size() < 2 || val_part.back() != '"')
        throw config_error(where + ": unterminated string for key '" + key + "'");
      v.kind = ConfigValue::Kind::String;
      v.s = val_part.substr(1, val_part.size() - 2);
      if (v.s.find('"') != std::string::npos)
        throw config_error(where + ": embedded quote in string for key '" + key + "'");
      v.repr = "\"" + v.s + "\"";
    } else if (val_part.front() == '[') {
      if (val_part.back() != ']')
        throw config_error(where + ": unterminated array for key '" + key + "'");
      v.kind = ConfigValue::Kind::Array;
      v.arr_all_int = true;
      std::string body = val_part.substr(1, val_part.size() - 2);
      std::istringstream items(body);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error(where + ": empty array element for key '" + key + "'");
        const ConfigValue elem = parse_scalar(item, where);
        if (elem.kind == ConfigValue::Kind::Int) {
          v.arr.push_back(double(elem.i));
        } else if (elem.kind == ConfigValue::Kind::Float) {
          v.arr.push_back(elem.f);
          v.arr_all_int = false;
        } else {
          throw config_error(where + ": arrays may hold only numbers (key '" + key + "')");
        }
      }
      std::string repr = "[";
      for (std::size_t i = 0; i < v.arr.size(); ++i) {
        if (i) repr += ", ";
        repr += v.arr_all_int ? std::to_string(std::int64_t(v.arr[i])) : fmt_double(v.arr[i]);
      }
      v.repr = repr + "]";
    } else {
      v = parse_scalar(val_part, where + " (key '" + key + "')");
    }
    cfg.entries_.emplace(key, std::move(v));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const ConfigValue& Config::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw config_error("missing required config key '" + key + "'");
  return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Int)
    throw config_error("config key '" + key + "' must be an integer");
  return v.i;
}

double Config::get_float(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Float && v.kind != ConfigValue::Kind::Int)
    throw config_error("config key '" + key + "' must be a number");
  return v.f;
}

bool Config::get_bool(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Bool)
    throw config_error("config key '" + key + "' must be true or false");
  return v.b;
}

std::string Config::get_string(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::String)
    throw config_error("config key '" + key + "' must be a quoted string");
  return v.s;
}

std::vector<double> Config::get_float_array(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Array)
    throw config_error("config key '" + key + "' must be an array");
  return v.arr;
}

std::vector<std::int64_t> Config::get_int_array(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::Array || !v.arr_all_int)
    throw config_error("config key '" + key + "' must be an array of integers");
  std::vector<std::int64_t> out;
  out.reserve(v.arr.size());
  for (double d : v.arr) out.push_back(std::int64_t(d));
  return out;
}

std::int64_t Config::get_int_or(const std::string& key, std::int64_t def) const {
  return has(key) ? get_int(key) : def;
}
double Config::get_float_or(const std::string& key, double def) const {
  return has(key) ? get_float(key) : def;
}
bool Config::get_bool_or(const std::string& key, bool def) const {
  return has(key) ? get_bool(key) : def;
}
std::string Config::get_string_or(const std::string& key, const std::string& def) const {
  return has(key) ? get_string(key) : def;
}

void Config::require_known_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : entries_)
    if (!allowed.count(key))
      throw config_error("unknown config key '" + key + "'");
}

void Config::require_keys(const std::vector<std::string>& required) const {
  for (const auto& key : required)
    if (!entries_.count(key)) throw config_error("missing required config key '" + key + "'");
}

std::vector<std::string> Config::canonical_lines() const {
  std::vector<std::string> lines;
  lines.reserve(entries_.size());
  for (const auto& [key, value] : entries_) lines.push_back(key + " = " + value.repr);
  return lines;
}

}
