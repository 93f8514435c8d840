#pragma once

// Experiment definitions are TOML documents with one level of sections.
// Command-line overrides use the same value syntax as `section.key=value`;
// there a bare word is read as a string.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <tomlplusplus/toml.hpp>

#include "kgnls/error.hpp"
#include "kgnls/experiments.hpp"

namespace kgnls::config {

using Value = std::variant<double, bool, std::string, std::vector<double>>;

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Converts a parsed TOML value. Throws std::invalid_argument with a short
/// reason for tables, mixed arrays and non-finite numbers.
inline Value from_node(const toml::node& n) {
  auto number = [](const toml::node& x, double& out) {
    if (auto i = x.as_integer()) {
      out = static_cast<double>(i->get());
    } else if (auto f = x.as_floating_point()) {
      out = f->get();
    } else {
      return false;
    }
    if (!std::isfinite(out)) throw std::invalid_argument("number must be finite");
    return true;
  };
  double v = 0.0;
  if (number(n, v)) return v;
  if (auto b = n.as_boolean()) return b->get();
  if (auto str = n.as_string()) return std::string(str->get());
  if (auto arr = n.as_array()) {
    std::vector<double> out;
    for (const auto& item : *arr) {
      if (!number(item, v)) throw std::invalid_argument("array elements must be numbers");
      out.push_back(v);
    }
    return out;
  }
  throw std::invalid_argument("unsupported value type");
}

/// Parses one value. Bare words are accepted as strings only when
/// `allow_bare` is set (command-line overrides). Throws std::invalid_argument
/// with a short reason.
inline Value parse_value(std::string_view text, bool allow_bare) {
  const std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("missing value");
  try {
    const toml::table t = toml::parse("v = " + std::string(s));
    return from_node(*t.get("v"));
  } catch (const toml::parse_error& e) {
    if (allow_bare && s.find_first_of(" \t=[]\"'#") == std::string_view::npos) return std::string(s);
    throw std::invalid_argument("cannot parse value '" + std::string(s) + "': " + std::string(e.description()));
  }
}

/// Raw entries by fully qualified key, with the line each came from.
struct Document {
  std::map<std::string, Value> values;
  std::map<std::string, int> lines;
};

inline Document parse_document(std::istream& in, const std::string& origin) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.source().begin.line) + ": syntax error: " +
                      std::string(e.description()));
  }
  Document doc;
  std::function<void(const toml::table&, const std::string&)> walk = [&](const toml::table& t, const std::string& prefix) {
    for (const auto& [k, node] : t) {
      const std::string full = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
      if (auto sub = node.as_table()) {
        walk(*sub, full);
        continue;
      }
      const int line = static_cast<int>(node.source().begin.line);
      try {
        doc.values[full] = from_node(node);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ":" + std::to_string(line) + ": '" + full + "': " + e.what());
      }
      doc.lines[full] = line;
    }
  };
  walk(root, "");
  return doc;
}

/// Resolved configuration plus the provenance every artifact embeds.
struct Loaded {
  ExperimentConfig experiment;
  std::string output_dir;  // empty: caller decides
  std::string source;      // config file path, or "<defaults>"
  std::vector<std::string> overrides;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline double as_number(const std::string& key, const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConfigError(key + ": expected a number");
}

inline std::size_t as_count(const std::string& key, const Value& v) {
  const double d = as_number(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1e9) throw ConfigError(key + ": expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

inline bool as_bool(const std::string& key, const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError(key + ": expected true or false");
}

inline std::string as_string(const std::string& key, const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(key + ": expected a string");
}

inline std::vector<double> as_list(const std::string& key, const Value& v) {
  if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
  if (const auto* d = std::get_if<double>(&v)) return {*d};
  throw ConfigError(key + ": expected a list of numbers");
}

struct Key {
  std::string name;
  std::function<void(Loaded&, const Value&)> set;
  std::function<std::string(const Loaded&)> get;
};

#define KGNLS_NUM(NAME, FIELD) \
  Key{NAME, [](Loaded& c, const Value& v) { c.experiment.FIELD = as_number(NAME, v); }, \
      [](const Loaded& c) { return fmt(c.experiment.FIELD); }}
#define KGNLS_COUNT(NAME, FIELD) \
  Key{NAME, [](Loaded& c, const Value& v) { c.experiment.FIELD = as_count(NAME, v); }, \
      [](const Loaded& c) { return std::to_string(c.experiment.FIELD); }}
#define KGNLS_BOOL(NAME, FIELD) \
  Key{NAME, [](Loaded& c, const Value& v) { c.experiment.FIELD = as_bool(NAME, v); }, \
      [](const Loaded& c) { return std::string(c.experiment.FIELD ? "true" : "false"); }}
#define KGNLS_STR(NAME, FIELD) \
  Key{NAME, [](Loaded& c, const Value& v) { c.experiment.FIELD = as_string(NAME, v); }, \
      [](const Loaded& c) { return quote(c.experiment.FIELD); }}

inline const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      KGNLS_NUM("physics.k0", k0),
      Key{"physics.epsilon_ladder",
          [](Loaded& c, const Value& v) { c.experiment.epsilon_ladder = as_list("physics.epsilon_ladder", v); },
          [](const Loaded& c) {
            std::string s = "[";
            for (std::size_t i = 0; i < c.experiment.epsilon_ladder.size(); ++i) {
              if (i) s += ", ";
              s += fmt(c.experiment.epsilon_ladder[i]);
            }
            return s + "]";
          }},
      KGNLS_NUM("physics.epsilon0", epsilon0),
      KGNLS_NUM("physics.s", s),
      KGNLS_STR("solution.kind", kind),
      KGNLS_NUM("solution.a", a),
      Key{"solution.order",
          [](Loaded& c, const Value& v) { c.experiment.order = static_cast<int>(as_count("solution.order", v)); },
          [](const Loaded& c) { return std::to_string(c.experiment.order); }},
      KGNLS_STR("solution.G", poly_g),
      KGNLS_STR("solution.H", poly_h),
      KGNLS_STR("solution.D", poly_d),
      KGNLS_NUM("solution.slow_time_offset", slow_time_offset),
      KGNLS_COUNT("grids.n_modes", n_modes),
      KGNLS_NUM("grids.slow_length", slow_length),
      KGNLS_NUM("time.T0", T0),
      KGNLS_NUM("time.dt", dt),
      KGNLS_COUNT("time.samples", time_samples),
      KGNLS_COUNT("time.residual_samples", residual_samples),
      KGNLS_BOOL("time.dt_check", dt_check),
      KGNLS_NUM("time.dt_check_tolerance", dt_check_tolerance),
      KGNLS_BOOL("controls.third_harmonic", third_harmonic),
      KGNLS_NUM("controls.omega0_shift", omega0_shift),
      KGNLS_NUM("controls.cg_shift", cg_shift),
      KGNLS_COUNT("output.workers", workers),
      KGNLS_BOOL("output.wall_time", record_wall_time),
      Key{"output.dir", [](Loaded& c, const Value& v) { c.output_dir = as_string("output.dir", v); },
          [](const Loaded& c) { return quote(c.output_dir); }},
  };
  return table;
}

#undef KGNLS_NUM
#undef KGNLS_COUNT
#undef KGNLS_BOOL
#undef KGNLS_STR

inline const Key& find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown key '" + name + "'");
}

}  // namespace detail

/// Applies one `section.key=value` override.
inline void apply_override(Loaded& cfg, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + text + "': expected section.key=value");
  const std::string key(trim(std::string_view(text).substr(0, eq)));
  const auto& k = detail::find_key(key);
  Value v;
  try {
    v = parse_value(std::string_view(text).substr(eq + 1), true);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("override '" + text + "': " + e.what());
  }
  k.set(cfg, v);
  cfg.overrides.push_back(text);
}

/// Parses a document and resolves it against the defaults, then applies the
/// overrides in order and validates the result.
inline Loaded load(std::istream& in, const std::string& origin, const std::vector<std::string>& overrides = {}) {
  const Document doc = parse_document(in, origin);
  Loaded cfg;
  cfg.source = origin;
  for (const auto& [name, value] : doc.values) {
    const auto it = doc.lines.find(name);
    try {
      detail::find_key(name).set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(it->second) + ": " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  validate(cfg.experiment);
  return cfg;
}

inline Loaded load_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return load(in, path, overrides);
}

inline Loaded defaults(const std::vector<std::string>& overrides = {}) {
  std::istringstream empty;
  return load(empty, "<defaults>", overrides);
}

/// Every resolved key, one `key = value` line each, sorted by key.
inline std::string echo(const Loaded& cfg) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& k : detail::keys()) rows.emplace_back(k.name, k.get(cfg));
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
  return out;
}

/// FNV-1a 64-bit hash as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace kgnls::config
