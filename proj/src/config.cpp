#include "onearm/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "onearm/errors.hpp"

namespace onearm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void apply_line(std::map<std::string, std::string>& kv, const std::string& line,
                const std::string& where) {
  std::string body = line;
  std::size_t hash = body.find('#');
  if (hash != std::string::npos) body = body.substr(0, hash);
  body = trim(body);
  if (body.empty()) return;
  std::size_t eq = body.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: expected key = value in " + where + ": '" + body + "'");
  std::string key = trim(body.substr(0, eq));
  std::string value = trim(body.substr(eq + 1));
  if (key.empty()) throw ConfigError("config: empty key in " + where);
  kv[key] = value;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path,
                                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    apply_line(cfg.kv, line, path + ":" + std::to_string(lineno));
  }
  for (auto& o : overrides) apply_line(cfg.kv, o, "override");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_overrides(const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  for (auto& o : overrides) apply_line(cfg.kv, o, "override");
  return cfg;
}

std::string ExperimentConfig::str(const std::string& key, const std::string& fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::string ExperimentConfig::require(const std::string& key) const {
  auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("config: missing required field '" + key + "'");
  return it->second;
}

double ExperimentConfig::num(const std::string& key) const {
  const std::string v = require(key);
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: field '" + key + "' is not a number: '" + v + "'");
  }
}

double ExperimentConfig::num(const std::string& key, double fallback) const {
  return has(key) ? num(key) : fallback;
}

long long ExperimentConfig::integer(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  double v = num(key);
  auto out = (long long)v;
  if (double(out) != v)
    throw ConfigError("config: field '" + key + "' must be an integer");
  return out;
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = str(key, "");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: field '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> ExperimentConfig::num_list(const std::string& key) const {
  std::string v = require(key);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config: field '" + key + "' has a bad entry: '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: field '" + key + "' is empty");
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : canonical()) {
    h ^= (unsigned char)c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

CouplingSpec coupling_from_config(const ExperimentConfig& cfg) {
  CouplingSpec c;
  c.dim = int(cfg.integer("dimension", 0));
  if (c.dim <= 0) throw ConfigError("config: field 'dimension' must be a positive integer");
  c.range = int(cfg.integer("range", 1));
  c.beta = cfg.num("beta", 1.0);

  bool any = false;
  std::string shorthand = cfg.str("coupling", "");
  if (!shorthand.empty()) {
    if (shorthand.rfind("nn:", 0) != 0)
      throw ConfigError("config: field 'coupling' must look like nn:<J>");
    double j;
    try {
      j = std::stod(shorthand.substr(3));
    } catch (const std::exception&) {
      throw ConfigError("config: bad J in 'coupling'");
    }
    std::vector<int> cls(c.dim, 0);
    cls[0] = 1;
    c.table.emplace_back(cls, j);
    any = true;
  }
  for (auto& [k, v] : cfg.kv) {
    if (k.rfind("coupling.", 0) != 0) continue;
    std::string spec = k.substr(9);
    std::vector<int> cls;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
      try {
        cls.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("config: bad displacement class in '" + k + "'");
      }
    if (int(cls.size()) != c.dim)
      throw ConfigError("config: displacement class in '" + k + "' has wrong dimension");
    double j;
    try {
      j = std::stod(v);
    } catch (const std::exception&) {
      throw ConfigError("config: bad J in '" + k + "'");
    }
    c.table.emplace_back(cls, j);
    any = true;
  }
  if (!any) {
    std::vector<int> cls(c.dim, 0);
    cls[0] = 1;
    c.table.emplace_back(cls, 1.0);
  }
  try {
    c.finalize();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace onearm
