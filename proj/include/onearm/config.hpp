#pragma once

#include <map>
#include <string>
#include <vector>

#include "onearm/lattice.hpp"

namespace onearm {

// Flat key-value experiment configuration.  Loaded from a text file with
// `key = value` lines (# comments), then overridden by `key=value` arguments.
// The canonical serialization (sorted keys) hashes to the run identity.
struct ExperimentConfig {
  std::map<std::string, std::string> kv;

  static ExperimentConfig from_file(const std::string& path,
                                    const std::vector<std::string>& overrides = {});
  static ExperimentConfig from_overrides(const std::vector<std::string>& overrides);

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> num_list(const std::string& key) const;

  std::string canonical() const;
  std::string hash() const;  // 16-hex fnv1a64 of the canonical form
};

// Geometry keys: dimension, range, beta, norm, and either `coupling = nn:<J>`
// or one `coupling.<c1,c2,...> = <J>` entry per displacement class.
CouplingSpec coupling_from_config(const ExperimentConfig& cfg);

}  // namespace onearm
