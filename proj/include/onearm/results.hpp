#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace onearm {

using Json = nlohmann::json;

// One measurement or check, persisted as a single JSON line.  Every row
// carries an `anchor` tag naming the identity or scaling family it belongs
// to, or "plumbing" for bookkeeping rows.
Json make_row(const std::string& config_hash, const std::string& kind,
              const std::string& anchor, const std::string& obs);

struct RunRecord {
  std::string config_hash;
  std::string kind;
  std::string version;
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;
  std::vector<Json> rows;
  int checks_total = 0;
  int checks_passed = 0;

  bool all_pass() const { return checks_passed == checks_total; }
  Json to_json() const;
};

void append_jsonl(const std::string& path, const Json& value);
std::vector<Json> read_jsonl(const std::string& path);

// Rows compared for idempotence checks: volatile fields (wall time) removed.
Json strip_volatile(const Json& row);

std::int64_t now_ms();

}  // namespace onearm
