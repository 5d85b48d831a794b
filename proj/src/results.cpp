#include "onearm/results.hpp"

#include <chrono>
#include <fstream>

#include "onearm/errors.hpp"
#include "onearm/version.hpp"

namespace onearm {

Json make_row(const std::string& config_hash, const std::string& kind,
              const std::string& anchor, const std::string& obs) {
  Json row;
  row["v"] = kVersion;
  row["hash"] = config_hash;
  row["kind"] = kind;
  row["anchor"] = anchor;
  row["obs"] = obs;
  return row;
}

Json RunRecord::to_json() const {
  Json j;
  j["hash"] = config_hash;
  j["kind"] = kind;
  j["v"] = version;
  j["started_ms"] = started_ms;
  j["finished_ms"] = finished_ms;
  j["rows"] = int(rows.size());
  j["checks_total"] = checks_total;
  j["checks_passed"] = checks_passed;
  return j;
}

void append_jsonl(const std::string& path, const Json& value) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("results: cannot open " + path + " for append");
  out << value.dump() << "\n";
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("results: cannot open " + path);
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(Json::parse(line));
  }
  return out;
}

Json strip_volatile(const Json& row) {
  Json copy = row;
  copy.erase("wall_ms");
  return copy;
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace onearm
