#pragma once

#include <map>
#include <optional>
#include <string>

#include "nwrdb/engine.hpp"
#include "nwrdb/workload.hpp"

namespace nwrdb {

struct RunConfig {
  Protocol protocol = Protocol::SiloNwr;
  uint32_t threads = 1;
  double duration_s = 1.0;
  uint32_t epoch_ms = 40;
  WorkloadConfig workload;
  bool verify = false;
  // When nonzero, each worker runs exactly this many transactions and the
  // run ignores duration_s (used by verification-mode runs).
  uint64_t txns_per_worker = 0;

  void validate() const;
};

struct LemmaVerdict {
  bool serializable = false;  // witness version order yields an acyclic graph
  bool recoverable = false;
  bool strict = false;        // commit-order-first topological order respects <_S
  bool non_visible = true;    // no omitted version was ever read
  std::string detail;
  bool all() const {
    return serializable && recoverable && strict && non_visible;
  }
};

LemmaVerdict check_lemmas(const Schedule& s, const VersionOrder& vo,
                          const std::set<std::pair<std::string, TxnId>>& omitted);

struct RunReport {
  std::string protocol;
  uint32_t threads = 0;
  double theta = 0.0;
  uint32_t epoch_ms = 0;
  double duration_s = 0.0;

  uint64_t attempted = 0;
  uint64_t committed = 0;
  uint64_t committed_nwr = 0;
  uint64_t aborts = 0;
  std::map<std::string, uint64_t> abort_causes;
  std::map<std::string, uint64_t> nwr_fallbacks;

  double throughput = 0.0;          // committed / s
  double commit_ratio_pct = 0.0;    // committed / attempted
  double commit_with_nwr_pct = 0.0; // nwr-committed / attempted

  // Sampled cycle-counter shares of the commit path, summing to 100.
  std::map<std::string, double> breakdown_pct;

  std::optional<LemmaVerdict> verify;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

RunReport run(const RunConfig& cfg);

// Matrix file: one `key=value` per line, comma-separated lists for
// protocols / thetas / epoch_ms; other keys scalar.
std::string sweep(const std::string& matrix_text);

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

}  // namespace nwrdb
