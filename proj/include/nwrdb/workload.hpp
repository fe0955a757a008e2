#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nwrdb {

struct OpMix {
  uint32_t read_pct = 50;
  uint32_t blind_write_pct = 50;
  uint32_t rmw_pct = 0;
};

struct WorkloadConfig {
  uint64_t records = 100'000;
  uint32_t ops_per_txn = 4;
  OpMix mix;
  double theta = 0.9;  // Zipfian skew, in [0, 1)
  uint32_t value_size = 8;
  uint64_t seed = 1;

  void validate() const;
};

// ycsb_a: 50% read / 50% blind write; ycsb_b: 95% read / 5% blind write.
WorkloadConfig ycsb_a();
WorkloadConfig ycsb_b();
// Lookup by name ("ycsb-a", "ycsb_b", ...); throws on unknown names.
WorkloadConfig preset(const std::string& name);

uint64_t splitmix64(uint64_t& state);

// P(rank r) proportional to 1/r^theta over ranks 1..n, drawn with the
// rejection-inversion construction; theta == 0 degenerates to uniform.
class ZipfGenerator {
 public:
  ZipfGenerator(uint64_t n, double theta, uint64_t seed);
  // Zero-based index in [0, n).
  uint64_t next();

  // Analytic frequency of the rank-r element (1-based).
  static double rank_probability(uint64_t n, double theta, uint64_t r);

 private:
  double h_integral(double x) const;
  double h(double x) const;
  double h_integral_inverse(double x) const;
  double next_double();

  uint64_t n_;
  double theta_;
  uint64_t state_;
  double h_x1_, h_n_, s_;
};

enum class TxnOpKind : uint8_t { Read, BlindWrite, ReadModifyWrite };

struct TxnOp {
  TxnOpKind kind;
  uint64_t key;
};

class WorkloadGenerator {
 public:
  // Per-worker generator; worker seeds derive from (seed, worker).
  WorkloadGenerator(const WorkloadConfig& cfg, uint32_t worker);

  // ops_per_txn operations with distinct keys.
  void next_txn(std::vector<TxnOp>& out);

 private:
  WorkloadConfig cfg_;
  ZipfGenerator zipf_;
  uint64_t state_;
};

}  // namespace nwrdb
