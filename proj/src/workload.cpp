#include "nwrdb/workload.hpp"

#include <cmath>
#include <stdexcept>

namespace nwrdb {

void WorkloadConfig::validate() const {
  if (mix.read_pct + mix.blind_write_pct + mix.rmw_pct != 100)
    throw std::invalid_argument("op mix must sum to 100");
  if (theta < 0.0 || theta >= 1.0)
    throw std::invalid_argument("theta must be in [0, 1)");
  if (records == 0 || ops_per_txn == 0)
    throw std::invalid_argument("records and ops_per_txn must be positive");
  if (records < ops_per_txn)
    throw std::invalid_argument("need at least ops_per_txn distinct records");
}

WorkloadConfig ycsb_a() {
  WorkloadConfig c;
  c.mix = {50, 50, 0};
  return c;
}

WorkloadConfig ycsb_b() {
  WorkloadConfig c;
  c.mix = {95, 5, 0};
  return c;
}

WorkloadConfig preset(const std::string& name) {
  if (name == "ycsb-a" || name == "ycsb_a") return ycsb_a();
  if (name == "ycsb-b" || name == "ycsb_b") return ycsb_b();
  throw std::invalid_argument("unknown workload preset '" + name + "'");
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ZipfGenerator::ZipfGenerator(uint64_t n, double theta, uint64_t seed)
    : n_(n), theta_(theta), state_(seed) {
  // Warm the state so small seeds decorrelate.
  splitmix64(state_);
  if (theta_ > 0.0) {
    h_x1_ = h_integral(1.5) - 1.0;
    h_n_ = h_integral(static_cast<double>(n_) + 0.5);
    s_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
  }
}

double ZipfGenerator::h_integral(double x) const {
  // Integral of x^-theta: x^(1-theta) / (1-theta). theta < 1 always.
  double t = 1.0 - theta_;
  return std::pow(x, t) / t;
}

double ZipfGenerator::h(double x) const { return std::pow(x, -theta_); }

double ZipfGenerator::h_integral_inverse(double x) const {
  double t = 1.0 - theta_;
  return std::pow(x * t, 1.0 / t);
}

double ZipfGenerator::next_double() {
  // 53-bit mantissa in [0, 1).
  return (splitmix64(state_) >> 11) * 0x1.0p-53;
}

uint64_t ZipfGenerator::next() {
  if (theta_ == 0.0) return splitmix64(state_) % n_;
  for (;;) {
    double u = h_n_ + next_double() * (h_x1_ - h_n_);
    double x = h_integral_inverse(u);
    uint64_t k = static_cast<uint64_t>(x + 0.5);
    if (k < 1)
      k = 1;
    else if (k > n_)
      k = n_;
    if (k - x <= s_ || u >= h_integral(static_cast<double>(k) + 0.5) -
                                h(static_cast<double>(k)))
      return k - 1;
  }
}

double ZipfGenerator::rank_probability(uint64_t n, double theta, uint64_t r) {
  double denom = 0.0;
  for (uint64_t i = 1; i <= n; ++i) denom += std::pow(double(i), -theta);
  return std::pow(double(r), -theta) / denom;
}

WorkloadGenerator::WorkloadGenerator(const WorkloadConfig& cfg, uint32_t worker)
    : cfg_(cfg),
      zipf_(cfg.records, cfg.theta,
            [&] {
              uint64_t s = cfg.seed;
              uint64_t a = splitmix64(s);
              s = a ^ (uint64_t(worker) * 0xD1B54A32D192ED03ull + 1);
              return splitmix64(s);
            }()),
      state_([&] {
        uint64_t s = cfg.seed + 0x632BE59BD9B4E019ull;
        uint64_t a = splitmix64(s);
        s = a ^ (uint64_t(worker) * 0x9E3779B97F4A7C15ull + 1);
        return splitmix64(s);
      }()) {
  cfg_.validate();
}

void WorkloadGenerator::next_txn(std::vector<TxnOp>& out) {
  out.clear();
  for (uint32_t i = 0; i < cfg_.ops_per_txn; ++i) {
    uint64_t roll = splitmix64(state_) % 100;
    TxnOpKind kind;
    if (roll < cfg_.mix.read_pct)
      kind = TxnOpKind::Read;
    else if (roll < cfg_.mix.read_pct + cfg_.mix.blind_write_pct)
      kind = TxnOpKind::BlindWrite;
    else
      kind = TxnOpKind::ReadModifyWrite;

    // Distinct keys within one transaction; one version per (item, txn).
    uint64_t key;
    bool dup;
    do {
      key = zipf_.next();
      dup = false;
      for (const TxnOp& op : out) dup |= op.key == key;
    } while (dup);
    out.push_back({kind, key});
  }
}

}  // namespace nwrdb
