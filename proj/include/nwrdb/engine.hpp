#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nwrdb/atomic128.hpp"
#include "nwrdb/history.hpp"
#include "nwrdb/pivot.hpp"

namespace nwrdb {

// --- tid word: {epoch:32 | version-number:31 | lock:1} ---------------------

namespace tid {
inline constexpr uint64_t kLockBit = 1ull;
inline uint64_t make(uint32_t epoch, uint32_t vn) {
  return (static_cast<uint64_t>(epoch) << 32) | (static_cast<uint64_t>(vn) << 1);
}
inline uint32_t epoch_of(uint64_t t) { return static_cast<uint32_t>(t >> 32); }
inline uint32_t vn_of(uint64_t t) {
  return static_cast<uint32_t>((t >> 1) & 0x7FFFFFFFull);
}
inline bool locked(uint64_t t) { return (t & kLockBit) != 0; }
}  // namespace tid

enum class Protocol { Silo, SiloNwr };

enum class CommitKind { CommittedBaseline, CommittedNwr, Aborted };

// Abort reasons are produced by the baseline protocol only; the interception
// layer can merely fall back to it.
enum class AbortReason {
  None,
  ReadSetInvalid,
  DuplicateInsert,
  MissingKey,
  EngineReadOnly,
};

struct CommitOutcome {
  CommitKind kind;
  AbortReason reason = AbortReason::None;
  uint32_t epoch = 0;
  bool ok() const { return kind != CommitKind::Aborted; }
};

// Why an attempted omit fell back to the baseline; kept for reporting.
enum class NwrFallback : uint8_t {
  None,
  StaleEpoch,     // no pivot for this epoch yet
  DeadPivot,      // pivot disabled for this epoch
  FlagSet,        // a written item carries the pre-pivot-read flag
  PivotConsumed,  // someone already read this epoch's pivot version
  ReadNotPivot,   // a read hit a non-pivot in-epoch version
  ReadFlagged,    // a read item carries the pre-pivot-read flag
  Compressed,     // merged-set validation said maybe-cyclic
  ReadSetStale,   // Silo read validation failed
  PublishRace,    // state moved between snapshot and publish
  kCount
};

class LogSink {
 public:
  virtual ~LogSink() = default;
  // One group-commit batch for an epoch. Returns false on write failure.
  virtual bool write(uint32_t epoch, const void* data, size_t size) = 0;
  virtual bool flush(uint32_t epoch) = 0;
};

class NullSink : public LogSink {
 public:
  bool write(uint32_t, const void*, size_t) override { return true; }
  bool flush(uint32_t) override { return true; }
};

class FileSink : public LogSink {
 public:
  explicit FileSink(const std::string& path);
  ~FileSink() override;
  bool write(uint32_t epoch, const void* data, size_t size) override;
  bool flush(uint32_t epoch) override;

 private:
  int fd_ = -1;
};

struct EngineConfig {
  Protocol protocol = Protocol::SiloNwr;
  uint64_t capacity = 1 << 20;    // max record count
  uint32_t value_size = 8;        // bytes per value
  uint32_t epoch_ms = 40;         // 0 => manual clock (tests)
  bool verify = false;            // record history for the oracle
  uint64_t max_recorded_ops = 1 << 20;
  std::shared_ptr<LogSink> sink;  // default NullSink
};

struct ReadEntry {
  uint64_t key;
  uint32_t rec;        // record index
  uint64_t observed;   // tid word at read time (unlocked)
  uint32_t writer;     // verify mode: writer txn of the version read
};

struct WriteEntry {
  uint64_t key;
  uint32_t rec;        // record index, kInvalidRec for inserts until commit
  bool blind;
  bool insert;
  std::vector<std::byte> value;
};

// Stats cells are written by their owning worker and read concurrently by
// the reporter; atomic_ref keeps both sides cheap.
inline void stat_add(uint64_t& cell, uint64_t v) {
  std::atomic_ref<uint64_t> r(cell);
  r.store(r.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
}
inline uint64_t stat_get(const uint64_t& cell) {
  return std::atomic_ref<const uint64_t>(cell).load(std::memory_order_relaxed);
}

struct PhaseTicks {
  uint64_t index = 0, validation = 0, nwr_overhead = 0, lockwait = 0,
           logging = 0, other = 0, total = 0;
};

struct Txn {
  uint32_t worker = 0;
  TxnId id = 0;
  uint32_t epoch = 0;
  bool active = false;
  std::vector<ReadEntry> rs;
  std::vector<WriteEntry> ws;
  bool sampled = false;  // phase tick sampling
};

struct WorkerStats {
  uint64_t attempted = 0;
  uint64_t committed_baseline = 0;
  uint64_t committed_nwr = 0;
  uint64_t aborted[5] = {0, 0, 0, 0, 0};  // by AbortReason
  uint64_t fallback[static_cast<size_t>(NwrFallback::kCount)] = {};
  PhaseTicks ticks;
  uint64_t sampled_txns = 0;
};

struct VerifyDump {
  Schedule schedule;
  VersionOrder version_order;
  SerialOrder serial_order;                    // acknowledgement order
  std::set<std::pair<std::string, TxnId>> omitted;  // omitted versions
};

class Engine {
 public:
  explicit Engine(EngineConfig cfg);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Single-threaded bulk load as the initializing transaction; records
  // carry epoch 0 so every later epoch sees them as prior versions.
  void load(uint64_t key, const void* value, size_t size);

  uint32_t register_worker();

  Txn begin(uint32_t worker);
  // Copies the latest committed value (or the transaction's own pending
  // write) into out. Returns false when the key is absent.
  bool read(Txn& txn, uint64_t key, void* out);
  void write(Txn& txn, uint64_t key, const void* value, size_t size);
  void insert(Txn& txn, uint64_t key, const void* value, size_t size);
  CommitOutcome commit(Txn& txn);
  void abort(Txn& txn);

  uint32_t current_epoch() const {
    return epoch_.load(std::memory_order_seq_cst);
  }
  // Highest epoch whose group commit has been flushed and acknowledged.
  uint32_t acked_epoch() const {
    return acked_.load(std::memory_order_seq_cst);
  }
  bool read_only_error() const { return failed_.load(); }

  // Manual clock control (epoch_ms == 0): advance and run the group-commit
  // step that the ticker thread would run.
  void tick();

  // Blocks until every epoch up to the last committed one is acknowledged.
  void drain();

  const WorkerStats& worker_stats(uint32_t worker) const {
    return workers_[worker]->stats;
  }
  size_t worker_count() const { return workers_.size(); }

  VerifyDump verify_dump();

  const EngineConfig& config() const { return cfg_; }

 private:
  struct Record {
    std::atomic<uint64_t> tid{0};
    Atomic128 pivot;
    // {epoch:32 | bits:32}; bit 0: a committed transaction with in-epoch
    // reads or blind writes read a pre-pivot version of this item.
    std::atomic<uint64_t> flags{0};
    std::atomic<uint32_t> writer{0};  // verify mode only
  };

  struct IndexSlot {
    std::atomic<uint64_t> key{kEmptyKey};
    std::atomic<uint32_t> rec{0};
  };

  struct LogEntry {
    uint32_t epoch;
    std::vector<std::byte> bytes;
  };

  struct Worker {
    std::atomic<uint32_t> local_epoch{kIdleEpoch};
    std::mutex log_mu;
    std::vector<LogEntry> log;
    WorkerStats stats;
    uint64_t attempt_seq = 0;
  };

  static constexpr uint64_t kEmptyKey = ~0ull;
  static constexpr uint32_t kIdleEpoch = ~0u;
  static constexpr uint32_t kInvalidRec = ~0u;

  Record& rec(uint32_t i) { return records_[i]; }
  std::byte* value_ptr(uint32_t i) { return values_.data() + size_t(i) * cfg_.value_size; }

  uint32_t lookup(uint64_t key) const;              // kInvalidRec if absent
  uint32_t find_or_create(uint64_t key, bool& created);

  bool flag_set_for_epoch(const Record& r, uint32_t epoch) const;
  void set_flag(Record& r, uint32_t epoch);

  // True when every read in the context saw either a prior-epoch version of
  // an item without a live pivot, or exactly the live pivot version of an
  // unflagged item. Such transactions may claim pivots and omit writes.
  bool reads_clean(const Txn& txn, uint32_t epoch) const;

  void flag_unclean_reads(const Txn& txn, uint32_t epoch);

  CommitOutcome commit_nwr(Txn& txn, Worker& w, uint32_t epoch);
  CommitOutcome commit_baseline(Txn& txn, Worker& w);

  void group_commit_step();
  void ticker_main();

  // verify-mode recorder
  void record_op(const Op& op);
  void record_submitted_write(Txn& txn, uint64_t key);
  void queue_commit(TxnId txn, uint32_t epoch);
  void note_install(uint64_t key, TxnId txn, uint32_t epoch);
  void note_omit(uint64_t key, TxnId txn, uint32_t epoch);
  void release_commits(uint32_t stable);

  EngineConfig cfg_;
  std::vector<Record> records_;
  std::vector<std::byte> values_;
  std::vector<IndexSlot> index_;
  uint64_t index_mask_ = 0;
  std::atomic<uint32_t> next_rec_{0};
  std::atomic<uint32_t> next_txn_{1};  // 0 is the initializing transaction

  std::atomic<uint32_t> epoch_{1};
  std::atomic<uint32_t> acked_{0};
  std::atomic<bool> failed_{false};
  std::atomic<bool> closing_{false};
  std::vector<std::unique_ptr<Worker>> workers_;
  std::mutex workers_mu_;
  std::thread ticker_;

  // Recorder state (verify mode). A single mutex is fine at verification
  // scale; the bound guards against unbounded growth.
  struct PerItemVersions {
    // per epoch: omitted writers in commit order, installed in vn order
    std::map<uint32_t, std::pair<std::vector<TxnId>, std::vector<TxnId>>> by_epoch;
  };
  std::mutex rec_mu_;
  std::vector<Op> recorded_;
  std::map<uint32_t, std::vector<std::pair<uint64_t, TxnId>>> pending_commits_;
  uint64_t rec_seq_ = 0;
  std::map<std::string, PerItemVersions> item_versions_;
  std::set<std::pair<std::string, TxnId>> omitted_;
  bool record_overflow_ = false;
  bool init_committed_ = false;

  friend class EngineTestPeek;
};

// Key rendered as the history-file item token.
std::string item_name(uint64_t key);

}  // namespace nwrdb
