#include "nwrdb/engine.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cassert>
#include <chrono>

namespace nwrdb {

namespace {

inline uint64_t now_ticks() {
#if defined(__x86_64__)
  return __builtin_ia32_rdtsc();
#else
  return std::chrono::steady_clock::now().time_since_epoch().count();
#endif
}

inline void cpu_relax() {
#if defined(__x86_64__)
  __builtin_ia32_pause();
#else
  std::this_thread::yield();
#endif
}

uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t round_up_pow2(uint64_t x) {
  uint64_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

}  // namespace

std::string item_name(uint64_t key) { return "k" + std::to_string(key); }

FileSink::FileSink(const std::string& path) {
  fd_ = ::open(path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0644);
}

FileSink::~FileSink() {
  if (fd_ >= 0) ::close(fd_);
}

bool FileSink::write(uint32_t epoch, const void* data, size_t size) {
  if (fd_ < 0) return false;
  (void)epoch;
  const char* p = static_cast<const char*>(data);
  size_t left = size;
  while (left > 0) {
    ssize_t n = ::write(fd_, p, left);
    if (n <= 0) return false;
    p += n;
    left -= static_cast<size_t>(n);
  }
  return true;
}

bool FileSink::flush(uint32_t) {
  return fd_ >= 0 && ::fdatasync(fd_) == 0;
}

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.sink) cfg_.sink = std::make_shared<NullSink>();
  records_ = std::vector<Record>(cfg_.capacity);
  values_.resize(cfg_.capacity * size_t(cfg_.value_size));
  uint64_t islots = round_up_pow2(cfg_.capacity * 2);
  index_ = std::vector<IndexSlot>(islots);
  index_mask_ = islots - 1;
  if (cfg_.epoch_ms > 0) ticker_ = std::thread([this] { ticker_main(); });
}

Engine::~Engine() {
  closing_.store(true);
  if (ticker_.joinable()) ticker_.join();
  // Close the final epochs so every queued commit flushes and acks.
  epoch_.fetch_add(2, std::memory_order_seq_cst);
  group_commit_step();
}

uint32_t Engine::lookup(uint64_t key) const {
  uint64_t i = mix64(key) & index_mask_;
  for (;;) {
    uint64_t k = index_[i].key.load(std::memory_order_acquire);
    if (k == key) return index_[i].rec.load(std::memory_order_relaxed);
    if (k == kEmptyKey) return kInvalidRec;
    i = (i + 1) & index_mask_;
  }
}

uint32_t Engine::find_or_create(uint64_t key, bool& created) {
  created = false;
  uint64_t i = mix64(key) & index_mask_;
  for (;;) {
    uint64_t k = index_[i].key.load(std::memory_order_acquire);
    if (k == key) return index_[i].rec.load(std::memory_order_relaxed);
    if (k == kEmptyKey) {
      uint32_t r = next_rec_.fetch_add(1, std::memory_order_relaxed);
      if (r >= cfg_.capacity) throw std::runtime_error("engine capacity exceeded");
      index_[i].rec.store(r, std::memory_order_relaxed);
      uint64_t expect = kEmptyKey;
      if (index_[i].key.compare_exchange_strong(expect, key,
                                                std::memory_order_acq_rel)) {
        created = true;
        return r;
      }
      if (expect == key) return index_[i].rec.load(std::memory_order_relaxed);
      // Slot taken by a different key; the allocated record stays unused.
    }
    i = (i + 1) & index_mask_;
  }
}

void Engine::load(uint64_t key, const void* value, size_t size) {
  bool created = false;
  uint32_t r = find_or_create(key, created);
  Record& rc = rec(r);
  std::memcpy(value_ptr(r), value, std::min<size_t>(size, cfg_.value_size));
  rc.tid.store(tid::make(0, 1), std::memory_order_release);
  rc.writer.store(kInitTxn, std::memory_order_relaxed);
  if (cfg_.verify) {
    std::lock_guard<std::mutex> g(rec_mu_);
    recorded_.push_back(write_op(kInitTxn, item_name(key)));
    item_versions_[item_name(key)].by_epoch[0].second.push_back(kInitTxn);
  }
}

uint32_t Engine::register_worker() {
  std::lock_guard<std::mutex> g(workers_mu_);
  workers_.push_back(std::make_unique<Worker>());
  return static_cast<uint32_t>(workers_.size() - 1);
}

Txn Engine::begin(uint32_t worker) {
  Txn t;
  t.worker = worker;
  t.id = next_txn_.fetch_add(1, std::memory_order_relaxed);
  t.epoch = current_epoch();
  t.active = true;
  if (cfg_.verify) {
    // The initializing transaction commits before anything else runs.
    std::lock_guard<std::mutex> g(rec_mu_);
    if (!init_committed_ && !recorded_.empty()) {
      recorded_.push_back(commit_op(kInitTxn));
      init_committed_ = true;
    }
  }
  return t;
}

bool Engine::read(Txn& txn, uint64_t key, void* out) {
  uint64_t t0 = txn.sampled ? now_ticks() : 0;
  // Own pending write wins.
  for (auto it = txn.ws.rbegin(); it != txn.ws.rend(); ++it) {
    if (it->key == key) {
      std::memcpy(out, it->value.data(), cfg_.value_size);
      if (cfg_.verify) record_op(read_op(txn.id, item_name(key), txn.id));
      return true;
    }
  }
  uint32_t r = lookup(key);
  if (r == kInvalidRec) return false;
  Record& rc = rec(r);
  uint64_t t1, t2;
  uint32_t writer = 0;
  for (;;) {
    t1 = rc.tid.load(std::memory_order_acquire);
    if (tid::locked(t1)) {
      cpu_relax();
      continue;
    }
    std::memcpy(out, value_ptr(r), cfg_.value_size);
    if (cfg_.verify) writer = rc.writer.load(std::memory_order_relaxed);
    t2 = rc.tid.load(std::memory_order_acquire);
    if (t1 == t2) break;
  }
  if (t1 == 0) return false;  // created but never committed
  txn.rs.push_back(ReadEntry{key, r, t1, writer});
  if (cfg_.verify) record_op(read_op(txn.id, item_name(key), writer));
  if (txn.sampled) {
    Worker& w = *workers_[txn.worker];
    stat_add(w.stats.ticks.index, now_ticks() - t0);
  }
  return true;
}

void Engine::write(Txn& txn, uint64_t key, const void* value, size_t size) {
  for (auto& e : txn.ws) {
    if (e.key == key) {
      e.value.assign(static_cast<const std::byte*>(value),
                     static_cast<const std::byte*>(value) + size);
      e.value.resize(cfg_.value_size);
      if (cfg_.verify) {
        // Double writes of one item would collide in the version model;
        // the buffer keeps the last value and the history one write.
      }
      return;
    }
  }
  WriteEntry e;
  e.key = key;
  e.rec = kInvalidRec;
  e.insert = false;
  e.blind = std::none_of(txn.rs.begin(), txn.rs.end(),
                         [&](const ReadEntry& re) { return re.key == key; });
  e.value.assign(static_cast<const std::byte*>(value),
                 static_cast<const std::byte*>(value) + size);
  e.value.resize(cfg_.value_size);
  txn.ws.push_back(std::move(e));
  if (cfg_.verify) record_op(write_op(txn.id, item_name(key)));
}

void Engine::insert(Txn& txn, uint64_t key, const void* value, size_t size) {
  for (auto& prior : txn.ws) {
    if (prior.key == key) {
      prior.value.assign(static_cast<const std::byte*>(value),
                         static_cast<const std::byte*>(value) + size);
      prior.value.resize(cfg_.value_size);
      return;
    }
  }
  WriteEntry e;
  e.key = key;
  e.rec = kInvalidRec;
  e.insert = true;
  e.blind = true;
  e.value.assign(static_cast<const std::byte*>(value),
                 static_cast<const std::byte*>(value) + size);
  e.value.resize(cfg_.value_size);
  txn.ws.push_back(std::move(e));
  if (cfg_.verify) record_op(write_op(txn.id, item_name(key)));
}

void Engine::abort(Txn& txn) {
  if (!txn.active) return;
  txn.active = false;
  if (cfg_.verify) record_op(abort_op(txn.id));
}

bool Engine::flag_set_for_epoch(const Record& r, uint32_t epoch) const {
  uint64_t f = r.flags.load(std::memory_order_seq_cst);
  return (f >> 32) == epoch && (f & 1ull);
}

void Engine::set_flag(Record& r, uint32_t epoch) {
  uint64_t want = (static_cast<uint64_t>(epoch) << 32) | 1ull;
  uint64_t cur = r.flags.load(std::memory_order_seq_cst);
  for (;;) {
    if ((cur >> 32) > epoch || cur == want) return;  // newer epoch wins
    if (r.flags.compare_exchange_weak(cur, want, std::memory_order_seq_cst))
      return;
  }
}

void Engine::flag_unclean_reads(const Txn& txn, uint32_t epoch) {
  // Only transactions that touch the current epoch (an in-epoch read or a
  // blind write) can sit on a path from a pivot writer; reads by anyone
  // else never need to surface here.
  bool relevant = std::any_of(txn.ws.begin(), txn.ws.end(),
                              [](const WriteEntry& e) { return e.blind; });
  if (!relevant)
    relevant = std::any_of(txn.rs.begin(), txn.rs.end(),
                           [&](const ReadEntry& e) {
                             return tid::epoch_of(e.observed) == epoch;
                           });
  if (!relevant) return;
  for (const ReadEntry& e : txn.rs) {
    Record& rc = rec(e.rec);
    PivotVersionObject p = decode(rc.pivot.load());
    bool clean = p.epoch == epoch && p.pv >= 1 &&
                 tid::epoch_of(e.observed) == epoch &&
                 tid::vn_of(e.observed) >= p.pv;
    if (!clean) set_flag(rc, epoch);
  }
}

bool Engine::reads_clean(const Txn& txn, uint32_t epoch) const {
  for (const ReadEntry& e : txn.rs) {
    const Record& rc = records_[e.rec];
    if (tid::epoch_of(e.observed) < epoch) continue;  // prior-epoch version
    PivotVersionObject p = decode(rc.pivot.load());
    if (!(p.epoch == epoch && p.pv >= 1 && tid::vn_of(e.observed) == p.pv &&
          !flag_set_for_epoch(rc, epoch)))
      return false;
  }
  return true;
}

CommitOutcome Engine::commit(Txn& txn) {
  Worker& w = *workers_[txn.worker];
  txn.sampled = (w.attempt_seq++ & 63) == 0;
  stat_add(w.stats.attempted, 1);
  uint64_t t_start = txn.sampled ? now_ticks() : 0;

  if (failed_.load() && !txn.ws.empty()) {
    txn.active = false;
    if (cfg_.verify) record_op(abort_op(txn.id));
    stat_add(w.stats.aborted[static_cast<int>(AbortReason::EngineReadOnly)], 1);
    return {CommitKind::Aborted, AbortReason::EngineReadOnly, 0};
  }

  uint32_t entry_epoch = current_epoch();
  w.local_epoch.store(entry_epoch, std::memory_order_seq_cst);
  uint32_t epoch_now = current_epoch();

  if (cfg_.protocol == Protocol::SiloNwr)
    flag_unclean_reads(txn, epoch_now);

  CommitOutcome out;
  bool try_nwr = cfg_.protocol == Protocol::SiloNwr && !txn.ws.empty() &&
                 std::all_of(txn.ws.begin(), txn.ws.end(),
                             [](const WriteEntry& e) {
                               return e.blind && !e.insert;
                             });
  bool nwr_done = false;
  if (try_nwr) {
    uint64_t t0 = txn.sampled ? now_ticks() : 0;
    out = commit_nwr(txn, w, epoch_now);
    if (txn.sampled) stat_add(w.stats.ticks.nwr_overhead, now_ticks() - t0);
    nwr_done = out.kind == CommitKind::CommittedNwr;
  }
  if (!nwr_done) out = commit_baseline(txn, w);

  w.local_epoch.store(kIdleEpoch, std::memory_order_seq_cst);
  txn.active = false;
  if (txn.sampled) {
    stat_add(w.stats.ticks.total, now_ticks() - t_start);
    stat_add(w.stats.sampled_txns, 1);
  }
  return out;
}

CommitOutcome Engine::commit_nwr(Txn& txn, Worker& w, uint32_t epoch) {
  auto fallback = [&](NwrFallback f) {
    stat_add(w.stats.fallback[static_cast<size_t>(f)], 1);
    return CommitOutcome{CommitKind::Aborted, AbortReason::None, 0};
  };

  // Snapshot and gate the written items' pivot objects.
  std::vector<PivotVersionObject> objs;
  objs.reserve(txn.ws.size());
  for (WriteEntry& e : txn.ws) {
    uint32_t r = lookup(e.key);
    if (r == kInvalidRec) return fallback(NwrFallback::StaleEpoch);
    e.rec = r;
    Record& rc = rec(r);
    PivotVersionObject p = decode(rc.pivot.load());
    if (p.epoch != epoch) return fallback(NwrFallback::StaleEpoch);
    if (p.pv == 0) return fallback(NwrFallback::DeadPivot);
    if (flag_set_for_epoch(rc, epoch)) return fallback(NwrFallback::FlagSet);
    if (p.mrs_slot(slot_of(e.key)) != 0)
      return fallback(NwrFallback::PivotConsumed);
    objs.push_back(p);
  }

  // Reads must be prior-epoch versions or exactly the live pivot version
  // of an unflagged item.
  for (const ReadEntry& e : txn.rs) {
    if (tid::epoch_of(e.observed) < epoch) continue;
    Record& rc = rec(e.rec);
    PivotVersionObject p = decode(rc.pivot.load());
    if (!(p.epoch == epoch && p.pv >= 1 &&
          tid::vn_of(e.observed) == p.pv))
      return fallback(NwrFallback::ReadNotPivot);
    if (flag_set_for_epoch(rc, epoch))
      return fallback(NwrFallback::ReadFlagged);
  }

  // Compressed successors validation against the snapshots.
  TxnFootprint fp;
  fp.epoch = epoch;
  for (const ReadEntry& e : txn.rs) {
    uint32_t vn =
        tid::epoch_of(e.observed) == epoch ? tid::vn_of(e.observed) : 0;
    fp.reads.push_back({slot_of(e.key), vn});
  }
  for (size_t i = 0; i < txn.ws.size(); ++i)
    fp.writes.push_back({slot_of(txn.ws[i].key), objs[i].pv - 1});
  CompressedVerdict cv = validate_compressed(objs, fp);
  if (cv == CompressedVerdict::StFail) return fallback(NwrFallback::StaleEpoch);
  if (cv == CompressedVerdict::MaybeCyclic)
    return fallback(NwrFallback::Compressed);

  // Overwriters validation: the baseline's read-set check, reused.
  for (const ReadEntry& e : txn.rs) {
    uint64_t cur = rec(e.rec).tid.load(std::memory_order_seq_cst);
    if (cur != e.observed) return fallback(NwrFallback::ReadSetStale);
  }

  // Publish the read merges, then re-examine the written items. The store
  // before the reload is what lets concurrent omitters see each other.
  for (const ReadEntry& e : txn.rs) {
    if (tid::epoch_of(e.observed) != epoch) continue;
    Record& rc = rec(e.rec);
    uint32_t slot = slot_of(e.key);
    for (;;) {
      Word128 w0 = rc.pivot.load();
      PivotVersionObject p = decode(w0);
      if (p.epoch != epoch || p.pv == 0) break;
      PivotVersionObject m = merge_read(p, slot, tid::vn_of(e.observed));
      if (m == p) break;
      if (rc.pivot.compare_exchange(w0, encode(m))) break;
    }
  }
  for (size_t i = 0; i < txn.ws.size(); ++i) {
    Record& rc = rec(txn.ws[i].rec);
    PivotVersionObject p = decode(rc.pivot.load());
    if (!(p.epoch == epoch && p.pv >= 1 &&
          p.mrs_slot(slot_of(txn.ws[i].key)) == 0 &&
          !flag_set_for_epoch(rc, epoch)))
      return fallback(NwrFallback::PublishRace);
  }

  stat_add(w.stats.committed_nwr, 1);
  if (cfg_.verify) {
    std::lock_guard<std::mutex> g(rec_mu_);
    for (const WriteEntry& e : txn.ws) {
      item_versions_[item_name(e.key)].by_epoch[epoch].first.push_back(txn.id);
      omitted_.insert({item_name(e.key), txn.id});
    }
    pending_commits_[epoch].push_back({rec_seq_++, txn.id});
  }
  return {CommitKind::CommittedNwr, AbortReason::None, epoch};
}

CommitOutcome Engine::commit_baseline(Txn& txn, Worker& w) {
  auto aborted = [&](AbortReason r) {
    if (cfg_.verify) record_op(abort_op(txn.id));
    stat_add(w.stats.aborted[static_cast<int>(r)], 1);
    return CommitOutcome{CommitKind::Aborted, r, 0};
  };

  uint64_t t0 = 0;

  if (txn.ws.empty()) {
    // Read-only: validate and acknowledge in the current epoch.
    t0 = txn.sampled ? now_ticks() : 0;
    for (const ReadEntry& e : txn.rs) {
      uint64_t cur = rec(e.rec).tid.load(std::memory_order_seq_cst);
      if (cur != e.observed) return aborted(AbortReason::ReadSetInvalid);
    }
    if (txn.sampled) stat_add(w.stats.ticks.validation, now_ticks() - t0);
    uint32_t e_commit = current_epoch();
    stat_add(w.stats.committed_baseline, 1);
    if (cfg_.verify) queue_commit(txn.id, e_commit);
    return {CommitKind::CommittedBaseline, AbortReason::None, e_commit};
  }

  // Resolve records; inserts may create fresh ones.
  for (WriteEntry& e : txn.ws) {
    if (e.insert) {
      bool created = false;
      e.rec = find_or_create(e.key, created);
    } else if (e.rec == kInvalidRec) {
      e.rec = lookup(e.key);
      if (e.rec == kInvalidRec) return aborted(AbortReason::MissingKey);
    }
  }

  std::sort(txn.ws.begin(), txn.ws.end(),
            [](const WriteEntry& a, const WriteEntry& b) { return a.key < b.key; });

  // Lock phase, global key order.
  t0 = txn.sampled ? now_ticks() : 0;
  size_t locked = 0;
  for (; locked < txn.ws.size(); ++locked) {
    Record& rc = rec(txn.ws[locked].rec);
    for (;;) {
      uint64_t cur = rc.tid.load(std::memory_order_seq_cst);
      if (tid::locked(cur)) {
        cpu_relax();
        std::this_thread::yield();
        continue;
      }
      if (rc.tid.compare_exchange_weak(cur, cur | tid::kLockBit,
                                       std::memory_order_seq_cst))
        break;
    }
  }
  if (txn.sampled) stat_add(w.stats.ticks.lockwait, now_ticks() - t0);

  auto unlock_all = [&](size_t n) {
    for (size_t i = 0; i < n; ++i) {
      Record& rc = rec(txn.ws[i].rec);
      rc.tid.store(rc.tid.load(std::memory_order_seq_cst) & ~tid::kLockBit,
                   std::memory_order_seq_cst);
    }
  };

  // Post-lock structural checks for inserts and vanished records.
  for (const WriteEntry& e : txn.ws) {
    uint64_t cur = rec(e.rec).tid.load(std::memory_order_seq_cst);
    if (e.insert) {
      if ((cur & ~tid::kLockBit) != 0) {
        unlock_all(txn.ws.size());
        return aborted(AbortReason::DuplicateInsert);
      }
    } else if ((cur & ~tid::kLockBit) == 0) {
      unlock_all(txn.ws.size());
      return aborted(AbortReason::MissingKey);
    }
  }

  // Serialization epoch, read after all locks.
  uint32_t e_commit = current_epoch();

  // Read-set validation.
  t0 = txn.sampled ? now_ticks() : 0;
  for (const ReadEntry& e : txn.rs) {
    uint64_t cur = rec(e.rec).tid.load(std::memory_order_seq_cst);
    bool own = std::any_of(txn.ws.begin(), txn.ws.end(),
                           [&](const WriteEntry& we) { return we.rec == e.rec; });
    if ((cur & ~tid::kLockBit) != e.observed || (tid::locked(cur) && !own)) {
      unlock_all(txn.ws.size());
      if (txn.sampled) stat_add(w.stats.ticks.validation, now_ticks() - t0);
      return aborted(AbortReason::ReadSetInvalid);
    }
  }
  if (txn.sampled) stat_add(w.stats.ticks.validation, now_ticks() - t0);

  // Install: values, tid words, pivot objects.
  bool nwr_mode = cfg_.protocol == Protocol::SiloNwr;
  std::vector<uint32_t> new_vns(txn.ws.size());
  for (size_t i = 0; i < txn.ws.size(); ++i) {
    uint64_t old = rec(txn.ws[i].rec).tid.load(std::memory_order_seq_cst);
    new_vns[i] = tid::epoch_of(old) < e_commit ? 1 : tid::vn_of(old) + 1;
  }

  TxnFootprint fp;
  bool clean = false;
  if (nwr_mode) {
    fp.epoch = e_commit;
    for (const ReadEntry& e : txn.rs)
      fp.reads.push_back({slot_of(e.key), tid::epoch_of(e.observed) == e_commit
                                              ? tid::vn_of(e.observed)
                                              : 0});
    for (size_t i = 0; i < txn.ws.size(); ++i)
      fp.writes.push_back({slot_of(txn.ws[i].key), new_vns[i]});
    clean = reads_clean(txn, e_commit);
  }

  bool live_claim_done = false;
  for (size_t i = 0; i < txn.ws.size(); ++i) {
    WriteEntry& e = txn.ws[i];
    Record& rc = rec(e.rec);
    std::memcpy(value_ptr(e.rec), e.value.data(), cfg_.value_size);
    if (cfg_.verify) rc.writer.store(txn.id, std::memory_order_relaxed);
    rc.tid.store(tid::make(e_commit, new_vns[i]) | tid::kLockBit,
                 std::memory_order_seq_cst);
    if (cfg_.verify) note_install(e.key, txn.id, e_commit);

    if (!nwr_mode) continue;
    for (;;) {
      Word128 w0 = rc.pivot.load();
      PivotVersionObject p = decode(w0);
      PivotVersionObject target = p;
      if (e.blind) {
        if (p.epoch != e_commit) {
          bool live = clean && !live_claim_done &&
                      !flag_set_for_epoch(rc, e_commit);
          if (live) {
            target = apply_commit_updates(p, fp, e_commit, true);
          } else {
            target = PivotVersionObject{e_commit, 0, 0, 0};
          }
        } else if (p.pv >= 1) {
          target = apply_commit_updates(p, fp, e_commit, false);
        }
      } else if (p.epoch != e_commit) {
        target = PivotVersionObject{e_commit, 0, 0, 0};
      }
      if (target == p) break;
      if (rc.pivot.compare_exchange(w0, encode(target))) {
        if (e.blind && p.epoch != e_commit && target.pv == 1)
          live_claim_done = true;
        break;
      }
    }
  }

  // A live claimant's reads join the merged read sets of the pivots it
  // consumed, before its own pivot becomes visible to readers.
  if (nwr_mode && live_claim_done) {
    for (const ReadEntry& e : txn.rs) {
      if (tid::epoch_of(e.observed) != e_commit) continue;
      Record& rc = rec(e.rec);
      uint32_t slot = slot_of(e.key);
      for (;;) {
        Word128 w0 = rc.pivot.load();
        PivotVersionObject p = decode(w0);
        if (p.epoch != e_commit || p.pv == 0) break;
        PivotVersionObject m = merge_read(p, slot, tid::vn_of(e.observed));
        if (m == p) break;
        if (rc.pivot.compare_exchange(w0, encode(m))) break;
      }
    }
  }

  // Group-commit log record.
  t0 = txn.sampled ? now_ticks() : 0;
  {
    LogEntry le;
    le.epoch = e_commit;
    le.bytes.resize(txn.ws.size() * (8 + cfg_.value_size) + 8);
    std::byte* p = le.bytes.data();
    uint64_t hdr = (static_cast<uint64_t>(txn.id) << 16) | txn.ws.size();
    std::memcpy(p, &hdr, 8);
    p += 8;
    for (const WriteEntry& e : txn.ws) {
      std::memcpy(p, &e.key, 8);
      p += 8;
      std::memcpy(p, e.value.data(), cfg_.value_size);
      p += cfg_.value_size;
    }
    std::lock_guard<std::mutex> g(w.log_mu);
    w.log.push_back(std::move(le));
  }
  if (txn.sampled) stat_add(w.stats.ticks.logging, now_ticks() - t0);

  // Unlock.
  for (size_t i = 0; i < txn.ws.size(); ++i)
    rec(txn.ws[i].rec).tid.store(tid::make(e_commit, new_vns[i]),
                                 std::memory_order_seq_cst);

  stat_add(w.stats.committed_baseline, 1);
  if (cfg_.verify) queue_commit(txn.id, e_commit);
  return {CommitKind::CommittedBaseline, AbortReason::None, e_commit};
}

void Engine::tick() {
  epoch_.fetch_add(1, std::memory_order_seq_cst);
  group_commit_step();
}

void Engine::drain() {
  for (;;) {
    uint32_t target = current_epoch();
    bool idle = true;
    {
      std::lock_guard<std::mutex> g(workers_mu_);
      for (auto& wp : workers_)
        if (wp->local_epoch.load() != kIdleEpoch) idle = false;
    }
    if (idle && acked_epoch() + 1 >= target) return;
    if (cfg_.epoch_ms == 0)
      tick();
    else
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

void Engine::group_commit_step() {
  uint32_t stable = current_epoch() - 1;
  {
    std::lock_guard<std::mutex> g(workers_mu_);
    for (auto& wp : workers_) {
      uint32_t le = wp->local_epoch.load(std::memory_order_seq_cst);
      if (le != kIdleEpoch && le != 0 && le - 1 < stable) stable = le - 1;
    }
  }
  uint32_t acked = acked_.load();
  if (stable <= acked || failed_.load()) return;

  // Collect log batches per epoch in (acked, stable].
  std::map<uint32_t, std::vector<std::byte>> batches;
  {
    std::lock_guard<std::mutex> g(workers_mu_);
    for (auto& wp : workers_) {
      std::lock_guard<std::mutex> lg(wp->log_mu);
      auto& log = wp->log;
      size_t kept = 0;
      for (size_t i = 0; i < log.size(); ++i) {
        if (log[i].epoch <= stable) {
          auto& b = batches[log[i].epoch];
          b.insert(b.end(), log[i].bytes.begin(), log[i].bytes.end());
        } else {
          log[kept++] = std::move(log[i]);
        }
      }
      log.resize(kept);
    }
  }
  for (uint32_t e = acked + 1; e <= stable; ++e) {
    auto it = batches.find(e);
    bool ok = true;
    if (it != batches.end() && !it->second.empty())
      ok = cfg_.sink->write(e, it->second.data(), it->second.size());
    if (ok) ok = cfg_.sink->flush(e);
    if (!ok) {
      failed_.store(true);
      return;  // acknowledgements freeze; engine is read-only now
    }
    if (cfg_.verify) release_commits(e);
    acked_.store(e, std::memory_order_seq_cst);
  }
}

void Engine::ticker_main() {
  while (!closing_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.epoch_ms));
    tick();
  }
}

// --- verify-mode recorder ---------------------------------------------------

void Engine::record_op(const Op& op) {
  std::lock_guard<std::mutex> g(rec_mu_);
  if (recorded_.size() >= cfg_.max_recorded_ops) {
    record_overflow_ = true;
    return;
  }
  recorded_.push_back(op);
}

void Engine::queue_commit(TxnId txn, uint32_t epoch) {
  std::lock_guard<std::mutex> g(rec_mu_);
  pending_commits_[epoch].push_back({rec_seq_++, txn});
}

void Engine::note_install(uint64_t key, TxnId txn, uint32_t epoch) {
  std::lock_guard<std::mutex> g(rec_mu_);
  item_versions_[item_name(key)].by_epoch[epoch].second.push_back(txn);
}

void Engine::note_omit(uint64_t key, TxnId txn, uint32_t epoch) {
  std::lock_guard<std::mutex> g(rec_mu_);
  item_versions_[item_name(key)].by_epoch[epoch].first.push_back(txn);
  omitted_.insert({item_name(key), txn});
}

void Engine::release_commits(uint32_t epoch) {
  std::lock_guard<std::mutex> g(rec_mu_);
  auto it = pending_commits_.find(epoch);
  if (it == pending_commits_.end()) return;
  std::sort(it->second.begin(), it->second.end());
  for (auto& [seq, txn] : it->second) {
    if (recorded_.size() >= cfg_.max_recorded_ops) {
      record_overflow_ = true;
      break;
    }
    recorded_.push_back(commit_op(txn));
  }
  pending_commits_.erase(it);
}

VerifyDump Engine::verify_dump() {
  std::lock_guard<std::mutex> g(rec_mu_);
  if (record_overflow_)
    throw HistoryError("verification buffer overflow; raise max_recorded_ops");
  VerifyDump d;
  d.schedule.ops = recorded_;
  // Any still-pending commits (engine not drained) append in epoch order.
  for (auto& [epoch, list] : pending_commits_) {
    std::sort(list.begin(), list.end());
    for (auto& [seq, txn] : list) d.schedule.ops.push_back(commit_op(txn));
  }
  pending_commits_.clear();
  recorded_ = d.schedule.ops;

  for (auto& [item, pv] : item_versions_) {
    auto& order = d.version_order.items[item];
    for (auto& [epoch, seg] : pv.by_epoch) {
      for (TxnId t : seg.first) order.push_back(t);   // omitted, pre-pivot
      for (TxnId t : seg.second) order.push_back(t);  // installed, vn order
    }
  }
  for (const Op& op : d.schedule.ops)
    if (op.kind == OpKind::Commit) d.serial_order.order.push_back(op.txn);
  d.omitted = omitted_;
  return d;
}

}  // namespace nwrdb
