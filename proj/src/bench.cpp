#include "nwrdb/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstring>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nwrdb/mvsg.hpp"

namespace nwrdb {

namespace {

const char* abort_reason_name(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::ReadSetInvalid: return "read_set_invalid";
    case AbortReason::DuplicateInsert: return "duplicate_insert";
    case AbortReason::MissingKey: return "missing_key";
    case AbortReason::EngineReadOnly: return "engine_read_only";
  }
  return "?";
}

const char* fallback_name(NwrFallback f) {
  switch (f) {
    case NwrFallback::None: return "none";
    case NwrFallback::StaleEpoch: return "stale_epoch";
    case NwrFallback::DeadPivot: return "dead_pivot";
    case NwrFallback::FlagSet: return "flag_set";
    case NwrFallback::PivotConsumed: return "pivot_consumed";
    case NwrFallback::ReadNotPivot: return "read_not_pivot";
    case NwrFallback::ReadFlagged: return "read_flagged";
    case NwrFallback::Compressed: return "compressed";
    case NwrFallback::ReadSetStale: return "read_set_stale";
    case NwrFallback::PublishRace: return "publish_race";
    case NwrFallback::kCount: break;
  }
  return "?";
}

struct StatsSnapshot {
  uint64_t attempted = 0, baseline = 0, nwr = 0;
  uint64_t aborted[5] = {};
  uint64_t fallback[static_cast<size_t>(NwrFallback::kCount)] = {};
  PhaseTicks ticks;

  StatsSnapshot& operator+=(const WorkerStats& w) {
    attempted += stat_get(w.attempted);
    baseline += stat_get(w.committed_baseline);
    nwr += stat_get(w.committed_nwr);
    for (int i = 0; i < 5; ++i) aborted[i] += stat_get(w.aborted[i]);
    for (size_t i = 0; i < static_cast<size_t>(NwrFallback::kCount); ++i)
      fallback[i] += stat_get(w.fallback[i]);
    ticks.index += stat_get(w.ticks.index);
    ticks.validation += stat_get(w.ticks.validation);
    ticks.nwr_overhead += stat_get(w.ticks.nwr_overhead);
    ticks.lockwait += stat_get(w.ticks.lockwait);
    ticks.logging += stat_get(w.ticks.logging);
    ticks.total += stat_get(w.ticks.total);
    return *this;
  }
  StatsSnapshot diff(const StatsSnapshot& base) const {
    StatsSnapshot d = *this;
    d.attempted -= base.attempted;
    d.baseline -= base.baseline;
    d.nwr -= base.nwr;
    for (int i = 0; i < 5; ++i) d.aborted[i] -= base.aborted[i];
    for (size_t i = 0; i < static_cast<size_t>(NwrFallback::kCount); ++i)
      d.fallback[i] -= base.fallback[i];
    PhaseTicks t = ticks;
    t.index -= base.ticks.index;
    t.validation -= base.ticks.validation;
    t.nwr_overhead -= base.ticks.nwr_overhead;
    t.lockwait -= base.ticks.lockwait;
    t.logging -= base.ticks.logging;
    t.total -= base.ticks.total;
    d.ticks = t;
    return d;
  }
};

StatsSnapshot collect(const Engine& eng) {
  StatsSnapshot s;
  for (size_t i = 0; i < eng.worker_count(); ++i)
    s += eng.worker_stats(static_cast<uint32_t>(i));
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (epoch_ms < 1) throw std::invalid_argument("epoch_ms must be >= 1");
  workload.validate();
}

const char* protocol_name(Protocol p) {
  return p == Protocol::Silo ? "silo" : "silo-nwr";
}

Protocol protocol_from_name(const std::string& name) {
  if (name == "silo") return Protocol::Silo;
  if (name == "silo-nwr" || name == "silo_nwr") return Protocol::SiloNwr;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

LemmaVerdict check_lemmas(
    const Schedule& s, const VersionOrder& vo,
    const std::set<std::pair<std::string, TxnId>>& omitted) {
  LemmaVerdict v;

  Mvsg g = build_mvsg(s, vo);
  // Commit-order-first topological sort: ready nodes leave in commit order.
  std::map<TxnId, uint64_t> commit_pos;
  uint64_t pos = 0;
  for (const Op& op : s.ops)
    if (op.kind == OpKind::Commit) commit_pos[op.txn] = pos++;
  auto order = topo_sort_by_priority(
      g, [&](TxnId t) { return commit_pos.count(t) ? commit_pos[t] : ~0ull; });

  v.serializable = order.has_value();
  v.recoverable = check_recoverable(s);
  if (order) {
    SerialOrder m{*order};
    v.strict = check_strictly_serializable(s, m);
  }
  v.non_visible = true;
  for (const Op& op : s.ops) {
    if (op.kind == OpKind::Read && omitted.count({op.item, op.writer})) {
      v.non_visible = false;
      break;
    }
  }
  if (!v.serializable) v.detail = "witness version order yields a cycle";
  else if (!v.recoverable) v.detail = "read from an uncommitted transaction";
  else if (!v.strict) v.detail = "serial order breaks real-time precedence";
  else if (!v.non_visible) v.detail = "an omitted version was read";
  return v;
}

RunReport run(const RunConfig& cfg) {
  cfg.validate();

  EngineConfig ecfg;
  ecfg.protocol = cfg.protocol;
  ecfg.capacity = cfg.workload.records + 1024;
  ecfg.value_size = cfg.workload.value_size;
  ecfg.epoch_ms = cfg.epoch_ms;
  ecfg.verify = cfg.verify;
  ecfg.max_recorded_ops = 4u << 20;
  Engine eng(ecfg);

  std::vector<std::byte> init(cfg.workload.value_size);
  for (uint64_t k = 0; k < cfg.workload.records; ++k) {
    std::memcpy(init.data(), &k, std::min<size_t>(8, init.size()));
    eng.load(k, init.data(), init.size());
  }

  std::vector<uint32_t> worker_ids(cfg.threads);
  for (uint32_t t = 0; t < cfg.threads; ++t) worker_ids[t] = eng.register_worker();

  std::atomic<bool> stop{false};
  std::atomic<bool> go{false};
  std::vector<std::thread> threads;
  threads.reserve(cfg.threads);

  for (uint32_t t = 0; t < cfg.threads; ++t) {
    threads.emplace_back([&, t] {
      WorkloadGenerator gen(cfg.workload, t);
      std::vector<TxnOp> ops;
      std::vector<std::byte> buf(cfg.workload.value_size);
      std::vector<std::byte> val(cfg.workload.value_size);
      while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
      uint64_t done = 0;
      while (!stop.load(std::memory_order_relaxed)) {
        gen.next_txn(ops);
        Txn txn = eng.begin(worker_ids[t]);
        uint64_t tag = (static_cast<uint64_t>(txn.id) << 8) | (t & 0xFF);
        bool dead = false;
        for (size_t i = 0; i < ops.size() && !dead; ++i) {
          const TxnOp& op = ops[i];
          switch (op.kind) {
            case TxnOpKind::Read:
              if (!eng.read(txn, op.key, buf.data())) dead = true;
              break;
            case TxnOpKind::ReadModifyWrite:
              if (!eng.read(txn, op.key, buf.data())) {
                dead = true;
                break;
              }
              [[fallthrough]];
            case TxnOpKind::BlindWrite:
              std::memcpy(val.data(), &tag, std::min<size_t>(8, val.size()));
              eng.write(txn, op.key, val.data(), val.size());
              break;
          }
        }
        if (dead) {
          eng.abort(txn);
        } else {
          eng.commit(txn);
        }
        if (cfg.txns_per_worker && ++done >= cfg.txns_per_worker) break;
      }
    });
  }

  using clock = std::chrono::steady_clock;
  go.store(true, std::memory_order_release);

  StatsSnapshot base;
  double measured_s = 0.0;
  if (cfg.txns_per_worker == 0) {
    // One-epoch warmup keeps first-blind-write resets out of the numbers.
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg.epoch_ms));
    base = collect(eng);
    auto t0 = clock::now();
    std::this_thread::sleep_for(
        std::chrono::duration<double>(cfg.duration_s));
    measured_s = std::chrono::duration<double>(clock::now() - t0).count();
    stop.store(true);
    for (auto& th : threads) th.join();
  } else {
    auto t0 = clock::now();
    for (auto& th : threads) th.join();
    stop.store(true);
    measured_s = std::chrono::duration<double>(clock::now() - t0).count();
  }
  StatsSnapshot end = collect(eng);
  StatsSnapshot d = cfg.txns_per_worker == 0 ? end.diff(base) : end;

  RunReport r;
  r.protocol = protocol_name(cfg.protocol);
  r.threads = cfg.threads;
  r.theta = cfg.workload.theta;
  r.epoch_ms = cfg.epoch_ms;
  r.duration_s = measured_s;
  r.attempted = d.attempted;
  r.committed = d.baseline + d.nwr;
  r.committed_nwr = d.nwr;
  for (int i = 1; i < 5; ++i) {
    r.aborts += d.aborted[i];
    if (d.aborted[i])
      r.abort_causes[abort_reason_name(static_cast<AbortReason>(i))] =
          d.aborted[i];
  }
  for (size_t i = 1; i < static_cast<size_t>(NwrFallback::kCount); ++i)
    if (d.fallback[i])
      r.nwr_fallbacks[fallback_name(static_cast<NwrFallback>(i))] =
          d.fallback[i];
  r.throughput = measured_s > 0 ? double(r.committed) / measured_s : 0.0;
  r.commit_ratio_pct =
      r.attempted ? 100.0 * double(r.committed) / double(r.attempted) : 0.0;
  r.commit_with_nwr_pct =
      r.attempted ? 100.0 * double(r.committed_nwr) / double(r.attempted) : 0.0;

  const PhaseTicks& tk = d.ticks;
  if (tk.total > 0) {
    uint64_t accounted =
        tk.index + tk.validation + tk.nwr_overhead + tk.lockwait + tk.logging;
    uint64_t other = tk.total > accounted ? tk.total - accounted : 0;
    auto pct = [&](uint64_t v) { return 100.0 * double(v) / double(tk.total); };
    r.breakdown_pct["index"] = pct(tk.index);
    r.breakdown_pct["validation"] = pct(tk.validation);
    r.breakdown_pct["nwr_overhead"] = pct(tk.nwr_overhead);
    r.breakdown_pct["lockwait"] = pct(tk.lockwait);
    r.breakdown_pct["logging"] = pct(tk.logging);
    r.breakdown_pct["other"] = pct(other);
  }

  if (cfg.verify) {
    eng.drain();
    VerifyDump dump = eng.verify_dump();
    r.verify = check_lemmas(dump.schedule, dump.version_order, dump.omitted);
  }
  return r;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["protocol"] = protocol;
  j["threads"] = threads;
  j["theta"] = theta;
  j["epoch_ms"] = epoch_ms;
  j["duration_s"] = duration_s;
  j["attempted"] = attempted;
  j["committed"] = committed;
  j["committed_nwr"] = committed_nwr;
  j["aborts"] = aborts;
  j["abort_causes"] = abort_causes;
  j["nwr_fallbacks"] = nwr_fallbacks;
  j["throughput"] = throughput;
  j["commit_ratio_pct"] = commit_ratio_pct;
  j["commit_with_nwr_pct"] = commit_with_nwr_pct;
  j["breakdown_pct"] = breakdown_pct;
  if (verify) {
    j["verify"] = {{"serializable", verify->serializable},
                   {"recoverable", verify->recoverable},
                   {"strict", verify->strict},
                   {"non_visible", verify->non_visible},
                   {"detail", verify->detail}};
  }
  return j.dump(2);
}

std::string RunReport::csv_header() {
  return "protocol,threads,theta,epoch_ms,throughput,aborts,commit_pct,nwr_pct";
}

std::string RunReport::csv_row() const {
  std::ostringstream out;
  out << protocol << "," << threads << "," << theta << "," << epoch_ms << ","
      << uint64_t(throughput) << "," << aborts << "," << commit_ratio_pct
      << "," << commit_with_nwr_pct;
  return out.str();
}

std::string sweep(const std::string& matrix_text) {
  std::vector<std::string> protocols = {"silo", "silo-nwr"};
  std::vector<double> thetas = {0.9};
  std::vector<uint32_t> epochs = {40};
  uint32_t threads = 1;
  double duration = 1.0;
  WorkloadConfig wl = ycsb_a();
  uint64_t txns_per_worker = 0;

  std::istringstream in(matrix_text);
  std::string line;
  auto split = [](const std::string& v) {
    std::vector<std::string> out;
    std::istringstream s(v);
    std::string tok;
    while (std::getline(s, tok, ',')) out.push_back(tok);
    return out;
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && isspace((unsigned char)s.front())) s.erase(s.begin());
      while (!s.empty() && isspace((unsigned char)s.back())) s.pop_back();
    };
    trim(key);
    trim(val);
    if (key.empty() || val.empty()) continue;
    if (key == "protocols") {
      protocols = split(val);
    } else if (key == "thetas") {
      thetas.clear();
      for (auto& t : split(val)) thetas.push_back(std::stod(t));
    } else if (key == "epoch_ms") {
      epochs.clear();
      for (auto& t : split(val)) epochs.push_back(std::stoul(t));
    } else if (key == "threads") {
      threads = std::stoul(val);
    } else if (key == "duration_s") {
      duration = std::stod(val);
    } else if (key == "workload") {
      double theta = wl.theta;
      wl = preset(val);
      wl.theta = theta;
    } else if (key == "records") {
      wl.records = std::stoull(val);
    } else if (key == "seed") {
      wl.seed = std::stoull(val);
    } else if (key == "txns_per_worker") {
      txns_per_worker = std::stoull(val);
    } else {
      throw std::invalid_argument("unknown matrix key '" + key + "'");
    }
  }

  std::ostringstream csv;
  csv << RunReport::csv_header() << "\n";
  for (const std::string& proto : protocols) {
    for (double theta : thetas) {
      for (uint32_t ep : epochs) {
        RunConfig rc;
        rc.protocol = protocol_from_name(proto);
        rc.threads = threads;
        rc.duration_s = duration;
        rc.epoch_ms = ep;
        rc.workload = wl;
        rc.workload.theta = theta;
        rc.txns_per_worker = txns_per_worker;
        RunReport rep = run(rc);
        csv << rep.csv_row() << "\n";
      }
    }
  }
  return csv.str();
}

}  // namespace nwrdb
