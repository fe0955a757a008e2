#pragma once

// Test-only generators and brute-force helpers. These stay independent of
// the implementation paths they are used to check.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nwrdb/history.hpp"
#include "nwrdb/mvsg.hpp"
#include "nwrdb/nwr_rules.hpp"

namespace nwrdb::testsupport {

using Rng = std::mt19937_64;

inline uint64_t pick(Rng& rng, uint64_t n) { return rng() % n; }

inline std::vector<std::string> item_pool(size_t n) {
  std::vector<std::string> items;
  for (size_t i = 0; i < n; ++i) items.push_back(std::string(1, char('x' + i % 3)) +
                                                 (i < 3 ? "" : std::to_string(i)));
  return items;
}

struct ScheduleOpts {
  size_t txns = 4;          // transactions beyond the initializing one
  size_t items = 3;
  size_t max_ops_per_txn = 3;
  double abort_prob = 0.15;
  double read_uncommitted_prob = 0.0;  // reads of uncommitted versions
  bool leave_one_running = false;      // keep the highest txn id running
};

// Random multiversion schedule. Reads reference versions that exist at the
// read position; by default only committed ones, so the result is
// recoverable by construction.
inline Schedule random_schedule(Rng& rng, const ScheduleOpts& opts) {
  auto items = item_pool(opts.items);
  Schedule s;
  for (const auto& it : items) s.ops.push_back(write_op(kInitTxn, it));
  s.ops.push_back(commit_op(kInitTxn));

  struct TxnState {
    std::vector<Op> pending;  // program order
    size_t next = 0;
    bool done = false;
  };
  std::vector<TxnState> st(opts.txns + 1);
  std::set<TxnId> committed{kInitTxn};
  std::map<std::string, std::vector<TxnId>> versions;  // existing writers
  for (const auto& it : items) versions[it] = {kInitTxn};

  // Plan ops per transaction lazily while interleaving.
  std::vector<TxnId> alive;
  std::vector<size_t> remaining(opts.txns + 1);
  for (TxnId t = 1; t <= opts.txns; ++t) {
    alive.push_back(t);
    remaining[t] = 1 + pick(rng, opts.max_ops_per_txn);
  }

  std::map<TxnId, std::set<std::string>> written;
  while (!alive.empty()) {
    size_t ai = pick(rng, alive.size());
    TxnId t = alive[ai];
    if (remaining[t] == 0) {
      bool keep_running =
          opts.leave_one_running && t == static_cast<TxnId>(opts.txns);
      if (!keep_running) {
        bool abort = std::uniform_real_distribution<>(0, 1)(rng) < opts.abort_prob;
        s.ops.push_back(abort ? abort_op(t) : commit_op(t));
        if (!abort) committed.insert(t);
      }
      alive.erase(alive.begin() + ai);
      continue;
    }
    remaining[t]--;
    const std::string& item = items[pick(rng, items.size())];
    bool do_read = pick(rng, 2) == 0;
    if (do_read) {
      // Choose a version visible under the configured policy.
      std::vector<TxnId> candidates;
      for (TxnId w : versions[item]) {
        bool ok = committed.count(w) || w == t;
        if (!ok && std::uniform_real_distribution<>(0, 1)(rng) <
                       opts.read_uncommitted_prob)
          ok = true;
        if (ok) candidates.push_back(w);
      }
      if (candidates.empty()) continue;
      s.ops.push_back(read_op(t, item, candidates[pick(rng, candidates.size())]));
    } else {
      if (written[t].count(item)) continue;  // one version per (item, txn)
      written[t].insert(item);
      versions[item].push_back(t);
      s.ops.push_back(write_op(t, item));
    }
  }
  return s;
}

// Independent filter used against committed_projection.
inline Schedule filter_committed_oracle(const Schedule& s) {
  std::set<TxnId> committed;
  for (const Op& op : s.ops)
    if (op.kind == OpKind::Commit) committed.insert(op.txn);
  Schedule out;
  for (const Op& op : s.ops)
    if (committed.count(op.txn)) out.ops.push_back(op);
  return out;
}

// Quadratic brute-force edge builder used against build_mvsg.
inline std::set<Edge> brute_force_edges(const Schedule& s,
                                        const VersionOrder& vo) {
  Schedule cp = committed_projection(s);
  std::set<TxnId> nodes = cp.txns();
  std::set<Edge> edges;
  for (const Op& r : cp.ops) {
    if (r.kind != OpKind::Read || r.txn == r.writer) continue;
    edges.insert(Edge{r.writer, r.txn, EdgeKind::WR});
    for (const Op& w : cp.ops) {
      if (w.kind != OpKind::Write || w.item != r.item) continue;
      if (w.txn == r.txn || w.txn == r.writer) continue;
      if (vo.precedes(r.item, r.writer, w.txn))
        edges.insert(Edge{r.txn, w.txn, EdgeKind::RW});
      else
        edges.insert(Edge{w.txn, r.writer, EdgeKind::WW});
    }
  }
  return edges;
}

// Version order listing every committed version in commit order of the
// writers (install order), a serial-execution-like order.
inline VersionOrder commit_order_vo(const Schedule& s) {
  Schedule cp = committed_projection(s);
  std::map<TxnId, size_t> cpos;
  for (size_t i = 0; i < cp.ops.size(); ++i)
    if (cp.ops[i].kind == OpKind::Commit) cpos[cp.ops[i].txn] = i;
  std::map<std::string, std::vector<std::pair<size_t, TxnId>>> tmp;
  for (const Op& op : cp.ops)
    if (op.kind == OpKind::Write) tmp[op.item].push_back({cpos[op.txn], op.txn});
  VersionOrder vo;
  for (auto& [item, list] : tmp) {
    std::sort(list.begin(), list.end());
    for (auto& [pos, t] : list) vo.items[item].push_back(t);
  }
  return vo;
}

struct InstanceOpts {
  size_t txns = 4;   // committed transactions in play (tj is txns+... )
  size_t items = 3;
  size_t max_ops = 3;
  double abort_prob = 0.1;
};

// Random commit-decision instance: random schedule with the last
// transaction left running, a base order that witnesses the committed
// part, and a candidate order inserting tj's versions at random spots.
// Returns nullopt when no acyclic base order exists or preconditions fail.
inline std::optional<NwrInstance> random_instance(Rng& rng,
                                                  const InstanceOpts& opts) {
  ScheduleOpts so;
  so.txns = opts.txns + 1;
  so.items = opts.items;
  so.max_ops_per_txn = opts.max_ops;
  so.abort_prob = opts.abort_prob;
  so.leave_one_running = true;
  Schedule s = random_schedule(rng, so);

  NwrInstance inst;
  inst.tj = static_cast<TxnId>(so.txns);
  if (!s.running(inst.tj)) return std::nullopt;
  if (s.write_set(inst.tj).empty()) return std::nullopt;
  inst.s = s;

  // Base order: a witness for the committed part.
  MvsrResult base = is_mvsr(s);
  if (!base.serializable) return std::nullopt;
  inst.base_vo = *base.witness;

  // The committed prefix must already be strictly serializable under the
  // commit-order-first topological order of the base graph.
  {
    Mvsg g = build_mvsg(s, inst.base_vo);
    std::map<TxnId, uint64_t> cpos;
    uint64_t i = 0;
    for (const Op& op : s.ops)
      if (op.kind == OpKind::Commit) cpos[op.txn] = i++;
    auto order = topo_sort_by_priority(
        g, [&](TxnId t) { return cpos.count(t) ? cpos[t] : ~0ull; });
    if (!order) return std::nullopt;
    if (!check_strictly_serializable(s, SerialOrder{*order}))
      return std::nullopt;
  }
  if (!check_recoverable(s)) return std::nullopt;

  // Candidate: insert tj's versions at random positions.
  inst.candidate_vo = inst.base_vo;
  for (const std::string& item : s.write_set(inst.tj)) {
    auto& order = inst.candidate_vo.items[item];
    size_t pos = pick(rng, order.size() + 1);
    order.insert(order.begin() + pos, inst.tj);
  }
  return inst;
}

}  // namespace nwrdb::testsupport
