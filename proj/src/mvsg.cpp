#include "nwrdb/mvsg.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace nwrdb {

bool Mvsg::has_edge(TxnId from, TxnId to) const {
  for (EdgeKind k : {EdgeKind::WR, EdgeKind::RW, EdgeKind::WW})
    if (edges.count(Edge{from, to, k})) return true;
  return false;
}

std::set<TxnId> Mvsg::out_neighbors(TxnId t, std::optional<EdgeKind> kind) const {
  std::set<TxnId> out;
  for (const Edge& e : edges)
    if (e.from == t && (!kind || e.kind == *kind)) out.insert(e.to);
  return out;
}

Mvsg build_mvsg(const Schedule& s, const VersionOrder& vo) {
  Schedule cp = committed_projection(s);
  Mvsg g;
  g.nodes = cp.txns();

  // Committed writers per item, and presence checks against vo.
  std::map<std::string, std::vector<TxnId>> writers;
  for (const Op& op : cp.ops)
    if (op.kind == OpKind::Write) writers[op.item].push_back(op.txn);
  for (const auto& [item, ws] : writers)
    for (TxnId w : ws)
      if (!vo.contains(item, w))
        throw HistoryError("version order is missing committed version of '" +
                           item + "' by txn " + std::to_string(w));

  for (const Op& op : cp.ops) {
    if (op.kind != OpKind::Read) continue;
    TxnId ti = op.txn;
    TxnId tj = op.writer;
    if (ti == tj) continue;  // own-write reads generate no edges
    if (!g.nodes.count(tj)) continue;  // writer not committed (never for valid input)
    g.edges.insert(Edge{tj, ti, EdgeKind::WR});
    size_t rj = vo.rank(op.item, tj);
    for (TxnId tk : writers[op.item]) {
      if (tk == ti || tk == tj) continue;
      size_t rk = vo.rank(op.item, tk);
      if (rj < rk)
        g.edges.insert(Edge{ti, tk, EdgeKind::RW});
      else
        g.edges.insert(Edge{tk, tj, EdgeKind::WW});
    }
  }
  return g;
}

bool is_acyclic(const Mvsg& g) {
  return topo_sort_by_priority(g, [](TxnId t) { return t; }).has_value();
}

std::set<TxnId> reachable_set(const Mvsg& g, TxnId t) {
  std::unordered_map<TxnId, std::vector<TxnId>> adj;
  for (const Edge& e : g.edges) adj[e.from].push_back(e.to);

  std::set<TxnId> seen;
  std::vector<TxnId> stack;
  for (TxnId n : adj[t]) stack.push_back(n);
  while (!stack.empty()) {
    TxnId n = stack.back();
    stack.pop_back();
    if (seen.count(n)) continue;
    seen.insert(n);
    for (TxnId m : adj[n]) stack.push_back(m);
  }
  return seen;
}

std::optional<std::vector<TxnId>> topo_sort_by_priority(
    const Mvsg& g, const std::function<uint64_t(TxnId)>& priority) {
  std::map<TxnId, std::set<TxnId>> adj;
  std::map<TxnId, size_t> indeg;
  for (TxnId n : g.nodes) indeg[n] = 0;
  for (const Edge& e : g.edges) {
    if (adj[e.from].insert(e.to).second) indeg[e.to]++;
  }

  // (priority, txn) min-heap via ordered set.
  std::set<std::pair<uint64_t, TxnId>> ready;
  for (auto& [n, d] : indeg)
    if (d == 0) ready.insert({priority(n), n});

  std::vector<TxnId> out;
  while (!ready.empty()) {
    auto [p, n] = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(n);
    for (TxnId m : adj[n]) {
      if (--indeg[m] == 0) ready.insert({priority(m), m});
    }
  }
  if (out.size() != g.nodes.size()) return std::nullopt;
  return out;
}

namespace {

uint64_t factorial_capped(uint64_t n, uint64_t cap) {
  uint64_t f = 1;
  for (uint64_t i = 2; i <= n; ++i) {
    f *= i;
    if (f > cap) return cap + 1;
  }
  return f;
}

// Committed versions per item, writer ids sorted for lexicographic
// enumeration.
std::map<std::string, std::vector<TxnId>> committed_versions(const Schedule& s) {
  Schedule cp = committed_projection(s);
  std::map<std::string, std::vector<TxnId>> out;
  for (const Op& op : cp.ops)
    if (op.kind == OpKind::Write) out[op.item].push_back(op.txn);
  for (auto& [item, ws] : out) std::sort(ws.begin(), ws.end());
  return out;
}

}  // namespace

uint64_t count_version_orders(const Schedule& s, uint64_t guard) {
  auto versions = committed_versions(s);
  unsigned __int128 total = 1;
  for (const auto& [item, ws] : versions) {
    total *= factorial_capped(ws.size(), guard);
    if (total > guard) throw EnumerationGuardExceeded();
  }
  return static_cast<uint64_t>(total);
}

void enumerate_version_orders(const Schedule& s,
                              const std::function<bool(const VersionOrder&)>& fn,
                              uint64_t guard) {
  count_version_orders(s, guard);  // throws if too large
  auto versions = committed_versions(s);

  std::vector<std::string> items;
  std::vector<std::vector<TxnId>> perms;
  for (auto& [item, ws] : versions) {
    items.push_back(item);
    perms.push_back(ws);
  }

  VersionOrder vo;
  for (size_t i = 0; i < items.size(); ++i) vo.items[items[i]] = perms[i];

  // Odometer over per-item permutations, each advanced lexicographically.
  if (items.empty()) {
    fn(vo);
    return;
  }
  while (true) {
    for (size_t i = 0; i < items.size(); ++i) vo.items[items[i]] = perms[i];
    if (!fn(vo)) return;
    size_t i = 0;
    while (i < perms.size() &&
           !std::next_permutation(perms[i].begin(), perms[i].end())) {
      // wrapped to the first permutation; carry to the next item
      ++i;
    }
    if (i == perms.size()) break;
  }
}

MvsrResult is_mvsr(const Schedule& s, uint64_t guard) {
  MvsrResult result{false, std::nullopt};
  enumerate_version_orders(
      s,
      [&](const VersionOrder& vo) {
        if (is_acyclic(build_mvsg(s, vo))) {
          result.serializable = true;
          result.witness = vo;
          return false;
        }
        return true;
      },
      guard);
  return result;
}

}  // namespace nwrdb
