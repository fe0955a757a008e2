#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "nwrdb/history.hpp"

namespace nwrdb {

enum class EdgeKind : uint8_t { WR, RW, WW };

struct Edge {
  TxnId from;
  TxnId to;
  EdgeKind kind;
  auto operator<=>(const Edge&) const = default;
};

// Serialization graph over the committed projection of a schedule under a
// given version order.
struct Mvsg {
  std::set<TxnId> nodes;
  std::set<Edge> edges;

  bool has_edge(TxnId from, TxnId to) const;
  std::set<TxnId> out_neighbors(TxnId t, std::optional<EdgeKind> kind = {}) const;
};

// Edge rules, for committed r_i(x_j) and committed writer t_k of x:
//   t_j -wr-> t_i;  x_j <_v x_k  =>  t_i -rw-> t_k;
//   x_k <_v x_j  =>  t_k -ww-> t_j.
// Reads of a transaction's own writes generate no edges. Throws
// HistoryError when vo misses a committed version.
Mvsg build_mvsg(const Schedule& s, const VersionOrder& vo);

bool is_acyclic(const Mvsg& g);

// Transactions reachable from t by one or more edges; t itself appears only
// when it lies on a cycle through t.
std::set<TxnId> reachable_set(const Mvsg& g, TxnId t);

// Topological sort picking, among ready nodes, the one with the smallest
// priority (commit-order-first when priority = commit position). Empty when
// the graph is cyclic.
std::optional<std::vector<TxnId>> topo_sort_by_priority(
    const Mvsg& g, const std::function<uint64_t(TxnId)>& priority);

class EnumerationGuardExceeded : public std::runtime_error {
 public:
  EnumerationGuardExceeded()
      : std::runtime_error("version order enumeration guard exceeded") {}
};

// Calls fn for every per-item permutation of the committed versions of s,
// in lexicographic order; stops early when fn returns false. Throws
// EnumerationGuardExceeded when the total order count exceeds the guard.
void enumerate_version_orders(const Schedule& s,
                              const std::function<bool(const VersionOrder&)>& fn,
                              uint64_t guard = 1'000'000);

// Count of orders enumerate_version_orders would yield.
uint64_t count_version_orders(const Schedule& s, uint64_t guard = 1'000'000);

struct MvsrResult {
  bool serializable;
  std::optional<VersionOrder> witness;  // first acyclic order when true
};

MvsrResult is_mvsr(const Schedule& s, uint64_t guard = 1'000'000);

}  // namespace nwrdb
