#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nwrdb {

using TxnId = uint32_t;

// Transaction 0 is the initializing transaction: it writes the initial
// version of every item and commits before anything else runs.
inline constexpr TxnId kInitTxn = 0;

enum class OpKind : uint8_t { Read, Write, Commit, Abort };

// A version is identified by (item, writer); a transaction writes at most
// one version per item.
struct Op {
  OpKind kind;
  TxnId txn = 0;
  std::string item;    // empty for Commit/Abort
  TxnId writer = 0;    // Read: writer of the version read; Write: == txn

  bool operator==(const Op&) const = default;
};

Op read_op(TxnId txn, std::string item, TxnId writer);
Op write_op(TxnId txn, std::string item);
Op commit_op(TxnId txn);
Op abort_op(TxnId txn);

class HistoryError : public std::runtime_error {
 public:
  HistoryError(size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  explicit HistoryError(const std::string& msg)
      : std::runtime_error(msg), line_(0) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Ordered multiversion operation log. Sequence position is <_S.
struct Schedule {
  std::vector<Op> ops;

  std::set<TxnId> txns() const;
  // Position of a transaction's first op, ops.size() if absent.
  size_t first_pos(TxnId t) const;
  // Position of c_t / a_t, npos if the transaction is still running.
  std::optional<size_t> terminal_pos(TxnId t) const;
  std::optional<OpKind> terminal_kind(TxnId t) const;
  bool committed(TxnId t) const { return terminal_kind(t) == OpKind::Commit; }
  bool running(TxnId t) const;

  // Versions read / written by t, as (item, writer) pairs. Reads of the
  // transaction's own writes are excluded; the rules quantify over
  // cross-transaction dependencies only.
  std::vector<std::pair<std::string, TxnId>> read_set(TxnId t) const;
  std::vector<std::string> write_set(TxnId t) const;

  bool operator==(const Schedule&) const = default;
};

// Per-item total order over version writers, ascending in <_v.
struct VersionOrder {
  std::map<std::string, std::vector<TxnId>> items;

  // Rank of (item, writer); throws HistoryError if the version is absent.
  size_t rank(const std::string& item, TxnId writer) const;
  bool contains(const std::string& item, TxnId writer) const;
  // x_a <_v x_b
  bool precedes(const std::string& item, TxnId a, TxnId b) const {
    return rank(item, a) < rank(item, b);
  }

  bool operator==(const VersionOrder&) const = default;
};

// Total order over committed transactions (the order M).
struct SerialOrder {
  std::vector<TxnId> order;

  bool covers(const std::set<TxnId>& txns) const;
  bool operator==(const SerialOrder&) const = default;
};

// Structural checks: program order per transaction, ops only before the
// terminal, one version per (item, txn), reads of existing versions,
// txn 0 ops (if present) form a committed prefix.
void validate_schedule(const Schedule& s);

// Ops of transactions whose terminal is Commit, original order preserved.
Schedule committed_projection(const Schedule& s);

// True iff every cross-transaction read r_j(x_i) with a committed reader
// has c_i before c_j in s.
bool check_recoverable(const Schedule& s);

// True iff whenever every op of committed t_i precedes every op of
// committed t_k in s (checked as: last op of t_i before first op of t_k),
// t_i also precedes t_k in m.
bool check_strictly_serializable(const Schedule& s, const SerialOrder& m);

// History file grammar, one op per line, '#' comments:
//   r <txn> <item> <writer-txn> | w <txn> <item> | c <txn> | a <txn>
Schedule parse_history(const std::string& text);
std::string serialize_history(const Schedule& s);

// Version order file: `vo <item> <writer-txn>...` ascending in <_v.
VersionOrder parse_version_order(const std::string& text);
std::string serialize_version_order(const VersionOrder& vo);

// Serial order file: whitespace-separated txn ids.
SerialOrder parse_serial_order(const std::string& text);
std::string serialize_serial_order(const SerialOrder& m);

}  // namespace nwrdb
