#include "nwrdb/history.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace nwrdb {

Op read_op(TxnId txn, std::string item, TxnId writer) {
  return Op{OpKind::Read, txn, std::move(item), writer};
}
Op write_op(TxnId txn, std::string item) {
  return Op{OpKind::Write, txn, std::move(item), txn};
}
Op commit_op(TxnId txn) { return Op{OpKind::Commit, txn, {}, 0}; }
Op abort_op(TxnId txn) { return Op{OpKind::Abort, txn, {}, 0}; }

std::set<TxnId> Schedule::txns() const {
  std::set<TxnId> out;
  for (const Op& op : ops) out.insert(op.txn);
  return out;
}

size_t Schedule::first_pos(TxnId t) const {
  for (size_t i = 0; i < ops.size(); ++i)
    if (ops[i].txn == t) return i;
  return ops.size();
}

std::optional<size_t> Schedule::terminal_pos(TxnId t) const {
  for (size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].txn == t &&
        (ops[i].kind == OpKind::Commit || ops[i].kind == OpKind::Abort))
      return i;
  }
  return std::nullopt;
}

std::optional<OpKind> Schedule::terminal_kind(TxnId t) const {
  auto pos = terminal_pos(t);
  if (!pos) return std::nullopt;
  return ops[*pos].kind;
}

bool Schedule::running(TxnId t) const {
  return first_pos(t) < ops.size() && !terminal_pos(t);
}

std::vector<std::pair<std::string, TxnId>> Schedule::read_set(TxnId t) const {
  std::vector<std::pair<std::string, TxnId>> out;
  for (const Op& op : ops) {
    if (op.kind == OpKind::Read && op.txn == t && op.writer != t) {
      auto entry = std::make_pair(op.item, op.writer);
      if (std::find(out.begin(), out.end(), entry) == out.end())
        out.push_back(std::move(entry));
    }
  }
  return out;
}

std::vector<std::string> Schedule::write_set(TxnId t) const {
  std::vector<std::string> out;
  for (const Op& op : ops) {
    if (op.kind == OpKind::Write && op.txn == t) {
      if (std::find(out.begin(), out.end(), op.item) == out.end())
        out.push_back(op.item);
    }
  }
  return out;
}

size_t VersionOrder::rank(const std::string& item, TxnId writer) const {
  auto it = items.find(item);
  if (it == items.end())
    throw HistoryError("version order has no item '" + item + "'");
  const auto& order = it->second;
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] == writer) return i;
  throw HistoryError("version order for '" + item + "' is missing writer " +
                     std::to_string(writer));
}

bool VersionOrder::contains(const std::string& item, TxnId writer) const {
  auto it = items.find(item);
  if (it == items.end()) return false;
  const auto& order = it->second;
  return std::find(order.begin(), order.end(), writer) != order.end();
}

bool SerialOrder::covers(const std::set<TxnId>& txns) const {
  std::set<TxnId> have(order.begin(), order.end());
  if (have.size() != order.size()) return false;  // duplicates
  return std::all_of(txns.begin(), txns.end(),
                     [&](TxnId t) { return have.count(t) > 0; });
}

void validate_schedule(const Schedule& s) {
  std::unordered_map<TxnId, bool> terminated;
  std::unordered_set<std::string> versions;  // "writer item"
  bool non_init_seen = false;

  auto version_key = [](TxnId w, const std::string& item) {
    return std::to_string(w) + " " + item;
  };

  for (size_t i = 0; i < s.ops.size(); ++i) {
    const Op& op = s.ops[i];
    if (terminated.count(op.txn) && terminated[op.txn])
      throw HistoryError(i + 1, "op after terminal of txn " +
                                    std::to_string(op.txn));
    if (op.txn == kInitTxn && non_init_seen)
      throw HistoryError(i + 1, "initializing txn op after other txns");
    if (op.txn != kInitTxn) non_init_seen = true;
    switch (op.kind) {
      case OpKind::Write: {
        auto key = version_key(op.txn, op.item);
        if (versions.count(key))
          throw HistoryError(i + 1, "txn " + std::to_string(op.txn) +
                                        " writes '" + op.item + "' twice");
        versions.insert(key);
        break;
      }
      case OpKind::Read: {
        if (!versions.count(version_key(op.writer, op.item)))
          throw HistoryError(i + 1, "read of nonexistent version " + op.item +
                                        " by writer " +
                                        std::to_string(op.writer));
        break;
      }
      case OpKind::Commit:
      case OpKind::Abort:
        terminated[op.txn] = true;
        break;
    }
  }
}

Schedule committed_projection(const Schedule& s) {
  std::unordered_set<TxnId> keep;
  for (const Op& op : s.ops)
    if (op.kind == OpKind::Commit) keep.insert(op.txn);
  Schedule out;
  for (const Op& op : s.ops)
    if (keep.count(op.txn)) out.ops.push_back(op);
  return out;
}

bool check_recoverable(const Schedule& s) {
  std::unordered_map<TxnId, size_t> commit_pos;
  for (size_t i = 0; i < s.ops.size(); ++i)
    if (s.ops[i].kind == OpKind::Commit) commit_pos[s.ops[i].txn] = i;

  for (const Op& op : s.ops) {
    if (op.kind != OpKind::Read || op.writer == op.txn) continue;
    auto cj = commit_pos.find(op.txn);
    if (cj == commit_pos.end()) continue;  // reader never commits
    auto ci = commit_pos.find(op.writer);
    if (ci == commit_pos.end() || ci->second > cj->second) return false;
  }
  return true;
}

bool check_strictly_serializable(const Schedule& s, const SerialOrder& m) {
  Schedule cp = committed_projection(s);
  std::set<TxnId> committed = cp.txns();
  if (!m.covers(committed))
    throw HistoryError("serial order does not cover committed transactions");

  std::unordered_map<TxnId, size_t> m_pos;
  for (size_t i = 0; i < m.order.size(); ++i) m_pos[m.order[i]] = i;

  // Positions in the full schedule, per the wall-clock reading of <_S.
  std::unordered_map<TxnId, size_t> first, last;
  for (size_t i = 0; i < s.ops.size(); ++i) {
    TxnId t = s.ops[i].txn;
    if (!committed.count(t)) continue;
    if (!first.count(t)) first[t] = i;
    last[t] = i;
  }

  for (TxnId ti : committed) {
    for (TxnId tk : committed) {
      if (ti == tk) continue;
      if (last[ti] < first[tk] && m_pos[ti] > m_pos[tk]) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

TxnId parse_txn(const std::string& tok, size_t line) {
  try {
    unsigned long v = std::stoul(tok);
    if (v > UINT32_MAX) throw std::out_of_range("txn");
    return static_cast<TxnId>(v);
  } catch (const std::exception&) {
    throw HistoryError(line, "bad txn id '" + tok + "'");
  }
}

}  // namespace

Schedule parse_history(const std::string& text) {
  Schedule s;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& kind = toks[0];
    if (kind == "r") {
      if (toks.size() != 4) throw HistoryError(lineno, "r <txn> <item> <writer>");
      s.ops.push_back(read_op(parse_txn(toks[1], lineno), toks[2],
                              parse_txn(toks[3], lineno)));
    } else if (kind == "w") {
      if (toks.size() != 3) throw HistoryError(lineno, "w <txn> <item>");
      s.ops.push_back(write_op(parse_txn(toks[1], lineno), toks[2]));
    } else if (kind == "c") {
      if (toks.size() != 2) throw HistoryError(lineno, "c <txn>");
      s.ops.push_back(commit_op(parse_txn(toks[1], lineno)));
    } else if (kind == "a") {
      if (toks.size() != 2) throw HistoryError(lineno, "a <txn>");
      s.ops.push_back(abort_op(parse_txn(toks[1], lineno)));
    } else {
      throw HistoryError(lineno, "unknown op '" + kind + "'");
    }
  }
  // Re-run structural checks with line context.
  try {
    validate_schedule(s);
  } catch (const HistoryError&) {
    throw;
  }
  return s;
}

std::string serialize_history(const Schedule& s) {
  std::ostringstream out;
  for (const Op& op : s.ops) {
    switch (op.kind) {
      case OpKind::Read:
        out << "r " << op.txn << " " << op.item << " " << op.writer << "\n";
        break;
      case OpKind::Write:
        out << "w " << op.txn << " " << op.item << "\n";
        break;
      case OpKind::Commit:
        out << "c " << op.txn << "\n";
        break;
      case OpKind::Abort:
        out << "a " << op.txn << "\n";
        break;
    }
  }
  return out.str();
}

VersionOrder parse_version_order(const std::string& text) {
  VersionOrder vo;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0] != "vo" || toks.size() < 3)
      throw HistoryError(lineno, "vo <item> <writer-txn>...");
    const std::string& item = toks[1];
    if (vo.items.count(item))
      throw HistoryError(lineno, "duplicate item '" + item + "'");
    std::vector<TxnId> order;
    for (size_t i = 2; i < toks.size(); ++i) {
      TxnId w = parse_txn(toks[i], lineno);
      if (std::find(order.begin(), order.end(), w) != order.end())
        throw HistoryError(lineno, "duplicate writer in order");
      order.push_back(w);
    }
    vo.items[item] = std::move(order);
  }
  return vo;
}

std::string serialize_version_order(const VersionOrder& vo) {
  std::ostringstream out;
  for (const auto& [item, order] : vo.items) {
    out << "vo " << item;
    for (TxnId w : order) out << " " << w;
    out << "\n";
  }
  return out.str();
}

SerialOrder parse_serial_order(const std::string& text) {
  SerialOrder m;
  std::istringstream in(text);
  std::string tok;
  size_t n = 0;
  while (in >> tok) {
    if (tok[0] == '#') {  // comment to end of line
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    m.order.push_back(parse_txn(tok, ++n));
  }
  return m;
}

std::string serialize_serial_order(const SerialOrder& m) {
  std::ostringstream out;
  for (size_t i = 0; i < m.order.size(); ++i) {
    if (i) out << " ";
    out << m.order[i];
  }
  out << "\n";
  return out.str();
}

}  // namespace nwrdb
