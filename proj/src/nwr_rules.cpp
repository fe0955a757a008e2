#include "nwrdb/nwr_rules.hpp"

#include <algorithm>

namespace nwrdb {

Schedule NwrInstance::with_commit() const {
  Schedule out = s;
  out.ops.push_back(commit_op(tj));
  return out;
}

Mvsg NwrInstance::candidate_mvsg() const {
  return build_mvsg(with_commit(), candidate_vo);
}

bool check_nv_rule(const NwrInstance& inst) {
  for (const std::string& item : inst.write_set()) {
    auto it = inst.candidate_vo.items.find(item);
    if (it == inst.candidate_vo.items.end()) return false;
    const auto& order = it->second;
    auto pos = std::find(order.begin(), order.end(), inst.tj);
    if (pos == order.end()) return false;
    if (pos + 1 == order.end()) return false;  // latest version, visible
  }
  return true;
}

bool check_pv_rule(const NwrInstance& inst) {
  // Items: the union of both orders. Restriction removes tj's versions.
  std::set<std::string> items;
  for (const auto& [item, _] : inst.base_vo.items) items.insert(item);
  for (const auto& [item, _] : inst.candidate_vo.items) items.insert(item);

  for (const std::string& item : items) {
    std::vector<TxnId> base, cand;
    if (auto it = inst.base_vo.items.find(item); it != inst.base_vo.items.end())
      for (TxnId w : it->second)
        if (w != inst.tj) base.push_back(w);
    if (auto it = inst.candidate_vo.items.find(item);
        it != inst.candidate_vo.items.end())
      for (TxnId w : it->second)
        if (w != inst.tj) cand.push_back(w);
    if (base != cand) return false;
  }
  return true;
}

bool check_sr_rule(const NwrInstance& inst) {
  Mvsg g = inst.candidate_mvsg();
  return reachable_set(g, inst.tj).count(inst.tj) == 0;
}

bool check_st_rule(const NwrInstance& inst) {
  Mvsg g = inst.candidate_mvsg();
  size_t tj_first = inst.s.first_pos(inst.tj);
  for (TxnId tk : reachable_set(g, inst.tj)) {
    if (tk == inst.tj) continue;
    auto ck = inst.s.terminal_pos(tk);
    if (ck && *ck < tj_first) return false;
  }
  return true;
}

bool check_rc_rule(const NwrInstance& inst) {
  for (const auto& [item, writer] : inst.read_set()) {
    if (writer == inst.tj) continue;
    if (!inst.s.committed(writer)) return false;
  }
  return true;
}

RuleVerdict check_all_rules(const NwrInstance& inst) {
  RuleVerdict v;
  v.nv = check_nv_rule(inst);
  v.pv = check_pv_rule(inst);
  v.sr = check_sr_rule(inst);
  v.st = check_st_rule(inst);
  v.rc = check_rc_rule(inst);
  if (!v.nv) v.detail = "nv: some write is the latest version";
  else if (!v.pv) v.detail = "pv: candidate order disturbs committed versions";
  else if (!v.sr) v.detail = "sr: tj lies on a cycle";
  else if (!v.st) v.detail = "st: a reachable transaction committed before tj began";
  else if (!v.rc) v.detail = "rc: tj read an uncommitted version";
  return v;
}

std::set<TxnId> overwriters(const NwrInstance& inst) {
  return inst.candidate_mvsg().out_neighbors(inst.tj, EdgeKind::RW);
}

std::set<TxnId> successors(const NwrInstance& inst) {
  return inst.candidate_mvsg().out_neighbors(inst.tj, EdgeKind::WW);
}

SuccessorsVerdict validate_successors_reference(const NwrInstance& inst) {
  Mvsg g = inst.candidate_mvsg();
  std::set<TxnId> succ = g.out_neighbors(inst.tj, EdgeKind::WW);

  // (A) successors and everything reachable from them.
  std::set<TxnId> t_set = succ;
  for (TxnId tk : succ)
    for (TxnId ti : reachable_set(g, tk)) t_set.insert(ti);
  t_set.erase(inst.tj);

  size_t tj_first = inst.s.first_pos(inst.tj);
  auto rs_j = inst.read_set();
  auto ws_j = inst.write_set();

  for (TxnId tm : t_set) {
    // (B) tm must not have committed before tj began.
    auto cm = inst.s.terminal_pos(tm);
    if (cm && *cm < tj_first) return SuccessorsVerdict::StViolation;

    // (C) some y_m in ws_m at or below a version tj read.
    for (const std::string& ym : inst.s.write_set(tm)) {
      for (const auto& [item, writer] : rs_j) {
        if (item != ym) continue;
        if (tm == writer ||
            inst.candidate_vo.precedes(item, tm, writer))
          return SuccessorsVerdict::Cyclic;
      }
    }

    // (D) some y_g read by tm below a version tj writes.
    for (const auto& [item, writer] : inst.s.read_set(tm)) {
      for (const std::string& yj : ws_j) {
        if (item != yj) continue;
        if (inst.candidate_vo.precedes(item, writer, inst.tj))
          return SuccessorsVerdict::Cyclic;
      }
    }
  }
  return SuccessorsVerdict::Acyclic;
}

bool theorem2_holds(const NwrInstance& inst) {
  Mvsg g = inst.candidate_mvsg();
  for (const Edge& e : g.edges) {
    if (e.from == inst.tj && e.kind == EdgeKind::WR) return false;
  }
  return true;
}

}  // namespace nwrdb
