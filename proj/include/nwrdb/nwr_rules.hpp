#pragma once

#include <set>
#include <string>

#include "nwrdb/history.hpp"
#include "nwrdb/mvsg.hpp"

namespace nwrdb {

// A commit-time decision point: schedule s with running transaction tj,
// the base version order (acyclic for CP(s)), and a candidate order that
// additionally places tj's versions.
struct NwrInstance {
  Schedule s;
  VersionOrder base_vo;       // orders committed versions
  VersionOrder candidate_vo;  // orders committed versions plus tj's
  TxnId tj = 0;

  std::vector<std::pair<std::string, TxnId>> read_set() const {
    return s.read_set(tj);
  }
  std::vector<std::string> write_set() const { return s.write_set(tj); }

  // Schedule with c_j appended.
  Schedule with_commit() const;
  // MVSG(CP(s) + c_j, candidate_vo).
  Mvsg candidate_mvsg() const;
};

struct RuleVerdict {
  bool nv = false, pv = false, sr = false, st = false, rc = false;
  std::string detail;  // first failure, empty when all pass
  bool all() const { return nv && pv && sr && st && rc; }
};

// Every version tj writes has a later version in the candidate order.
bool check_nv_rule(const NwrInstance& inst);
// The candidate order restricted to versions not written by tj equals the
// base order so restricted, per item.
bool check_pv_rule(const NwrInstance& inst);
// tj not reachable from itself in the candidate MVSG.
bool check_sr_rule(const NwrInstance& inst);
// Every transaction reachable from tj committed after tj's first op.
bool check_st_rule(const NwrInstance& inst);
// Every version tj read was written by a committed transaction.
bool check_rc_rule(const NwrInstance& inst);

RuleVerdict check_all_rules(const NwrInstance& inst);

// RW- / WW- out-neighbors of tj in the candidate MVSG.
std::set<TxnId> overwriters(const NwrInstance& inst);
std::set<TxnId> successors(const NwrInstance& inst);

enum class SuccessorsVerdict { Acyclic, Cyclic, StViolation };

// Reference validation over successors and their reachable sets:
// (A) collect T, (B) concurrency with tj, (C) writes of T against tj's
// reads, (D) reads of T against tj's writes.
SuccessorsVerdict validate_successors_reference(const NwrInstance& inst);

// Every outbound edge of tj in the candidate MVSG is RW or WW.
bool theorem2_holds(const NwrInstance& inst);

}  // namespace nwrdb
