#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nwrdb/bench.hpp"
#include "nwrdb/mvsg.hpp"
#include "nwrdb/nwr_rules.hpp"

using namespace nwrdb;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* pf(bool b) { return b ? "pass" : "fail"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serializability oracle over recorded histories"};
  app.require_subcommand(1);

  // oracle check
  auto* check_cmd = app.add_subcommand(
      "check", "serializability of a history, with or without a version order");
  std::string history_path, vo_path;
  bool want_strict = false, want_recoverable = false;
  check_cmd->add_option("history", history_path, "history file")->required();
  check_cmd->add_option("--version-order", vo_path,
                        "check this order instead of searching");
  check_cmd->add_flag("--strict", want_strict, "also check strictness");
  check_cmd->add_flag("--recoverable", want_recoverable,
                      "also check recoverability");

  // oracle nwr
  auto* nwr_cmd =
      app.add_subcommand("nwr", "per-rule verdicts for a commit decision");
  std::string nwr_history, base_path, cand_path;
  uint32_t tj = 0;
  nwr_cmd->add_option("history", nwr_history)->required();
  nwr_cmd->add_option("base-vo", base_path)->required();
  nwr_cmd->add_option("candidate-vo", cand_path)->required();
  nwr_cmd->add_option("--txn", tj, "running transaction id")->required();

  // oracle verify
  auto* verify_cmd = app.add_subcommand(
      "verify", "lemma checks for an engine dump (history, order, serial)");
  std::string v_history, v_vo, v_serial;
  verify_cmd->add_option("history", v_history)->required();
  verify_cmd->add_option("version-order", v_vo)->required();
  verify_cmd->add_option("serial", v_serial,
                         "acknowledgement order (commit order used if absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check_cmd) {
      Schedule s = parse_history(slurp(history_path));
      bool ok = true;
      std::optional<VersionOrder> witness;
      if (!vo_path.empty()) {
        VersionOrder vo = parse_version_order(slurp(vo_path));
        bool acyclic = is_acyclic(build_mvsg(s, vo));
        std::cout << "serializable(given order): " << pf(acyclic) << "\n";
        ok &= acyclic;
        if (acyclic) witness = vo;
      } else {
        MvsrResult r = is_mvsr(s);
        std::cout << "serializable: " << pf(r.serializable) << "\n";
        ok &= r.serializable;
        if (r.witness) {
          witness = r.witness;
          std::cout << "witness:\n" << serialize_version_order(*r.witness);
        }
      }
      if (want_recoverable) {
        bool rec = check_recoverable(s);
        std::cout << "recoverable: " << pf(rec) << "\n";
        ok &= rec;
      }
      if (want_strict) {
        bool strict = false;
        if (witness) {
          LemmaVerdict v = check_lemmas(s, *witness, {});
          strict = v.strict;
        }
        std::cout << "strict-serializable: " << pf(strict) << "\n";
        ok &= strict;
      }
      return ok ? 0 : 1;
    }

    if (*nwr_cmd) {
      NwrInstance inst;
      inst.s = parse_history(slurp(nwr_history));
      inst.base_vo = parse_version_order(slurp(base_path));
      inst.candidate_vo = parse_version_order(slurp(cand_path));
      inst.tj = tj;
      if (!inst.s.running(tj))
        throw HistoryError("txn " + std::to_string(tj) + " is not running");
      RuleVerdict v = check_all_rules(inst);
      std::cout << "nv: " << pf(v.nv) << "\n"
                << "pv: " << pf(v.pv) << "\n"
                << "sr: " << pf(v.sr) << "\n"
                << "st: " << pf(v.st) << "\n"
                << "rc: " << pf(v.rc) << "\n";
      if (!v.all()) std::cout << "detail: " << v.detail << "\n";
      SuccessorsVerdict sv = validate_successors_reference(inst);
      std::cout << "successors: "
                << (sv == SuccessorsVerdict::Acyclic       ? "acyclic"
                    : sv == SuccessorsVerdict::StViolation ? "st-violation"
                                                           : "cyclic")
                << "\n";
      return v.all() ? 0 : 1;
    }

    if (*verify_cmd) {
      Schedule s = parse_history(slurp(v_history));
      VersionOrder vo = parse_version_order(slurp(v_vo));
      if (!v_serial.empty()) {
        SerialOrder m = parse_serial_order(slurp(v_serial));
        Schedule cp = committed_projection(s);
        if (!m.covers(cp.txns()))
          throw HistoryError("serial order does not cover committed txns");
      }
      LemmaVerdict v = check_lemmas(s, vo, {});
      std::cout << "serializable: " << pf(v.serializable) << "\n"
                << "strict-serializable: " << pf(v.strict) << "\n"
                << "recoverable: " << pf(v.recoverable) << "\n";
      if (!v.all() && !v.detail.empty())
        std::cout << "detail: " << v.detail << "\n";
      return (v.serializable && v.strict && v.recoverable) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
