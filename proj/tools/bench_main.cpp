#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nwrdb/bench.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transactional key-value engine benchmark harness"};
  app.require_subcommand(1);

  // bench run
  auto* run_cmd = app.add_subcommand("run", "run one protocol/workload config");
  std::string protocol = "silo-nwr";
  uint32_t threads = 1;
  double theta = 0.9;
  uint32_t epoch_ms = 40;
  double duration = 10.0;
  std::string workload = "ycsb-a";
  uint64_t records = 0;
  uint64_t seed = 1;
  uint64_t txns = 0;
  bool verify = false;
  std::string out_path;
  run_cmd->add_option("--protocol", protocol, "silo | silo-nwr");
  run_cmd->add_option("--threads", threads, "worker threads");
  run_cmd->add_option("--theta", theta, "Zipfian skew");
  run_cmd->add_option("--epoch-ms", epoch_ms, "epoch duration");
  run_cmd->add_option("--duration", duration, "seconds of measured work");
  run_cmd->add_option("--workload", workload, "ycsb-a | ycsb-b");
  run_cmd->add_option("--records", records, "table size (preset default)");
  run_cmd->add_option("--seed", seed, "workload seed");
  run_cmd->add_option("--txns", txns, "transactions per worker (overrides duration)");
  run_cmd->add_flag("--verify", verify, "record the history and run the oracle");
  run_cmd->add_option("--out", out_path, "write the JSON report here");

  // bench sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a config matrix, emit CSV");
  std::string matrix_path;
  std::string sweep_out;
  sweep_cmd->add_option("--matrix", matrix_path, "key=value matrix file")
      ->required();
  sweep_cmd->add_option("--out", sweep_out, "write the CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      nwrdb::RunConfig cfg;
      cfg.protocol = nwrdb::protocol_from_name(protocol);
      cfg.threads = threads;
      cfg.duration_s = duration;
      cfg.epoch_ms = epoch_ms;
      cfg.workload = nwrdb::preset(workload);
      cfg.workload.theta = theta;
      cfg.workload.seed = seed;
      if (records) cfg.workload.records = records;
      cfg.verify = verify;
      cfg.txns_per_worker = txns;

      nwrdb::RunReport rep = nwrdb::run(cfg);
      std::string json = rep.to_json();
      if (!out_path.empty()) spill(out_path, json + "\n");
      std::cout << json << std::endl;
      if (rep.verify && !rep.verify->all()) {
        std::cerr << "verification failed: " << rep.verify->detail << "\n";
        return 1;
      }
      return 0;
    }
    if (*sweep_cmd) {
      std::string csv = nwrdb::sweep(slurp(matrix_path));
      if (!sweep_out.empty()) spill(sweep_out, csv);
      std::cout << csv;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
