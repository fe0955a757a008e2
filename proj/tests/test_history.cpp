#include <doctest.h>

#include "nwrdb/history.hpp"
#include "support.hpp"

using namespace nwrdb;
namespace ts = nwrdb::testsupport;

TEST_CASE("committed projection basics") {
  Schedule empty;
  CHECK(committed_projection(empty).ops.empty());

  Schedule s;
  s.ops = {write_op(1, "x"), commit_op(1), write_op(2, "x"), abort_op(2)};
  Schedule cp = committed_projection(s);
  REQUIRE(cp.ops.size() == 2);
  CHECK(cp.ops[0] == write_op(1, "x"));
  CHECK(cp.ops[1] == commit_op(1));
}

TEST_CASE("committed projection matches the filtering oracle and is idempotent") {
  ts::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    ts::ScheduleOpts opts;
    opts.txns = 5;
    Schedule s = ts::random_schedule(rng, opts);
    Schedule cp = committed_projection(s);
    CHECK(cp == ts::filter_committed_oracle(s));
    CHECK(committed_projection(cp) == cp);
  }
}

TEST_CASE("recoverability") {
  Schedule no_reads;
  no_reads.ops = {write_op(1, "x"), commit_op(1)};
  CHECK(check_recoverable(no_reads));

  Schedule bad;
  bad.ops = {write_op(1, "x"), read_op(2, "x", 1), commit_op(2), commit_op(1)};
  CHECK(!check_recoverable(bad));

  Schedule good;
  good.ops = {write_op(1, "x"), commit_op(1), read_op(2, "x", 1), commit_op(2)};
  CHECK(check_recoverable(good));
}

TEST_CASE("recoverable by construction for committed-read schedules") {
  ts::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    Schedule s = ts::random_schedule(rng, {});
    CHECK(check_recoverable(s));
  }
}

TEST_CASE("strict serializability over the serial order") {
  Schedule one;
  one.ops = {write_op(1, "x"), commit_op(1)};
  CHECK(check_strictly_serializable(one, SerialOrder{{1}}));

  // Fully overlapping transactions constrain nothing.
  Schedule overlap;
  overlap.ops = {write_op(1, "x"), write_op(2, "y"), commit_op(1), commit_op(2)};
  CHECK(check_strictly_serializable(overlap, SerialOrder{{1, 2}}));
  CHECK(check_strictly_serializable(overlap, SerialOrder{{2, 1}}));

  // t1 ends before t2 begins: only (t1, t2) works.
  Schedule serial;
  serial.ops = {read_op(1, "x", 1), commit_op(1), write_op(2, "x"), commit_op(2)};
  serial.ops.insert(serial.ops.begin(), write_op(1, "x"));
  CHECK(check_strictly_serializable(serial, SerialOrder{{1, 2}}));
  CHECK(!check_strictly_serializable(serial, SerialOrder{{2, 1}}));
}

TEST_CASE("pairwise-overlapping schedules accept every permutation") {
  // Every transaction begins before any other's terminal.
  Schedule s;
  s.ops = {write_op(1, "x"), write_op(2, "y"), write_op(3, "z"),
           commit_op(2),     commit_op(1),     commit_op(3)};
  std::vector<TxnId> perm = {1, 2, 3};
  std::sort(perm.begin(), perm.end());
  do {
    CHECK(check_strictly_serializable(s, SerialOrder{perm}));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("parse and serialize") {
  CHECK(parse_history("").ops.empty());

  Schedule s = parse_history("w 1 x\nc 1\n");
  REQUIRE(s.ops.size() == 2);
  CHECK(s.ops[0] == write_op(1, "x"));
  CHECK(s.ops[1] == commit_op(1));

  CHECK(parse_history("# only a comment\n").ops.empty());
}

TEST_CASE("parse errors carry a line number") {
  CHECK_THROWS_AS(parse_history("r 1 x\n"), HistoryError);        // arity
  CHECK_THROWS_AS(parse_history("q 1\n"), HistoryError);          // unknown op
  CHECK_THROWS_AS(parse_history("r 1 x 2\n"), HistoryError);      // no version
  CHECK_THROWS_AS(parse_history("w 1 x\nc 1\nw 1 y\n"), HistoryError);
  CHECK_THROWS_AS(parse_history("w 1 x\nw 1 x\n"), HistoryError);  // double write
  try {
    parse_history("w 1 x\nr 2 x 3\n");
    CHECK(false);
  } catch (const HistoryError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("round trip is the identity on well-formed histories") {
  ts::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    ts::ScheduleOpts opts;
    opts.txns = 1 + i % 6;
    Schedule s = ts::random_schedule(rng, opts);
    Schedule back = parse_history(serialize_history(s));
    CHECK(back == s);
    CHECK(serialize_history(back) == serialize_history(s));
  }
}

TEST_CASE("version order files round trip") {
  VersionOrder vo;
  vo.items["x"] = {0, 2, 1};
  vo.items["y"] = {0, 3};
  VersionOrder back = parse_version_order(serialize_version_order(vo));
  CHECK(back == vo);
  CHECK(back.precedes("x", 0, 1));
  CHECK(!back.precedes("x", 1, 2));
  CHECK_THROWS_AS(back.rank("x", 9), HistoryError);
  CHECK_THROWS_AS(parse_version_order("vo x 1 1\n"), HistoryError);
}

TEST_CASE("serial order files round trip") {
  SerialOrder m{{3, 1, 2}};
  CHECK(parse_serial_order(serialize_serial_order(m)) == m);
  CHECK(m.covers({1, 2, 3}));
  CHECK(!m.covers({1, 4}));
}
