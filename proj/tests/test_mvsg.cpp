#include <doctest.h>

#include "nwrdb/mvsg.hpp"
#include "support.hpp"

using namespace nwrdb;
namespace ts = nwrdb::testsupport;

namespace {

Schedule spec_schedule() {
  // w0(x0) c0 r1(x0) w1(y1) c1 w2(x2) c2
  Schedule s;
  s.ops = {write_op(0, "x"), write_op(0, "y"), commit_op(0),
           read_op(1, "x", 0), write_op(1, "y"), commit_op(1),
           write_op(2, "x"),  commit_op(2)};
  return s;
}

}  // namespace

TEST_CASE("writes alone produce no edges") {
  Schedule s;
  s.ops = {write_op(1, "x"), commit_op(1), write_op(2, "x"), commit_op(2)};
  VersionOrder vo;
  vo.items["x"] = {1, 2};
  Mvsg g = build_mvsg(s, vo);
  CHECK(g.nodes == std::set<TxnId>{1, 2});
  CHECK(g.edges.empty());
  CHECK(is_acyclic(g));
}

TEST_CASE("edge rules under both orders of the overwriting version") {
  Schedule s = spec_schedule();

  VersionOrder vo;
  vo.items["x"] = {0, 2};
  vo.items["y"] = {0, 1};
  Mvsg g = build_mvsg(s, vo);
  CHECK(g.edges == std::set<Edge>{{0, 1, EdgeKind::WR}, {1, 2, EdgeKind::RW}});

  VersionOrder vo2;
  vo2.items["x"] = {2, 0};
  vo2.items["y"] = {0, 1};
  Mvsg g2 = build_mvsg(s, vo2);
  CHECK(g2.edges == std::set<Edge>{{0, 1, EdgeKind::WR}, {2, 0, EdgeKind::WW}});
}

TEST_CASE("missing committed version is an error") {
  Schedule s = spec_schedule();
  VersionOrder vo;
  vo.items["x"] = {0};  // missing txn 2's version
  vo.items["y"] = {0, 1};
  CHECK_THROWS_AS(build_mvsg(s, vo), HistoryError);
}

TEST_CASE("aborted transactions do not contribute edges") {
  ts::Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    ts::ScheduleOpts opts;
    opts.txns = 4;
    opts.abort_prob = 0.0;
    Schedule s = ts::random_schedule(rng, opts);
    VersionOrder vo = ts::commit_order_vo(s);
    Mvsg g = build_mvsg(s, vo);

    Schedule extended = s;
    extended.ops.insert(extended.ops.begin() + 4, write_op(77, "x"));
    extended.ops.push_back(abort_op(77));
    Mvsg g2 = build_mvsg(extended, vo);
    CHECK(g.edges == g2.edges);
    CHECK(g.nodes == g2.nodes);
  }
}

TEST_CASE("build_mvsg matches the quadratic brute-force builder") {
  ts::Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    ts::ScheduleOpts opts;
    opts.txns = 1 + i % 6;
    Schedule s = ts::random_schedule(rng, opts);
    MvsrResult r = is_mvsr(s);
    if (!r.serializable) continue;
    Mvsg g = build_mvsg(s, *r.witness);
    CHECK(g.edges == ts::brute_force_edges(s, *r.witness));
  }
}

TEST_CASE("acyclicity") {
  Mvsg empty;
  CHECK(is_acyclic(empty));

  Mvsg two;
  two.nodes = {1, 2};
  two.edges = {{1, 2, EdgeKind::RW}, {2, 1, EdgeKind::RW}};
  CHECK(!is_acyclic(two));
}

TEST_CASE("classic cross read-write history is cyclic for the natural order") {
  // r1(x0) r2(y0) w1(y1) w2(x2) c1 c2
  Schedule s;
  s.ops = {write_op(0, "x"), write_op(0, "y"), commit_op(0),
           read_op(1, "x", 0), read_op(2, "y", 0), write_op(1, "y"),
           write_op(2, "x"), commit_op(1), commit_op(2)};
  VersionOrder vo;
  vo.items["x"] = {0, 2};
  vo.items["y"] = {0, 1};
  CHECK(!is_acyclic(build_mvsg(s, vo)));
  MvsrResult r = is_mvsr(s);
  CHECK(!r.serializable);  // all enumerated orders are cyclic
  CHECK(!r.witness);
}

TEST_CASE("reachable sets match an independent DFS") {
  Mvsg g;
  g.nodes = {1, 2, 3, 4};
  g.edges = {{1, 2, EdgeKind::WR}, {2, 3, EdgeKind::RW}};
  CHECK(reachable_set(g, 4).empty());
  CHECK(reachable_set(g, 1) == std::set<TxnId>{2, 3});

  ts::Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    Schedule s = ts::random_schedule(rng, {});
    VersionOrder vo = ts::commit_order_vo(s);
    Mvsg h = build_mvsg(s, vo);
    for (TxnId t : h.nodes) {
      // Recursive DFS oracle.
      std::set<TxnId> seen;
      std::function<void(TxnId)> dfs = [&](TxnId u) {
        for (const Edge& e : h.edges) {
          if (e.from != u || seen.count(e.to)) continue;
          seen.insert(e.to);
          dfs(e.to);
        }
      };
      dfs(t);
      CHECK(reachable_set(h, t) == seen);
    }
  }
}

TEST_CASE("self reachability only on cycles") {
  Mvsg g;
  g.nodes = {1, 2};
  g.edges = {{1, 2, EdgeKind::WW}, {2, 1, EdgeKind::WR}};
  CHECK(reachable_set(g, 1).count(1) == 1);
}

TEST_CASE("version order enumeration counts") {
  Schedule one;
  one.ops = {write_op(1, "x"), commit_op(1)};
  CHECK(count_version_orders(one) == 1);

  Schedule three;
  three.ops = {write_op(1, "x"), write_op(2, "x"), write_op(3, "x"),
               commit_op(1), commit_op(2), commit_op(3)};
  CHECK(count_version_orders(three) == 6);

  // two items with 2 and 3 versions -> 12 distinct orders
  Schedule mixed;
  mixed.ops = {write_op(1, "x"), write_op(2, "x"), write_op(1, "y"),
               write_op(2, "y"), write_op(3, "y"), commit_op(1),
               commit_op(2),     commit_op(3)};
  CHECK(count_version_orders(mixed) == 12);
  std::set<std::string> seen;
  enumerate_version_orders(mixed, [&](const VersionOrder& vo) {
    seen.insert(serialize_version_order(vo));
    return true;
  });
  CHECK(seen.size() == 12);
}

TEST_CASE("enumeration guard") {
  Schedule big;
  for (TxnId t = 1; t <= 12; ++t) big.ops.push_back(write_op(t, "x"));
  for (TxnId t = 1; t <= 12; ++t) big.ops.push_back(commit_op(t));
  CHECK_THROWS_AS(count_version_orders(big), EnumerationGuardExceeded);
  CHECK_THROWS_AS(is_mvsr(big), EnumerationGuardExceeded);
}

TEST_CASE("serial schedules are serializable") {
  ts::Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    // Execute transactions back to back; the commit order is a witness.
    Schedule s;
    s.ops = {write_op(0, "x"), write_op(0, "y"), commit_op(0)};
    TxnId last_writer_x = 0, last_writer_y = 0;
    for (TxnId t = 1; t <= 4; ++t) {
      if (ts::pick(rng, 2)) {
        s.ops.push_back(read_op(t, "x", last_writer_x));
      }
      if (ts::pick(rng, 2)) {
        s.ops.push_back(write_op(t, "y"));
        last_writer_y = t;
      } else {
        s.ops.push_back(write_op(t, "x"));
        last_writer_x = t;
      }
      s.ops.push_back(commit_op(t));
    }
    (void)last_writer_y;
    MvsrResult r = is_mvsr(s);
    CHECK(r.serializable);
    REQUIRE(r.witness);
    CHECK(is_acyclic(build_mvsg(s, *r.witness)));
  }
}
