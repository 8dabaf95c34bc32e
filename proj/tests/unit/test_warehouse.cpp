#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "temp_dir.hpp"
#include "warden/error.hpp"
#include "warden/warehouse.hpp"

using namespace warden;
using testing_support::fig1_rows;
using testing_support::source_path;
using testing_support::TempDir;

TEST(Warehouse, FirstUpsertIsInsertAtVersionOne) {
  Warehouse wh;
  auto entry = wh.upsert_record({15624510, Gender::Male, 19, 19000, 0});
  EXPECT_EQ(entry.version, 1u);
  EXPECT_EQ(entry.kind, ChangeKind::Insert);
}

TEST(Warehouse, SecondWriteToSameKeyIsUpdate) {
  Warehouse wh;
  wh.upsert_record({15624510, Gender::Male, 19, 19000, 0});
  auto entry = wh.upsert_record({15624510, Gender::Male, 19, 19000, 1});
  EXPECT_EQ(entry.version, 2u);
  EXPECT_EQ(entry.kind, ChangeKind::Update);
  EXPECT_EQ(wh.records().front().purchased, 1);
}

TEST(Warehouse, RejectedUpsertConsumesNoVersion) {
  Warehouse wh;
  for (const auto& r : fig1_rows()) {
    if (wh.latest_version() == 3) break;
    wh.upsert_record(r);
  }
  EXPECT_THROW(wh.upsert_record({1, Gender::Male, -3, 1000, 0}), ValidationError);
  EXPECT_EQ(wh.latest_version(), 3u);
}

TEST(Warehouse, EmptyWarehouseHasVersionZero) {
  Warehouse wh;
  EXPECT_EQ(wh.latest_version(), 0u);
  EXPECT_TRUE(wh.changes_since(0, 10).empty());
}

TEST(Warehouse, ChangesSinceReturnsAscendingPage) {
  Warehouse wh;
  auto rows = fig1_rows();
  for (int i = 0; i < 3; ++i) wh.upsert_record(rows[static_cast<std::size_t>(i)]);

  auto all = wh.changes_since(0, 10);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].version, 1u);
  EXPECT_EQ(all[1].version, 2u);
  EXPECT_EQ(all[2].version, 3u);

  auto one = wh.changes_since(1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].version, 2u);
  EXPECT_EQ(one[0].record, rows[1]);

  EXPECT_TRUE(wh.changes_since(wh.latest_version(), 10).empty());
}

TEST(Warehouse, RejectsEachInvariantViolation) {
  Warehouse wh;
  EXPECT_THROW(wh.upsert_record({0, Gender::Male, 30, 1000, 0}), ValidationError);
  EXPECT_THROW(wh.upsert_record({1, Gender::Male, 0, 1000, 0}), ValidationError);
  EXPECT_THROW(wh.upsert_record({1, Gender::Male, 150, 1000, 0}), ValidationError);
  EXPECT_THROW(wh.upsert_record({1, Gender::Male, 30, -1, 0}), ValidationError);
  EXPECT_THROW(wh.upsert_record({1, Gender::Male, 30, 1000, 2}), ValidationError);
  EXPECT_EQ(wh.latest_version(), 0u);
}

TEST(Warehouse, SeedsBundledFixture) {
  Warehouse wh;
  EXPECT_EQ(wh.seed_from_fixture(source_path("data/social_network_ads.csv")), 400u);
  auto log = wh.changes_since(0, 1000);
  ASSERT_EQ(log.size(), 400u);
  for (const auto& e : log) EXPECT_EQ(e.kind, ChangeKind::Insert);
}

TEST(Warehouse, SeedHeaderOnlyFixtureInsertsNothing) {
  TempDir dir;
  std::ofstream(dir / "empty.csv") << "User ID,Gender,Age,EstimatedSalary,Purchased\n";
  Warehouse wh;
  EXPECT_EQ(wh.seed_from_fixture(dir / "empty.csv"), 0u);
  EXPECT_EQ(wh.latest_version(), 0u);
}

TEST(Warehouse, SeedRejectsBadGenderNamingTheRowAndWritesNothing) {
  TempDir dir;
  std::ofstream(dir / "bad.csv") << "User ID,Gender,Age,EstimatedSalary,Purchased\n"
                                 << "15624510,Male,19,19000,0\n"
                                 << "15810944,Unknown,35,20000,0\n";
  Warehouse wh;
  try {
    wh.seed_from_fixture(dir / "bad.csv");
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("Unknown"), std::string::npos) << e.what();
  }
  EXPECT_EQ(wh.latest_version(), 0u);
}

TEST(Warehouse, SeedMissingFixtureThrows) {
  Warehouse wh;
  EXPECT_THROW(wh.seed_from_fixture("/nonexistent/fixture.csv"), IoError);
}

TEST(Warehouse, PersistsAcrossReopen) {
  TempDir dir;
  {
    Warehouse wh(dir / "wh.log");
    for (const auto& r : fig1_rows()) wh.upsert_record(r);
    wh.upsert_record({15624510, Gender::Male, 19, 19000, 1});
  }
  Warehouse reopened(dir / "wh.log");
  EXPECT_EQ(reopened.latest_version(), 6u);
  auto log = reopened.changes_since(0, 100);
  EXPECT_EQ(log.back().kind, ChangeKind::Update);
  EXPECT_EQ(reopened.upsert_record({1, Gender::Female, 40, 5000, 1}).version, 7u);
}

TEST(Warehouse, InstancesOnOneLogShareHistory) {
  TempDir dir;
  Warehouse a(dir / "wh.log");
  Warehouse b(dir / "wh.log");
  a.upsert_record(fig1_rows()[0]);
  auto e = b.upsert_record(fig1_rows()[1]);
  EXPECT_EQ(e.version, 2u);
  EXPECT_EQ(a.latest_version(), 2u);
  EXPECT_EQ(a.changes_since(1, 10).front().record, fig1_rows()[1]);
}

TEST(Warehouse, TornTailIsIgnoredAndOverwritten) {
  TempDir dir;
  {
    Warehouse wh(dir / "wh.log");
    wh.upsert_record(fig1_rows()[0]);
  }
  std::ofstream(dir / "wh.log", std::ios::app) << R"({"version":2,"kind":"ins)";
  Warehouse wh(dir / "wh.log");
  EXPECT_EQ(wh.latest_version(), 1u);
  EXPECT_EQ(wh.upsert_record(fig1_rows()[1]).version, 2u);
  Warehouse again(dir / "wh.log");
  EXPECT_EQ(again.latest_version(), 2u);
}

// Any sequence of upserts: paging from any cursor visits every later entry
// once, replay reproduces the record set, and latest_version counts successes.
TEST(WarehouseProperty, PagingReplayAndVersionCount) {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 50; ++trial) {
    Warehouse wh;
    std::size_t successes = 0;
    const int ops = 1 + static_cast<int>(gen() % 60);
    for (int i = 0; i < ops; ++i) {
      CustomerRecord r{1 + gen() % 15, gen() % 2 ? Gender::Male : Gender::Female,
                       static_cast<int>(gen() % 160) - 5, static_cast<std::int64_t>(gen() % 150000),
                       static_cast<int>(gen() % 2)};
      try {
        wh.upsert_record(r);
        ++successes;
      } catch (const ValidationError&) {
      }
    }
    ASSERT_EQ(wh.latest_version(), successes);

    const Version cursor = gen() % (successes + 1);
    const std::size_t page = 1 + gen() % 7;
    std::vector<ChangeEntry> collected;
    Version c = cursor;
    while (true) {
      auto batch = wh.changes_since(c, page);
      if (batch.empty()) break;
      ASSERT_LE(batch.size(), page);
      collected.insert(collected.end(), batch.begin(), batch.end());
      c = batch.back().version;
    }
    ASSERT_EQ(collected.size(), successes - cursor);
    for (std::size_t i = 0; i < collected.size(); ++i) EXPECT_EQ(collected[i].version, cursor + 1 + i);

    auto replayed = replay(wh.changes_since(0, successes + 1));
    auto current = wh.records();
    ASSERT_EQ(replayed.size(), current.size());
    for (const auto& r : current) EXPECT_EQ(replayed.at(r.user_id), r);
  }
}

TEST(WarehouseConcurrency, ReadersSeeGapFreePrefixDuringWrites) {
  Warehouse wh;
  std::atomic<bool> done{false};
  std::thread writer([&] {
    for (UserId id = 1; id <= 300; ++id) wh.upsert_record({id, Gender::Male, 30, 1000, 0});
    done = true;
  });
  while (!done) {
    auto log = wh.changes_since(0, 1000);
    for (std::size_t i = 0; i < log.size(); ++i) ASSERT_EQ(log[i].version, i + 1);
  }
  writer.join();
  EXPECT_EQ(wh.latest_version(), 300u);
}
