// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// The fault explorer at reduced schedule depth (3 delay choices over the
// first 3 hops), which keeps each exploration around a thousand runs.
// The acceptance harness repeats this at full depth; here we pin the
// structural claims and keep the suite fast.

#include <catch2/catch_amalgamated.hpp>

#include "cornus/explore.hpp"

using namespace cornus;

namespace
{

ExploreConfig
smallConfig(ProtocolKind kind)
{
    ExploreConfig cfg;
    cfg.protocol = kind;
    cfg.schedule_depth = 3;
    return cfg;
}

} // namespace

TEST_CASE("one-phase: no run fails and no run blocks while storage is up")
{
    ExploreStats s = explore(smallConfig(ProtocolKind::Cornus));

    INFO(coverageTable(s));
    CHECK(s.clean());
    CHECK(s.blocked_coordinator == 0);
    CHECK(s.blocked_storage == 0);
    CHECK(s.total_runs > 1000);
    CHECK(s.committed > 0);
    CHECK(s.aborted > 0);

    for (const auto& [label, row] : s.coverage)
    {
        INFO(label);
        CHECK(row.pass == row.runs);
        if (label.rfind("fault_free", 0) != 0)
        {
            // Every crash point must actually trigger under at least one
            // message schedule, or the point is dead weight.
            CHECK(row.fired >= 1);
        }
    }
}

TEST_CASE("two-phase: blocks exactly at decision-side coordinator "
          "crashes, and recovery always resolves them")
{
    ExploreStats s = explore(smallConfig(ProtocolKind::TwoPC));

    INFO(coverageTable(s));
    CHECK(s.failures.empty());
    CHECK_FALSE(s.capped);
    CHECK(s.blocked_coordinator > 0);
    CHECK(s.blocked_storage == 0);

    for (const auto& [label, row] : s.coverage)
    {
        INFO(label);
        if (row.blocked > 0)
        {
            // Only a crashed-and-gone coordinator may block anyone.
            CHECK(label.rfind("coord_", 0) == 0);
            CHECK(label.find("+no_recover") != std::string::npos);
        }
        if (label.find("+recover") != std::string::npos)
        {
            CHECK(row.blocked == 0);
        }
        if (label.rfind("fault_free", 0) != 0)
        {
            CHECK(row.fired >= 1);
        }
    }
}

TEST_CASE("naive termination blocks strictly more often than cooperative")
{
    ExploreConfig coop = smallConfig(ProtocolKind::TwoPC);
    ExploreConfig naive = coop;
    naive.termination = TerminationMode::Naive;

    ExploreStats sc = explore(coop);
    ExploreStats sn = explore(naive);
    CHECK(sn.failures.empty());
    CHECK(sn.blocked_coordinator > sc.blocked_coordinator);
}

TEST_CASE("sabotaged termination writes are caught by the checker")
{
    // The mutation makes termination overwrite slots instead of using
    // the conditional write; the explorer must observe corrupted runs.
    ExploreConfig cfg = smallConfig(ProtocolKind::Cornus);
    cfg.schedule_depth = 2;
    cfg.mutate_overwrite_termination = true;

    ExploreStats s = explore(cfg);
    REQUIRE_FALSE(s.failures.empty());
    bool named = false;
    for (const auto& f : s.failures)
    {
        named = named || f.report.find("WRITE_ONCE") != std::string::npos ||
                f.report.find("LEMMA1") != std::string::npos;
    }
    CHECK(named);
}

TEST_CASE("a storage outage parks transactions instead of corrupting "
          "them")
{
    ExploreConfig cfg = smallConfig(ProtocolKind::Cornus);
    ExploreStats s = Explorer(cfg).runStorageOutage();
    CHECK(s.failures.empty());
    CHECK(s.blocked_storage >= 1);
}

TEST_CASE("the run cap is enforced and reported")
{
    ExploreConfig cfg = smallConfig(ProtocolKind::Cornus);
    cfg.max_runs = 10;
    ExploreStats s = explore(cfg);
    CHECK(s.capped);
    CHECK_FALSE(s.clean());
    CHECK(s.total_runs == 10);
}
