// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// The trace checker judged against hand-built traces with known defects.
// Each fixture is a small doctored run; the test asserts that exactly the
// intended property trips (other properties may legitimately trip too --
// a divergent decision usually breaks more than one rule).

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "cornus/check.hpp"

using namespace cornus;

namespace
{

CheckParams
params(ProtocolKind kind)
{
    CheckParams cp;
    cp.protocol = kind;
    cp.timeout_us = 12300; // 5 * (2 * 250 + 1960)
    cp.net_one_way_us = 250;
    cp.storage_write_us = 1960;
    return cp;
}

const PropertyResult&
resultOf(const TxnReport& rep, const std::string& property)
{
    for (const auto& r : rep.results)
    {
        if (r.property == property)
        {
            return r;
        }
    }
    FAIL("no result for property " + property);
    static PropertyResult dummy;
    return dummy;
}

const PropertyResult&
globalOf(const CheckReport& rep, const std::string& property)
{
    for (const auto& r : rep.global)
    {
        if (r.property == property)
        {
            return r;
        }
    }
    FAIL("no global result for property " + property);
    static PropertyResult dummy;
    return dummy;
}

// A clean one-phase commit: three yes votes, coordinator decides off the
// votes alone, participants follow.
const std::string kCornusCommit =
    "0 SEND node=0 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t0|c0:1|p0,1,2\n"
    "0 SEND node=0 peer=1 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
    "0 SEND node=0 peer=2 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
    "0 DELIVER node=0 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t0|c0:1|p0,1,2\n"
    "250 DELIVER node=1 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
    "250 DELIVER node=2 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
    "1960 SLOT_WRITE node=0 txn=c0:1 slot=0 field=vote value=VOTE_YES "
    "issued=0\n"
    "1960 SEND node=0 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f0|t0|c0:1|yes\n"
    "1960 DELIVER node=0 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f0|t0|c0:1|yes\n"
    "2210 SLOT_WRITE node=1 txn=c0:1 slot=1 field=vote value=VOTE_YES "
    "issued=250\n"
    "2210 SLOT_WRITE node=2 txn=c0:1 slot=2 field=vote value=VOTE_YES "
    "issued=250\n"
    "2210 SEND node=1 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f1|t0|c0:1|yes\n"
    "2210 SEND node=2 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f2|t0|c0:1|yes\n"
    "2460 DELIVER node=0 peer=1 txn=c0:1 msg=v1|VOTE_RESP|f1|t0|c0:1|yes\n"
    "2460 DELIVER node=0 peer=2 txn=c0:1 msg=v1|VOTE_RESP|f2|t0|c0:1|yes\n"
    "2460 DECIDE node=0 txn=c0:1 decision=COMMIT\n"
    "2460 REPLY node=0 txn=c0:1 decision=COMMIT\n"
    "2710 DECIDE node=1 txn=c0:1 decision=COMMIT\n"
    "2710 DECIDE node=2 txn=c0:1 decision=COMMIT\n";

// The two-phase equivalent: same vote round plus the coordinator's
// durable decision record before anyone is told.
const std::string kTwoPcCommit =
    "0 SEND node=0 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t0|c0:1|p0,1,2\n"
    "0 SEND node=0 peer=1 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
    "0 SEND node=0 peer=2 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
    "0 DELIVER node=0 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t0|c0:1|p0,1,2\n"
    "250 DELIVER node=1 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
    "250 DELIVER node=2 peer=0 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
    "1960 SLOT_WRITE node=0 txn=c0:1 slot=0 field=vote value=VOTE_YES "
    "issued=0\n"
    "1960 SEND node=0 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f0|t0|c0:1|yes\n"
    "1960 DELIVER node=0 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f0|t0|c0:1|yes\n"
    "2210 SLOT_WRITE node=1 txn=c0:1 slot=1 field=vote value=VOTE_YES "
    "issued=250\n"
    "2210 SLOT_WRITE node=2 txn=c0:1 slot=2 field=vote value=VOTE_YES "
    "issued=250\n"
    "2210 SEND node=1 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f1|t0|c0:1|yes\n"
    "2210 SEND node=2 peer=0 txn=c0:1 msg=v1|VOTE_RESP|f2|t0|c0:1|yes\n"
    "2460 DELIVER node=0 peer=1 txn=c0:1 msg=v1|VOTE_RESP|f1|t0|c0:1|yes\n"
    "2460 DELIVER node=0 peer=2 txn=c0:1 msg=v1|VOTE_RESP|f2|t0|c0:1|yes\n"
    "4420 SLOT_WRITE node=0 txn=c0:1 slot=0 field=decision value=COMMIT "
    "issued=2460\n"
    "4420 DECIDE node=0 txn=c0:1 decision=COMMIT\n"
    "4420 REPLY node=0 txn=c0:1 decision=COMMIT\n"
    "4670 DECIDE node=1 txn=c0:1 decision=COMMIT\n"
    "4670 DECIDE node=2 txn=c0:1 decision=COMMIT\n";

// An idle late event so liveness judgments are about staleness, not about
// the trace simply stopping early.
const std::string kLateNoise =
    "100000 SEND node=0 peer=1 txn=c0:99 msg=v1|ACCESS_REQ|f0|t1|c0:99|a5r\n";

} // namespace

TEST_CASE("clean commits pass every property")
{
    for (auto [text, kind] :
         {std::pair{kCornusCommit, ProtocolKind::Cornus},
          std::pair{kTwoPcCommit, ProtocolKind::TwoPC}})
    {
        CheckReport rep = check_serialized(text, params(kind));
        REQUIRE(rep.txns.size() == 1);
        CHECK_FALSE(rep.anyFailure());
        CHECK_FALSE(rep.anyBlocked());
        CHECK(rep.txns[0].decision == GlobalDecision::Commit);
        for (const auto& r : rep.txns[0].results)
        {
            INFO(r.property << ": " << r.detail);
            CHECK(r.verdict == Verdict::Pass);
        }
    }
}

TEST_CASE("divergent outcomes are an agreement violation")
{
    std::string text = kCornusCommit;
    auto pos = text.rfind("2710 DECIDE node=2 txn=c0:1 decision=COMMIT");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string::npos,
                 "2710 DECIDE node=2 txn=c0:1 decision=ABORT\n");

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    REQUIRE(rep.txns.size() == 1);
    const PropertyResult& ac1 = resultOf(rep.txns[0], "AC1");
    CHECK(ac1.verdict == Verdict::Fail);
    CHECK_FALSE(ac1.witness.empty());
    CHECK(rep.anyFailure());
}

TEST_CASE("a node reversing its decision is flagged")
{
    std::string text =
        kCornusCommit + "2800 DECIDE node=1 txn=c0:1 decision=ABORT\n";
    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    REQUIRE(rep.txns.size() == 1);
    const PropertyResult& ac2 = resultOf(rep.txns[0], "AC2");
    CHECK(ac2.verdict == Verdict::Fail);
    CHECK(ac2.witness.size() == 2);
}

TEST_CASE("commit without a full set of yes votes is flagged")
{
    std::string text = kCornusCommit;
    auto pos = text.find("2210 SLOT_WRITE node=2");
    REQUIRE(pos != std::string::npos);
    auto end = text.find('\n', pos);
    text.erase(pos, end - pos + 1);

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    REQUIRE(rep.txns.size() == 1);
    const PropertyResult& ac3 = resultOf(rep.txns[0], "AC3");
    CHECK(ac3.verdict == Verdict::Fail);
    CHECK(ac3.detail.find("participant 2") != std::string::npos);
}

TEST_CASE("aborting a unanimous-yes crash-free run is flagged")
{
    std::string text = kCornusCommit;
    for (std::string needle : {"DECIDE node=0 txn=c0:1 decision=COMMIT",
                               "REPLY node=0 txn=c0:1 decision=COMMIT",
                               "DECIDE node=1 txn=c0:1 decision=COMMIT",
                               "DECIDE node=2 txn=c0:1 decision=COMMIT"})
    {
        auto p = text.find(needle);
        REQUIRE(p != std::string::npos);
        text.replace(p + needle.size() - 6, 6, "ABORT");
    }

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    REQUIRE(rep.txns.size() == 1);
    const PropertyResult& ac4 = resultOf(rep.txns[0], "AC4");
    CHECK(ac4.verdict == Verdict::Fail);
}

TEST_CASE("a live participant that never resolves is a liveness failure")
{
    std::string text = kCornusCommit;
    auto pos = text.find("2710 DECIDE node=2 txn=c0:1 decision=COMMIT\n");
    REQUIRE(pos != std::string::npos);
    text.erase(pos, std::string("2710 DECIDE node=2 txn=c0:1 "
                                "decision=COMMIT\n")
                        .size());
    text += kLateNoise;

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    REQUIRE(rep.txns.size() == 2); // the noise txn is checked leniently
    const PropertyResult& ac5 = resultOf(rep.txns[0], "AC5");
    CHECK(ac5.verdict == Verdict::Fail);
    CHECK(ac5.cause == BlockCause::None);
    CHECK(ac5.detail.find("2") != std::string::npos);
}

TEST_CASE("two-phase participants stuck behind a dead coordinator are "
          "blocked, not broken")
{
    // Votes land, the coordinator crashes before the decision record,
    // nobody ever resolves.
    std::string text =
        "0 SEND node=0 peer=1 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
        "0 SEND node=0 peer=2 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
        "250 DELIVER node=1 peer=0 txn=c0:1 "
        "msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
        "250 DELIVER node=2 peer=0 txn=c0:1 "
        "msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
        "2210 SLOT_WRITE node=1 txn=c0:1 slot=1 field=vote value=VOTE_YES "
        "issued=250\n"
        "2210 SLOT_WRITE node=2 txn=c0:1 slot=2 field=vote value=VOTE_YES "
        "issued=250\n"
        "2600 CRASH node=0\n" +
        kLateNoise;

    CheckReport rep = check_serialized(text, params(ProtocolKind::TwoPC));
    CHECK_FALSE(rep.anyFailure());
    REQUIRE(rep.anyBlocked());
    const PropertyResult& ac5 = resultOf(rep.txns[0], "AC5");
    CHECK(ac5.verdict == Verdict::Blocked);
    CHECK(ac5.cause == BlockCause::CoordinatorDown);
}

TEST_CASE("an unreachable log blocks everyone, and the checker says so")
{
    std::string text =
        "0 SEND node=0 peer=1 txn=c0:1 msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
        "0 SEND node=0 peer=2 txn=c0:1 msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n"
        "100 CRASH node=4294967295\n"
        "250 DELIVER node=1 peer=0 txn=c0:1 "
        "msg=v1|VOTE_REQ|f0|t1|c0:1|p0,1,2\n"
        "250 DELIVER node=2 peer=0 txn=c0:1 "
        "msg=v1|VOTE_REQ|f0|t2|c0:1|p0,1,2\n" +
        kLateNoise;

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    CHECK_FALSE(rep.anyFailure());
    REQUIRE(rep.anyBlocked());
    const PropertyResult& ac5 = resultOf(rep.txns[0], "AC5");
    CHECK(ac5.verdict == Verdict::Blocked);
    CHECK(ac5.cause == BlockCause::StorageDown);
}

TEST_CASE("double writes to one slot violate write-once")
{
    std::string text = kCornusCommit +
                       "2900 SLOT_WRITE node=2 txn=c0:1 slot=1 field=vote "
                       "value=ABORT issued=400\n";
    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    const PropertyResult& wo = globalOf(rep, "WRITE_ONCE");
    CHECK(wo.verdict == Verdict::Fail);
    CHECK(wo.witness.size() == 2);
    CHECK(rep.anyFailure());
}

TEST_CASE("writes issued after a crash cannot land")
{
    std::string text = kCornusCommit;
    auto pos = text.find("250 DELIVER node=1");
    REQUIRE(pos != std::string::npos);
    text.insert(pos, "100 CRASH node=1\n");

    // Node 1's vote write carries issued=250, after its crash at 100,
    // and node 1 never recovered: a dead node cannot issue writes.
    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    const PropertyResult& cw = globalOf(rep, "CRASH_WRITES");
    CHECK(cw.verdict == Verdict::Fail);
    CHECK(cw.detail.find("node 1") != std::string::npos);
}

TEST_CASE("in-flight writes landing after the crash are legitimate")
{
    std::string text = kCornusCommit;
    // Crash node 1 after it issued its vote (issued=250) but before the
    // write lands at 2210.
    auto pos = text.find("2210 SLOT_WRITE node=1");
    REQUIRE(pos != std::string::npos);
    text.insert(pos, "300 CRASH node=1\n");

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    const PropertyResult& cw = globalOf(rep, "CRASH_WRITES");
    CHECK(cw.verdict == Verdict::Pass);
}

TEST_CASE("answering the caller against the decided outcome is flagged")
{
    std::string text = kCornusCommit;
    auto pos = text.find("2460 REPLY node=0 txn=c0:1 decision=COMMIT");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("2460 REPLY node=0 txn=c0:1 "
                                  "decision=COMMIT")
                          .size(),
                 "2460 REPLY node=0 txn=c0:1 decision=ABORT");

    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    const PropertyResult& reply = resultOf(rep.txns[0], "REPLY");
    CHECK(reply.verdict == Verdict::Fail);
    CHECK(reply.witness.size() == 2);
}

TEST_CASE("transactions that ran no vote round only owe internal "
          "consistency")
{
    SECTION("agreeing outcomes pass")
    {
        std::string text =
            "10 DECIDE node=0 txn=c3:7 decision=ABORT\n"
            "20 DECIDE node=1 txn=c3:7 decision=ABORT\n"
            "20 REPLY node=0 txn=c3:7 decision=ABORT\n";
        CheckReport rep =
            check_serialized(text, params(ProtocolKind::Cornus));
        CHECK_FALSE(rep.anyFailure());
    }

    SECTION("conflicting outcomes fail")
    {
        std::string text =
            "10 DECIDE node=0 txn=c3:7 decision=ABORT\n"
            "20 DECIDE node=1 txn=c3:7 decision=COMMIT\n";
        CheckReport rep =
            check_serialized(text, params(ProtocolKind::Cornus));
        CHECK(rep.anyFailure());
    }

    SECTION("the announcement must match a durable local decision record")
    {
        // A single-partition commit whose record says COMMIT but whose
        // announcement says ABORT.
        std::string text =
            "1960 SLOT_WRITE node=3 txn=c3:7 slot=3 field=decision "
            "value=COMMIT issued=0\n"
            "1960 DECIDE node=3 txn=c3:7 decision=ABORT\n";
        CheckReport rep =
            check_serialized(text, params(ProtocolKind::Cornus));
        CHECK(rep.anyFailure());
    }
}

TEST_CASE("malformed trace text is rejected")
{
    CHECK_THROWS_AS(check_serialized("once upon a time\n",
                                     params(ProtocolKind::Cornus)),
                    TraceParseError);
    CHECK_THROWS_AS(
        check_serialized("10 DECIDE node=0 txn=c0:1 decision=PERHAPS\n",
                         params(ProtocolKind::Cornus)),
        TraceParseError);
}

TEST_CASE("the serialized report names every failing property")
{
    std::string text = kCornusCommit;
    auto pos = text.rfind("2710 DECIDE node=2 txn=c0:1 decision=COMMIT");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string::npos,
                 "2710 DECIDE node=2 txn=c0:1 decision=ABORT\n");
    CheckReport rep = check_serialized(text, params(ProtocolKind::Cornus));
    std::string s = summarize(rep);
    CHECK(s.find("AC1") != std::string::npos);
    CHECK(s.find("fail=1") != std::string::npos);
}
