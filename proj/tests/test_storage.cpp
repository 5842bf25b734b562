// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "cornus/storage.hpp"

using namespace cornus;

namespace
{
const TxnId kTxn{0, 7};
}

TEST_CASE("write-once lets the first writer win and reports the loser")
{
    MemoryLogStore store;
    SlotKey key{3, kTxn};

    StorageResult first = store.logOnce(key, RecordType::VoteYes);
    CHECK(first.status == StorageStatus::Ok);
    CHECK(first.wrote);
    CHECK(first.state == LogState::VoteYes);

    StorageResult second = store.logOnce(key, RecordType::Abort);
    CHECK(second.status == StorageStatus::Ok);
    CHECK_FALSE(second.wrote);
    CHECK(second.state == LogState::VoteYes);

    // And in the opposite order on a fresh slot.
    SlotKey other{4, kTxn};
    StorageResult abort = store.logOnce(other, RecordType::Abort);
    CHECK(abort.wrote);
    CHECK(abort.state == LogState::Aborted);
    StorageResult late = store.logOnce(other, RecordType::VoteYes);
    CHECK_FALSE(late.wrote);
    CHECK(late.state == LogState::Aborted);
}

TEST_CASE("write-once never overwrites, whatever the op sequence")
{
    std::mt19937_64 rng(42);
    for (int round = 0; round < 500; ++round)
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        std::optional<LogState> firstWrite;
        for (int i = 0; i < 8; ++i)
        {
            RecordType rec = rng() % 2 ? RecordType::VoteYes
                                       : RecordType::Abort;
            StorageResult r = store.logOnce(key, rec);
            REQUIRE(r.status == StorageStatus::Ok);
            if (!firstWrite)
            {
                CHECK(r.wrote);
                firstWrite = r.state;
            }
            else
            {
                CHECK_FALSE(r.wrote);
                CHECK(r.state == *firstWrite);
            }
        }
    }
}

TEST_CASE("unconditional log follows the slot transition matrix")
{
    SECTION("yes vote only fills an empty slot")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        CHECK(store.log(key, RecordType::VoteYes).wrote);
        StorageResult dup = store.log(key, RecordType::VoteYes);
        CHECK_FALSE(dup.wrote);
        CHECK(dup.status == StorageStatus::Ok);
    }

    SECTION("abort into an empty slot lands as a vote record")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        StorageResult r = store.log(key, RecordType::Abort);
        CHECK(r.wrote);
        CHECK(r.state == LogState::Aborted);
        CHECK(r.field == SlotField::Vote);
    }

    SECTION("abort over a yes vote becomes the decision")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        store.log(key, RecordType::VoteYes);
        StorageResult r = store.log(key, RecordType::Abort);
        CHECK(r.wrote);
        CHECK(r.state == LogState::Aborted);
        CHECK(r.field == SlotField::Decision);
    }

    SECTION("commit over a yes vote")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        store.log(key, RecordType::VoteYes);
        StorageResult r = store.log(key, RecordType::Commit);
        CHECK(r.wrote);
        CHECK(r.state == LogState::Committed);
    }

    SECTION("commit without a vote is the coordinator decision record")
    {
        MemoryLogStore store;
        SlotKey key{0, kTxn};
        StorageResult r = store.log(key, RecordType::Commit);
        CHECK(r.wrote);
        CHECK(r.state == LogState::Committed);
        CHECK(r.field == SlotField::Decision);
    }

    SECTION("commit over abort evidence is rejected")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        store.log(key, RecordType::Abort);
        StorageResult r = store.log(key, RecordType::Commit);
        CHECK(r.status == StorageStatus::IllegalTransition);
        CHECK_FALSE(r.wrote);
        CHECK(store.readState(key).state == LogState::Aborted);
        CHECK(store.illegalTransitions() == 1);
    }

    SECTION("abort over a commit decision is rejected")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        store.log(key, RecordType::VoteYes);
        store.log(key, RecordType::Commit);
        StorageResult r = store.log(key, RecordType::Abort);
        CHECK(r.status == StorageStatus::IllegalTransition);
        CHECK(store.readState(key).state == LogState::Committed);
    }

    SECTION("duplicate decisions are idempotent")
    {
        MemoryLogStore store;
        SlotKey key{1, kTxn};
        store.log(key, RecordType::VoteYes);
        store.log(key, RecordType::Commit);
        StorageResult r = store.log(key, RecordType::Commit);
        CHECK(r.status == StorageStatus::Ok);
        CHECK_FALSE(r.wrote);
    }
}

TEST_CASE("the overwrite backdoor really does clobber slots")
{
    // Only the fault-injection mode uses this; the test documents what
    // the mutation does so the checker tests can rely on it.
    MemoryLogStore store;
    SlotKey key{1, kTxn};
    store.logOnceAt(key, RecordType::VoteYes, 1, 10);
    store.logAt(key, RecordType::Commit, 1, 20);
    CHECK(store.readState(key).state == LogState::Committed);

    StorageResult r = store.overwriteAt(key, RecordType::Abort, 9, 30);
    CHECK(r.wrote);
    CHECK(store.readState(key).state == LogState::Aborted);
}

TEST_CASE("read returns the bare state without writing")
{
    MemoryLogStore store;
    SlotKey key{2, kTxn};
    CHECK(store.readState(key).state == LogState::None);
    store.log(key, RecordType::VoteYes);
    CHECK(store.readState(key).state == LogState::VoteYes);
    CHECK(store.snapshot().size() == 1);
}

TEST_CASE("latency models expose the leg structure")
{
    SECTION("constant-latency store is all service time")
    {
        StorageLatencyModel m = StorageLatencyModel::fixed(1960, 1840);
        CHECK(m.writeLegs().request == 0);
        CHECK(m.writeLegs().service == 1960);
        CHECK(m.writeLegs().response == 0);
        CHECK(m.writeLegs().observed() == 1960);
        CHECK(m.readLegs().observed() == 1840);
    }

    SECTION("replicated leader write costs two round trips end to end")
    {
        StorageLatencyModel m = StorageLatencyModel::paxosLeader(250, 3);
        CHECK(m.writeLegs().request == 250);
        CHECK(m.writeLegs().service == 500);
        CHECK(m.writeLegs().response == 250);
        CHECK(m.writeLegs().observed() == 1000);
        // Reads at the leader skip the replication round.
        CHECK(m.readLegs().observed() == 500);
    }
}
