// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "cornus/core.hpp"

using namespace cornus;

TEST_CASE("slot state derivation prefers the decision record")
{
    TxnLogSlot slot;
    CHECK(derive_state(slot) == LogState::None);

    slot.vote = LogRecord{RecordType::VoteYes, 1, 10};
    CHECK(derive_state(slot) == LogState::VoteYes);

    slot.decision = LogRecord{RecordType::Commit, 1, 20};
    CHECK(derive_state(slot) == LogState::Committed);

    TxnLogSlot aborted;
    aborted.vote = LogRecord{RecordType::Abort, 2, 5};
    CHECK(derive_state(aborted) == LogState::Aborted);

    TxnLogSlot decidedOnly;
    decidedOnly.decision = LogRecord{RecordType::Abort, 2, 5};
    CHECK(derive_state(decidedOnly) == LogState::Aborted);
}

TEST_CASE("global decision commits only on unanimous yes votes")
{
    std::map<NodeId, TxnLogSlot> slots;
    std::vector<NodeId> parts{1, 2, 3};

    SECTION("missing votes leave the outcome open")
    {
        slots[1].vote = LogRecord{RecordType::VoteYes, 1, 1};
        CHECK(global_decision(slots, parts) ==
              GlobalDecision::Undetermined);
    }

    SECTION("all yes commits")
    {
        for (NodeId p : parts)
        {
            slots[p].vote = LogRecord{RecordType::VoteYes, p, 1};
        }
        CHECK(global_decision(slots, parts) == GlobalDecision::Commit);
    }

    SECTION("one abort record aborts regardless of the others")
    {
        slots[1].vote = LogRecord{RecordType::VoteYes, 1, 1};
        slots[2].vote = LogRecord{RecordType::Abort, 9, 2};
        CHECK(global_decision(slots, parts) == GlobalDecision::Abort);
    }

    SECTION("decision records dominate votes")
    {
        for (NodeId p : parts)
        {
            slots[p].vote = LogRecord{RecordType::VoteYes, p, 1};
        }
        slots[2].decision = LogRecord{RecordType::Abort, 2, 3};
        CHECK(global_decision(slots, parts) == GlobalDecision::Abort);
    }

    SECTION("no participants can never commit")
    {
        CHECK(global_decision(slots, {}) == GlobalDecision::Undetermined);
    }
}

TEST_CASE("record/state mappings are mutually consistent")
{
    CHECK(record_as_state(RecordType::VoteYes) == LogState::VoteYes);
    CHECK(record_as_state(RecordType::Abort) == LogState::Aborted);
    CHECK(record_as_state(RecordType::Commit) == LogState::Committed);
    CHECK(decision_record(Decision::Commit) == RecordType::Commit);
    CHECK(decision_record(Decision::Abort) == RecordType::Abort);
}

TEST_CASE("transaction ids order by coordinator then sequence")
{
    TxnId a{0, 5};
    TxnId b{0, 6};
    TxnId c{1, 1};
    CHECK(a < b);
    CHECK(b < c);
    CHECK(a == TxnId{0, 5});
    CHECK(to_string(c) == "c1:1");
}

// Once the slots determine an outcome, the writes honest nodes can
// still issue -- votes and force-aborts through the write-once gate,
// and decision records that echo an outcome already determined -- can
// never change it. This is the heart of the one-phase design.
TEST_CASE("determined outcomes are monotone under write-once traffic")
{
    std::mt19937_64 rng(0xC0FFEE);
    std::vector<NodeId> parts{1, 2, 3, 4};

    for (int round = 0; round < 2000; ++round)
    {
        std::map<NodeId, TxnLogSlot> slots;
        std::optional<GlobalDecision> determined;
        for (int step = 0; step < 12; ++step)
        {
            NodeId owner = parts[rng() % parts.size()];
            TxnLogSlot& slot = slots[owner];
            switch (rng() % 2)
            {
            case 0:
                // A vote (the owner's own, or a terminator's forced
                // abort): the write-once gate only lets it into an
                // empty slot.
                if (!slot.vote && !slot.decision)
                {
                    RecordType v = rng() % 2 ? RecordType::VoteYes
                                             : RecordType::Abort;
                    slot.vote = LogRecord{v, owner, 0};
                }
                break;
            default:
                // A decision record: honest nodes only write one after
                // the log itself determined that outcome.
                if (!slot.decision && determined)
                {
                    RecordType d = *determined == GlobalDecision::Commit
                                       ? RecordType::Commit
                                       : RecordType::Abort;
                    if (d == RecordType::Commit && (!slot.vote ||
                        slot.vote->type != RecordType::VoteYes))
                    {
                        break; // storage forbids commit over an abort
                    }
                    slot.decision = LogRecord{d, owner, 0};
                }
                break;
            }
            GlobalDecision g = global_decision(slots, parts);
            if (determined)
            {
                INFO("round " << round << " step " << step);
                CHECK(g == *determined);
            }
            else if (g != GlobalDecision::Undetermined)
            {
                determined = g;
            }
        }
    }
}
