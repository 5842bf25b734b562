#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace cornus
{

using NodeId = std::uint32_t;
using VirtualTime = std::uint64_t; // microseconds on the simulated clock

// Pseudo-node id used in traces for the disaggregated log storage service
// itself, so its outages appear as ordinary CRASH/RECOVER events.
inline constexpr NodeId kStorageNode = 0xFFFFFFFFu;

struct TxnId
{
    NodeId coordinator = 0;
    std::uint64_t seq = 0;

    friend bool operator==(const TxnId& a, const TxnId& b) = default;
    friend auto operator<=>(const TxnId& a, const TxnId& b) = default;
};

inline std::string
to_string(const TxnId& t)
{
    return "c" + std::to_string(t.coordinator) + ":" + std::to_string(t.seq);
}

// Record values that can be written into a transaction's log slot. The
// numeric values are the wire encoding used by the Redis backend's state
// key, so they must not change.
enum class RecordType : std::uint8_t
{
    VoteYes = 1,
    Abort = 2,
    Commit = 3,
};

// Observable state of one participant's slot, derived from its records.
// Matches RecordType numerically; 0 means the slot is empty.
enum class LogState : std::uint8_t
{
    None = 0,
    VoteYes = 1,
    Aborted = 2,
    Committed = 3,
};

enum class Decision : std::uint8_t
{
    Commit,
    Abort,
};

enum class GlobalDecision : std::uint8_t
{
    Commit,
    Abort,
    Undetermined,
};

inline char const*
to_string(RecordType r)
{
    switch (r)
    {
    case RecordType::VoteYes:
        return "VOTE_YES";
    case RecordType::Abort:
        return "ABORT";
    case RecordType::Commit:
        return "COMMIT";
    }
    return "?";
}

inline char const*
to_string(LogState s)
{
    switch (s)
    {
    case LogState::None:
        return "NONE";
    case LogState::VoteYes:
        return "VOTE_YES";
    case LogState::Aborted:
        return "ABORTED";
    case LogState::Committed:
        return "COMMITTED";
    }
    return "?";
}

inline char const*
to_string(Decision d)
{
    return d == Decision::Commit ? "COMMIT" : "ABORT";
}

inline char const*
to_string(GlobalDecision g)
{
    switch (g)
    {
    case GlobalDecision::Commit:
        return "COMMIT";
    case GlobalDecision::Abort:
        return "ABORT";
    case GlobalDecision::Undetermined:
        return "UNDETERMINED";
    }
    return "?";
}

inline LogState
record_as_state(RecordType r)
{
    switch (r)
    {
    case RecordType::VoteYes:
        return LogState::VoteYes;
    case RecordType::Abort:
        return LogState::Aborted;
    case RecordType::Commit:
        return LogState::Committed;
    }
    return LogState::None;
}

inline RecordType
decision_record(Decision d)
{
    return d == Decision::Commit ? RecordType::Commit : RecordType::Abort;
}

struct LogRecord
{
    RecordType type = RecordType::Abort;
    NodeId writer = 0;
    VirtualTime time = 0;

    friend bool operator==(const LogRecord& a, const LogRecord& b) = default;
};

enum class SlotField : std::uint8_t
{
    Vote,
    Decision,
};

// One write-once transaction-state slot, keyed elsewhere by (log owner,
// txn). `vote` holds the owner's VOTE_YES, or an ABORT placed either by the
// owner (no-vote / unilateral abort) or by another participant running the
// termination protocol. `decision` holds the final COMMIT/ABORT record. A
// slot never holds more than one of each, and they are never overwritten
// through the legal write operations.
struct TxnLogSlot
{
    std::optional<LogRecord> vote;
    std::optional<LogRecord> decision;

    friend bool operator==(const TxnLogSlot& a, const TxnLogSlot& b) = default;
};

// State visible to a reader of the slot: the decision record wins over the
// vote record, which wins over emptiness.
inline LogState
derive_state(const TxnLogSlot& slot)
{
    if (slot.decision)
    {
        return record_as_state(slot.decision->type);
    }
    if (slot.vote)
    {
        return record_as_state(slot.vote->type);
    }
    return LogState::None;
}

enum class AccessMode : std::uint8_t
{
    Read,
    Write,
};

struct Access
{
    std::uint64_t key = 0;
    AccessMode mode = AccessMode::Read;

    friend bool operator==(const Access& a, const Access& b) = default;
};

struct Transaction
{
    TxnId id;
    NodeId coordinator = 0;
    // Sorted, unique, non-empty. The coordinator may or may not appear.
    std::vector<NodeId> participants;
    std::map<NodeId, std::vector<Access>> accesses;
    bool read_only = false;
};

// The transaction's fate as determined purely by the participants' slots:
// COMMIT iff every participant logged VOTE_YES, ABORT iff any slot carries
// an ABORT record (vote or decision), otherwise still open. Abort evidence
// is checked first so that contradictory (illegal) slot sets read as ABORT
// rather than masking the conflict.
inline GlobalDecision
global_decision(const std::map<NodeId, TxnLogSlot>& slots,
                const std::vector<NodeId>& participants)
{
    bool allYes = !participants.empty();
    for (NodeId p : participants)
    {
        auto it = slots.find(p);
        const TxnLogSlot* s = it == slots.end() ? nullptr : &it->second;
        if (s &&
            ((s->vote && s->vote->type == RecordType::Abort) ||
             (s->decision && s->decision->type == RecordType::Abort)))
        {
            return GlobalDecision::Abort;
        }
        if (!s || !s->vote || s->vote->type != RecordType::VoteYes)
        {
            allYes = false;
        }
    }
    return allYes ? GlobalDecision::Commit : GlobalDecision::Undetermined;
}

} // namespace cornus
