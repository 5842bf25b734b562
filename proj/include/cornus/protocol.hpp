#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdint>
#include <functional>

#include "cornus/core.hpp"
#include "cornus/sim.hpp"

namespace cornus
{

enum class ProtocolKind : std::uint8_t
{
    Cornus,
    TwoPC,
};

inline char const*
to_string(ProtocolKind p)
{
    return p == ProtocolKind::Cornus ? "cornus" : "2pc";
}

// How a 2PC participant resolves an in-doubt transaction: ask only the
// coordinator, or also ask its peers.
enum class TerminationMode : std::uint8_t
{
    Naive,
    Cooperative,
};

inline char const*
to_string(TerminationMode t)
{
    return t == TerminationMode::Naive ? "naive" : "cooperative";
}

struct ProtocolTimeouts
{
    VirtualTime vote_req_wait = 0;  // participant holding locks, no VOTE_REQ
    VirtualTime vote_collect_wait = 0; // coordinator awaiting votes
    VirtualTime decision_wait = 0;  // participant awaiting the decision
    VirtualTime termination_wait = 0; // one termination/query round

    // Generous multiples of the longest legitimate path (a round trip plus
    // a storage write), so timeouts never fire on the fault-free schedule.
    static ProtocolTimeouts
    defaults(VirtualTime one_way_us, VirtualTime storage_write_us)
    {
        ProtocolTimeouts t;
        t.vote_req_wait = 5 * (2 * one_way_us + storage_write_us);
        t.vote_collect_wait = t.vote_req_wait;
        t.decision_wait = t.vote_req_wait;
        t.termination_wait = t.vote_req_wait;
        return t;
    }
};

// Consecutive fruitless termination/query rounds before a node parks and
// waits for an external wake-up (storage recovery, or a late DECISION).
inline constexpr int kMaxTerminationRounds = 3;

struct ProtocolConfig
{
    ProtocolKind kind = ProtocolKind::Cornus;
    TerminationMode termination = TerminationMode::Cooperative;
    ProtocolTimeouts timeouts;
    bool ro_known_in_advance = true;
    // Fault injection: the termination protocol writes its ABORT with an
    // unconditional overwrite instead of the conditional write-once.
    bool mutate_overwrite_termination = false;
};

// Low byte of a timer/storage tag: what the callback means. The high bits
// carry the role cookie assigned by the hosting node.
enum class Purpose : std::uint8_t
{
    VoteReqTimeout = 1,
    VoteCollectTimeout = 2,
    DecisionTimeout = 3,
    TermRound = 4,
    TermOp = 5,
    VoteLogOp = 6,
    DecisionLogOp = 7,
    AsyncLogOp = 8,
    RecoveryRead = 9,
    ExecTimeout = 10,
    ClientNext = 11,
};

inline std::uint64_t
makeTag(std::uint64_t cookie, Purpose p)
{
    return (cookie << 8) | static_cast<std::uint64_t>(p);
}

inline Purpose
tagPurpose(std::uint64_t tag)
{
    return static_cast<Purpose>(tag & 0xFF);
}

inline std::uint64_t
tagCookie(std::uint64_t tag)
{
    return tag >> 8;
}

// Everything a per-transaction role needs from its hosting node. `decide`
// must be idempotent per (node, txn) — the host deduplicates the DECIDE
// trace event and releases locks; `reply` reports the outcome to the local
// client (coordinator roles only).
struct RoleEnv
{
    Sim* sim = nullptr;
    NodeId self = 0;
    const ProtocolConfig* cfg = nullptr;
    std::uint64_t cookie = 0;
    std::function<void(const TxnId&, Decision)> decide;
    std::function<void(const TxnId&, Decision)> reply;
    // Coordinator roles: the instant the outcome became determined, which
    // can precede the reply (a 2PC commit still has to persist the
    // decision record after this point).
    std::function<void(const TxnId&)> decision_reached;
    // Participant drops out without a decision of its own (read-only
    // optimization): locks go, no DECIDE is recorded.
    std::function<void(const TxnId&)> finish_quiet;
};

} // namespace cornus
