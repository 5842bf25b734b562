#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cassert>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "cornus/core.hpp"

namespace cornus
{

enum class StorageStatus : std::uint8_t
{
    Ok = 0,
    Unavailable = 1,      // service down / unreachable
    IllegalTransition = 2 // write would contradict an existing decision
};

inline char const*
to_string(StorageStatus s)
{
    switch (s)
    {
    case StorageStatus::Ok:
        return "OK";
    case StorageStatus::Unavailable:
        return "UNAVAILABLE";
    case StorageStatus::IllegalTransition:
        return "ILLEGAL_TRANSITION";
    }
    return "?";
}

struct SlotKey
{
    NodeId log = 0; // whose log file the slot lives in
    TxnId txn;

    friend bool operator==(const SlotKey& a, const SlotKey& b) = default;
    friend auto operator<=>(const SlotKey& a, const SlotKey& b) = default;
};

struct StorageResult
{
    StorageStatus status = StorageStatus::Ok;
    LogState state = LogState::None; // derived slot state after the op
    bool wrote = false;              // whether this op mutated the slot
    SlotField field = SlotField::Vote; // which field, when wrote is true
};

// Narrow interface shared by the in-memory store and the Redis-backed
// store, so the same scripted scenario can be replayed against both. The
// `data` argument models an opaque redo/log payload written alongside a
// vote; backends may ignore it.
class LogStore
{
  public:
    virtual ~LogStore() = default;

    // Conditional write-once: writes `rec` as the slot's vote only if the
    // slot is completely empty, and returns the slot's (post-op) state
    // either way. rec must be VoteYes or Abort.
    virtual StorageResult logOnce(const SlotKey& key, RecordType rec,
                                  const std::string* data = nullptr) = 0;

    // Plain append. VoteYes/Abort on an empty slot record a vote; a record
    // on a slot that already has a vote records the decision. Duplicate
    // identical writes are idempotent no-ops. A write that would place
    // COMMIT over abort evidence (or ABORT over a COMMIT decision) fails
    // with IllegalTransition and leaves the slot untouched.
    virtual StorageResult log(const SlotKey& key, RecordType rec,
                              const std::string* data = nullptr) = 0;

    virtual StorageResult readState(const SlotKey& key) = 0;
};

// Shared-memory reference implementation. Thread-safe: every public
// operation takes one lock, which is exactly the atomicity the Redis
// backend gets from single-threaded script execution.
class MemoryLogStore : public LogStore
{
  public:
    StorageResult
    logOnce(const SlotKey& key, RecordType rec,
            const std::string* data = nullptr) override
    {
        std::lock_guard<std::mutex> g(mu_);
        return logOnceAt(key, rec, /*writer=*/key.log, /*now=*/tick(), data);
    }

    StorageResult
    log(const SlotKey& key, RecordType rec,
        const std::string* data = nullptr) override
    {
        std::lock_guard<std::mutex> g(mu_);
        return logAt(key, rec, /*writer=*/key.log, /*now=*/tick(), data);
    }

    StorageResult
    readState(const SlotKey& key) override
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = slots_.find(key);
        return {StorageStatus::Ok,
                it == slots_.end() ? LogState::None : derive_state(it->second),
                false};
    }

    // Simulator entry points: identical semantics, but the caller supplies
    // the writer identity and the linearization time recorded in the slot.
    // (The base-class methods stamp a local op counter instead.)

    StorageResult
    logOnceAt(const SlotKey& key, RecordType rec, NodeId writer,
              VirtualTime now, const std::string* data = nullptr)
    {
        assert(rec == RecordType::VoteYes || rec == RecordType::Abort);
        (void)data;
        TxnLogSlot& s = slots_[key];
        if (!s.vote && !s.decision)
        {
            s.vote = LogRecord{rec, writer, now};
            return {StorageStatus::Ok, derive_state(s), true, SlotField::Vote};
        }
        return {StorageStatus::Ok, derive_state(s), false};
    }

    StorageResult
    logAt(const SlotKey& key, RecordType rec, NodeId writer, VirtualTime now,
          const std::string* data = nullptr)
    {
        (void)data;
        TxnLogSlot& s = slots_[key];
        switch (rec)
        {
        case RecordType::VoteYes:
            if (!s.vote && !s.decision)
            {
                s.vote = LogRecord{rec, writer, now};
                return {StorageStatus::Ok, derive_state(s), true,
                        SlotField::Vote};
            }
            // Write-once: a second vote write (duplicate or conflicting)
            // never lands.
            return {StorageStatus::Ok, derive_state(s), false};

        case RecordType::Abort:
            if (s.decision)
            {
                if (s.decision->type == RecordType::Commit)
                {
                    ++illegal_;
                    return {StorageStatus::IllegalTransition, derive_state(s),
                            false};
                }
                return {StorageStatus::Ok, derive_state(s), false};
            }
            if (!s.vote)
            {
                // No-vote / presumed-abort path: the abort doubles as the
                // vote record.
                s.vote = LogRecord{rec, writer, now};
                return {StorageStatus::Ok, derive_state(s), true,
                        SlotField::Vote};
            }
            s.decision = LogRecord{rec, writer, now};
            return {StorageStatus::Ok, derive_state(s), true,
                    SlotField::Decision};

        case RecordType::Commit:
            if (s.decision)
            {
                if (s.decision->type == RecordType::Abort)
                {
                    ++illegal_;
                    return {StorageStatus::IllegalTransition, derive_state(s),
                            false};
                }
                return {StorageStatus::Ok, derive_state(s), false};
            }
            if (s.vote && s.vote->type == RecordType::Abort)
            {
                ++illegal_;
                return {StorageStatus::IllegalTransition, derive_state(s),
                        false};
            }
            // A COMMIT with no vote present is legal here: a coordinator's
            // decision record lands in its own slot, which has no vote.
            s.decision = LogRecord{rec, writer, now};
            return {StorageStatus::Ok, derive_state(s), true,
                    SlotField::Decision};
        }
        return {StorageStatus::Ok, derive_state(s), false};
    }

    // Unconditional state overwrite: what the termination protocol would do
    // if it used a plain SET instead of the conditional write-once. Exists
    // only as a fault-injection target; the verifier must catch runs that
    // use it. Restricted to ABORT, the only value the termination protocol
    // writes.
    StorageResult
    overwriteAt(const SlotKey& key, RecordType rec, NodeId writer,
                VirtualTime now)
    {
        assert(rec == RecordType::Abort);
        TxnLogSlot& s = slots_[key];
        SlotField f = SlotField::Decision;
        if (!s.vote && !s.decision)
        {
            s.vote = LogRecord{rec, writer, now};
            f = SlotField::Vote;
        }
        else
        {
            // Clobbers whatever decision is there, including COMMIT.
            s.decision = LogRecord{rec, writer, now};
        }
        return {StorageStatus::Ok, derive_state(s), true, f};
    }

    StorageResult
    readStateAt(const SlotKey& key) const
    {
        auto it = slots_.find(key);
        return {StorageStatus::Ok,
                it == slots_.end() ? LogState::None : derive_state(it->second),
                false};
    }

    TxnLogSlot
    slot(const SlotKey& key) const
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = slots_.find(key);
        return it == slots_.end() ? TxnLogSlot{} : it->second;
    }

    std::map<SlotKey, TxnLogSlot>
    snapshot() const
    {
        std::lock_guard<std::mutex> g(mu_);
        return slots_;
    }

    std::uint64_t
    illegalTransitions() const
    {
        std::lock_guard<std::mutex> g(mu_);
        return illegal_;
    }

    void
    reset()
    {
        std::lock_guard<std::mutex> g(mu_);
        slots_.clear();
        illegal_ = 0;
        ticks_ = 0;
    }

  private:
    VirtualTime
    tick()
    {
        return ++ticks_;
    }

    mutable std::mutex mu_;
    std::map<SlotKey, TxnLogSlot> slots_;
    std::uint64_t illegal_ = 0;
    VirtualTime ticks_ = 0;
};

// Latency charged to one storage operation, split into the request leg
// (client -> service), the service time (ends at the linearization point),
// and the response leg back to the client. The issuing client observes the
// sum; the write becomes visible to other clients at request + service.
struct OpLegs
{
    VirtualTime request = 0;
    VirtualTime service = 0;
    VirtualTime response = 0;

    VirtualTime
    observed() const
    {
        return request + service + response;
    }
};

// Two cost models for the disaggregated log. FIXED charges a measured
// client-observed constant per op (e.g. what a Redis conditional write
// costs from the client's point of view), all of it service time.
// PAXOS_LEADER models a replicated log: one-way d to reach the leader, a
// 2d quorum round at the leader (after which the write is linearized), and
// one-way d back, i.e. 4d observed per write.
struct StorageLatencyModel
{
    enum class Kind : std::uint8_t
    {
        Fixed,
        PaxosLeader,
    };

    Kind kind = Kind::Fixed;
    VirtualTime write_us = 1960; // FIXED: observed write latency
    VirtualTime read_us = 1840;  // FIXED: observed read latency
    VirtualTime one_way_us = 250; // PAXOS_LEADER: client<->leader<->acceptor
    std::uint32_t acceptors = 3;  // PAXOS_LEADER: informational

    static StorageLatencyModel
    fixed(VirtualTime write, VirtualTime read)
    {
        StorageLatencyModel m;
        m.kind = Kind::Fixed;
        m.write_us = write;
        m.read_us = read;
        return m;
    }

    static StorageLatencyModel
    paxosLeader(VirtualTime one_way, std::uint32_t acceptors)
    {
        StorageLatencyModel m;
        m.kind = Kind::PaxosLeader;
        m.one_way_us = one_way;
        m.acceptors = acceptors;
        return m;
    }

    OpLegs
    writeLegs() const
    {
        if (kind == Kind::Fixed)
        {
            return {0, write_us, 0};
        }
        return {one_way_us, 2 * one_way_us, one_way_us};
    }

    OpLegs
    readLegs() const
    {
        if (kind == Kind::Fixed)
        {
            return {0, read_us, 0};
        }
        // Leader answers reads locally.
        return {one_way_us, 0, one_way_us};
    }
};

} // namespace cornus
