#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Trace checker: replays a serialized run and verifies the atomic-commit
// safety and liveness properties against it. The checker only sees the
// trace -- it reconstructs participant sets, votes, decisions, and crash
// windows from the events themselves, so a protocol bug cannot hide by
// simply not reporting its state.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cornus/core.hpp"
#include "cornus/message.hpp"
#include "cornus/protocol.hpp"
#include "cornus/trace.hpp"

namespace cornus
{

enum class Verdict : std::uint8_t
{
    Pass,
    Fail,
    Blocked, // liveness unprovable for an identified external reason
};

inline char const*
to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::Pass:
        return "PASS";
    case Verdict::Fail:
        return "FAIL";
    case Verdict::Blocked:
        return "BLOCKED";
    }
    return "?";
}

// Why a Blocked verdict is considered legitimate for the protocol under
// check rather than a liveness bug.
enum class BlockCause : std::uint8_t
{
    None,
    CoordinatorDown, // 2pc: decision is buried on a crashed coordinator
    StorageDown,     // cornus: the shared log is unreachable
};

inline char const*
to_string(BlockCause c)
{
    switch (c)
    {
    case BlockCause::None:
        return "none";
    case BlockCause::CoordinatorDown:
        return "coordinator_down";
    case BlockCause::StorageDown:
        return "storage_down";
    }
    return "?";
}

struct PropertyResult
{
    std::string property;
    Verdict verdict = Verdict::Pass;
    BlockCause cause = BlockCause::None;
    std::string detail;           // human-readable witness description
    std::vector<size_t> witness;  // indices into the trace
};

struct TxnReport
{
    TxnId txn;
    GlobalDecision decision = GlobalDecision::Undetermined;
    std::vector<PropertyResult> results;

    bool
    failed() const
    {
        return std::any_of(results.begin(), results.end(), [](auto& r) {
            return r.verdict == Verdict::Fail;
        });
    }

    bool
    blocked() const
    {
        return std::any_of(results.begin(), results.end(), [](auto& r) {
            return r.verdict == Verdict::Blocked;
        });
    }
};

struct CheckParams
{
    ProtocolKind protocol = ProtocolKind::Cornus;
    // Liveness bound inputs: a decision must land within a few
    // timeout-plus-round-trip cycles of the last repair event.
    VirtualTime timeout_us = 0;       // largest protocol timeout in force
    VirtualTime net_one_way_us = 250;
    VirtualTime storage_write_us = 0; // observed client latency of a write
};

struct CheckReport
{
    std::vector<TxnReport> txns;
    std::vector<PropertyResult> global; // trace-wide checks
    VirtualTime end_time = 0;

    bool
    anyFailure() const
    {
        if (std::any_of(global.begin(), global.end(), [](auto& r) {
                return r.verdict == Verdict::Fail;
            }))
        {
            return true;
        }
        return std::any_of(txns.begin(), txns.end(),
                           [](auto& t) { return t.failed(); });
    }

    bool
    anyBlocked() const
    {
        return std::any_of(txns.begin(), txns.end(),
                           [](auto& t) { return t.blocked(); });
    }
};

namespace detail
{

struct NodeWindows
{
    // Sorted crash/recover instants; a node is down between a CRASH and
    // the next RECOVER.
    std::vector<std::pair<VirtualTime, bool>> flips; // (time, is_crash)

    bool
    downAt(VirtualTime t) const
    {
        bool down = false;
        for (const auto& [ft, crash] : flips)
        {
            if (ft > t)
            {
                break;
            }
            down = crash;
        }
        return down;
    }

    bool
    downAtEnd() const
    {
        return flips.empty() ? false : flips.back().second;
    }

    std::optional<VirtualTime>
    crashBefore(VirtualTime t) const
    {
        std::optional<VirtualTime> last;
        for (const auto& [ft, crash] : flips)
        {
            if (ft > t)
            {
                break;
            }
            if (crash)
            {
                last = ft;
            }
        }
        return last;
    }
};

struct TxnFacts
{
    TxnId id;
    std::optional<std::vector<NodeId>> participants; // from VOTE_REQ payload
    NodeId coordinator = 0;
    bool saw_vote_req = false;

    // node -> ordered DECIDE values with trace indices
    std::map<NodeId, std::vector<std::pair<Decision, size_t>>> decides;
    std::map<NodeId, std::vector<std::pair<Decision, size_t>>> replies;

    // slot owner -> reconstructed write-once cell
    struct SlotWrites
    {
        std::vector<size_t> vote_writes;
        std::vector<size_t> decision_writes;
        std::optional<RecordType> vote;
        std::optional<RecordType> decision;
    };
    std::map<NodeId, SlotWrites> slots;

    // 2pc read-only dropouts: answered yes without ever logging a vote
    std::set<NodeId> yes_responders;

    VirtualTime first_event = 0;
    VirtualTime last_event = 0;
};

} // namespace detail

class TraceChecker
{
  public:
    TraceChecker(const Trace& trace, const CheckParams& params)
        : trace_(trace), params_(params)
    {
        digest();
    }

    CheckReport
    check()
    {
        CheckReport rep;
        rep.end_time = end_time_;
        checkCrashWrites(rep.global);
        checkWriteOnce(rep.global);
        for (auto& [id, f] : txns_)
        {
            rep.txns.push_back(checkTxn(f));
        }
        return rep;
    }

  private:
    // --- trace digestion --------------------------------------------------

    void
    digest()
    {
        for (size_t i = 0; i < trace_.size(); ++i)
        {
            const TraceEvent& e = trace_[i];
            end_time_ = std::max(end_time_, e.time);
            switch (e.kind)
            {
            case TraceKind::Crash:
            case TraceKind::Recover:
                windows_[e.node].flips.emplace_back(
                    e.time, e.kind == TraceKind::Crash);
                break;
            case TraceKind::Send:
            case TraceKind::Deliver:
            {
                Message m = decode(e.msg);
                detail::TxnFacts& f = facts(m.txn);
                f.last_event = std::max(f.last_event, e.time);
                if (m.type == MsgType::VoteReq && e.kind == TraceKind::Send)
                {
                    // The participant list rides on every vote request;
                    // any one of them names the full set, even if the
                    // coordinator died mid-broadcast.
                    f.saw_vote_req = true;
                    f.coordinator = m.from;
                    if (!f.participants)
                    {
                        f.participants = m.participants;
                    }
                }
                if (m.type == MsgType::VoteResp && m.vote_yes &&
                    e.kind == TraceKind::Send)
                {
                    f.yes_responders.insert(m.from);
                }
                break;
            }
            case TraceKind::SlotWrite:
            {
                detail::TxnFacts& f = facts(e.txn);
                f.last_event = std::max(f.last_event, e.time);
                auto& s = f.slots[e.slot_owner];
                if (e.field == SlotField::Vote)
                {
                    s.vote_writes.push_back(i);
                    if (!s.vote)
                    {
                        s.vote = e.value;
                    }
                }
                else
                {
                    s.decision_writes.push_back(i);
                    if (!s.decision)
                    {
                        s.decision = e.value;
                    }
                }
                break;
            }
            case TraceKind::Decide:
                facts(e.txn).decides[e.node].emplace_back(e.decision, i);
                break;
            case TraceKind::ReplyToCaller:
                facts(e.txn).replies[e.node].emplace_back(e.decision, i);
                break;
            }
        }
    }

    detail::TxnFacts&
    facts(const TxnId& id)
    {
        auto it = txns_.find(id);
        if (it == txns_.end())
        {
            it = txns_.emplace(id, detail::TxnFacts{}).first;
            it->second.id = id;
            it->second.coordinator = id.coordinator;
        }
        return it->second;
    }

    bool
    crashFree() const
    {
        for (const auto& [node, w] : windows_)
        {
            if (node == kStorageNode)
            {
                continue;
            }
            for (const auto& [t, crash] : w.flips)
            {
                if (crash)
                {
                    return false;
                }
            }
        }
        return true;
    }

    bool
    storageDownAtEnd() const
    {
        auto it = windows_.find(kStorageNode);
        return it != windows_.end() && it->second.downAtEnd();
    }

    // --- global (per-trace) checks ----------------------------------------

    void
    checkCrashWrites(std::vector<PropertyResult>& out)
    {
        PropertyResult r;
        r.property = "CRASH_WRITES";
        for (size_t i = 0; i < trace_.size(); ++i)
        {
            const TraceEvent& e = trace_[i];
            if (e.kind != TraceKind::SlotWrite)
            {
                continue;
            }
            auto wit = windows_.find(e.node);
            if (wit == windows_.end())
            {
                continue;
            }
            auto crash = wit->second.crashBefore(e.time);
            if (crash && e.issued_at > *crash && wit->second.downAt(e.time))
            {
                r.verdict = Verdict::Fail;
                r.witness.push_back(i);
                r.detail = "write issued at " + std::to_string(e.issued_at) +
                           " by node " + std::to_string(e.node) +
                           " after its crash at " + std::to_string(*crash);
                break;
            }
        }
        out.push_back(std::move(r));
    }

    void
    checkWriteOnce(std::vector<PropertyResult>& out)
    {
        PropertyResult r;
        r.property = "WRITE_ONCE";
        for (const auto& [id, f] : txns_)
        {
            for (const auto& [owner, s] : f.slots)
            {
                if (s.vote_writes.size() > 1 || s.decision_writes.size() > 1)
                {
                    r.verdict = Verdict::Fail;
                    const auto& w = s.vote_writes.size() > 1
                                        ? s.vote_writes
                                        : s.decision_writes;
                    r.witness.assign(w.begin(), w.end());
                    r.detail = "slot " + std::to_string(owner) + " of " +
                               to_string(id) + " written twice";
                    out.push_back(std::move(r));
                    return;
                }
            }
        }
        out.push_back(std::move(r));
    }

    // --- per-transaction checks --------------------------------------------

    TxnReport
    checkTxn(const detail::TxnFacts& f)
    {
        TxnReport rep;
        rep.txn = f.id;

        if (!f.saw_vote_req)
        {
            checkNoProtocolTxn(f, rep);
            return rep;
        }

        const std::vector<NodeId>& parts = *f.participants;
        std::set<NodeId> dropouts = roDropouts(f);

        // Votes as recorded in the log (the protocol's source of truth).
        std::map<NodeId, LogState> slotState;
        for (const auto& [owner, s] : f.slots)
        {
            TxnLogSlot cell;
            if (s.vote)
            {
                cell.vote = LogRecord{*s.vote, owner, 0};
            }
            if (s.decision)
            {
                cell.decision = LogRecord{*s.decision, owner, 0};
            }
            slotState[owner] = derive_state(cell);
        }

        GlobalDecision ground = groundTruth(f, parts, dropouts, slotState);
        rep.decision = ground;

        rep.results.push_back(checkAc1(f, ground));
        rep.results.push_back(checkAc2(f));
        rep.results.push_back(checkAc3(f, parts, dropouts, slotState));
        if (crashFree())
        {
            rep.results.push_back(checkAc4(f, parts, dropouts, slotState));
        }
        rep.results.push_back(checkAc5(f, parts, dropouts));
        if (params_.protocol == ProtocolKind::Cornus)
        {
            rep.results.push_back(checkLemma1(f, parts, dropouts));
        }
        rep.results.push_back(checkReplies(f));
        return rep;
    }

    // Transactions that never ran the commit protocol (early aborts,
    // single-partition commits, declared read-only): the only demand is
    // internal consistency of whatever outcomes were announced.
    void
    checkNoProtocolTxn(const detail::TxnFacts& f, TxnReport& rep)
    {
        PropertyResult r;
        r.property = "AC1";
        std::optional<Decision> seen;
        for (const auto& [node, ds] : f.decides)
        {
            for (const auto& [d, idx] : ds)
            {
                if (seen && *seen != d)
                {
                    r.verdict = Verdict::Fail;
                    r.witness.push_back(idx);
                    r.detail = "conflicting outcomes announced for a "
                               "transaction that ran no vote round";
                }
                seen = d;
            }
        }
        // A durable decision record (single-partition commit) must agree
        // with what was announced.
        if (auto it = f.slots.find(f.coordinator);
            it != f.slots.end() && it->second.decision && seen)
        {
            Decision logged = *it->second.decision == RecordType::Commit
                                  ? Decision::Commit
                                  : Decision::Abort;
            if (logged != *seen)
            {
                r.verdict = Verdict::Fail;
                r.detail = "announced outcome contradicts the decision "
                           "record in the coordinator slot";
            }
        }
        if (seen)
        {
            rep.decision = *seen == Decision::Commit
                               ? GlobalDecision::Commit
                               : GlobalDecision::Abort;
        }
        rep.results.push_back(std::move(r));
        rep.results.push_back(checkAc2(f));
        rep.results.push_back(checkReplies(f));
    }

    std::set<NodeId>
    roDropouts(const detail::TxnFacts& f) const
    {
        std::set<NodeId> out;
        if (params_.protocol != ProtocolKind::TwoPC)
        {
            return out;
        }
        // A 2pc participant that answered yes but never wrote a vote
        // record is a read-only participant that left the protocol after
        // the first phase; it takes no further part.
        for (NodeId n : f.yes_responders)
        {
            auto it = f.slots.find(n);
            if (it == f.slots.end() || !it->second.vote)
            {
                out.insert(n);
            }
        }
        return out;
    }

    GlobalDecision
    groundTruth(const detail::TxnFacts& f, const std::vector<NodeId>& parts,
                const std::set<NodeId>& dropouts,
                const std::map<NodeId, LogState>& slotState) const
    {
        if (params_.protocol == ProtocolKind::TwoPC)
        {
            // The coordinator's own log entry is authoritative; no entry
            // means presumed abort.
            auto it = slotState.find(f.coordinator);
            if (it != slotState.end() && it->second == LogState::Committed)
            {
                return GlobalDecision::Commit;
            }
            if (it != slotState.end() && it->second == LogState::Aborted)
            {
                return GlobalDecision::Abort;
            }
            // No record anywhere and a unanimous yes first phase from
            // participants that all dropped out read-only: nothing is
            // durable, nobody holds locks, nobody will ever ask. The
            // coordinator may answer commit without logging; follow its
            // announcement.
            bool allReadOnly =
                !parts.empty() && f.slots.empty() &&
                std::all_of(parts.begin(), parts.end(), [&](NodeId p) {
                    return dropouts.count(p) != 0;
                });
            if (allReadOnly)
            {
                auto d = f.decides.find(f.coordinator);
                if (d != f.decides.end() &&
                    std::any_of(d->second.begin(), d->second.end(),
                                [](const std::pair<Decision, size_t>& pr) {
                                    return pr.first == Decision::Commit;
                                }))
                {
                    return GlobalDecision::Commit;
                }
            }
            return GlobalDecision::Abort; // presumed
        }
        // One-phase rule: commit iff every participant logged a yes vote,
        // reading decisions over votes where both exist.
        std::map<NodeId, TxnLogSlot> cells;
        for (const auto& [owner, s] : f.slots)
        {
            TxnLogSlot cell;
            if (s.vote)
            {
                cell.vote = LogRecord{*s.vote, owner, 0};
            }
            if (s.decision)
            {
                cell.decision = LogRecord{*s.decision, owner, 0};
            }
            cells[owner] = cell;
        }
        std::vector<NodeId> voting;
        for (NodeId p : parts)
        {
            if (!dropouts.count(p))
            {
                voting.push_back(p);
            }
        }
        return global_decision(cells, voting);
    }

    PropertyResult
    checkAc1(const detail::TxnFacts& f, GlobalDecision ground) const
    {
        PropertyResult r;
        r.property = "AC1";
        std::optional<std::pair<Decision, size_t>> first;
        for (const auto& [node, ds] : f.decides)
        {
            for (const auto& [d, idx] : ds)
            {
                if (first && first->first != d)
                {
                    r.verdict = Verdict::Fail;
                    r.witness = {first->second, idx};
                    r.detail = "two nodes reached different outcomes";
                    return r;
                }
                if (!first)
                {
                    first = {d, idx};
                }
            }
        }
        if (first && ground != GlobalDecision::Undetermined)
        {
            Decision g = ground == GlobalDecision::Commit ? Decision::Commit
                                                          : Decision::Abort;
            if (first->first != g)
            {
                r.verdict = Verdict::Fail;
                r.witness = {first->second};
                r.detail = std::string("announced outcome disagrees with "
                                       "the log (log says ") +
                           to_string(ground) + ")";
            }
        }
        return r;
    }

    PropertyResult
    checkAc2(const detail::TxnFacts& f) const
    {
        PropertyResult r;
        r.property = "AC2";
        for (const auto& [node, ds] : f.decides)
        {
            if (ds.size() > 1)
            {
                r.verdict = Verdict::Fail;
                r.witness = {ds[0].second, ds[1].second};
                r.detail = "node " + std::to_string(node) +
                           " reversed or repeated its decision";
                return r;
            }
        }
        return r;
    }

    PropertyResult
    checkAc3(const detail::TxnFacts& f, const std::vector<NodeId>& parts,
             const std::set<NodeId>& dropouts,
             const std::map<NodeId, LogState>& slotState) const
    {
        PropertyResult r;
        r.property = "AC3";
        bool committed = false;
        size_t witness = 0;
        for (const auto& [node, ds] : f.decides)
        {
            for (const auto& [d, idx] : ds)
            {
                if (d == Decision::Commit)
                {
                    committed = true;
                    witness = idx;
                }
            }
        }
        if (!committed)
        {
            return r;
        }
        for (NodeId p : parts)
        {
            if (dropouts.count(p))
            {
                continue;
            }
            if (params_.protocol == ProtocolKind::TwoPC &&
                p == f.coordinator && !f.slots.count(p))
            {
                // A 2pc coordinator votes implicitly by writing the
                // decision record itself.
                continue;
            }
            auto it = slotState.find(p);
            bool votedYes =
                it != slotState.end() && (it->second == LogState::VoteYes ||
                                          it->second == LogState::Committed);
            if (params_.protocol == ProtocolKind::TwoPC &&
                p == f.coordinator)
            {
                votedYes = it != slotState.end() &&
                           it->second != LogState::Aborted;
            }
            if (!votedYes)
            {
                r.verdict = Verdict::Fail;
                r.witness = {witness};
                r.detail = "committed but participant " +
                           std::to_string(p) + " holds no yes vote";
                return r;
            }
        }
        return r;
    }

    PropertyResult
    checkAc4(const detail::TxnFacts& f, const std::vector<NodeId>& parts,
             const std::set<NodeId>& dropouts,
             const std::map<NodeId, LogState>& slotState) const
    {
        PropertyResult r;
        r.property = "AC4";
        bool allYes = true;
        for (NodeId p : parts)
        {
            if (dropouts.count(p))
            {
                continue;
            }
            // A slot in Committed state implies a yes vote: an abort vote
            // can never be overwritten by a commit decision.
            auto it = slotState.find(p);
            allYes = allYes && it != slotState.end() &&
                     (it->second == LogState::VoteYes ||
                      it->second == LogState::Committed);
        }
        if (!allYes)
        {
            return r;
        }
        for (const auto& [node, ds] : f.decides)
        {
            for (const auto& [d, idx] : ds)
            {
                if (d == Decision::Abort)
                {
                    r.verdict = Verdict::Fail;
                    r.witness = {idx};
                    r.detail = "all recorded votes are yes on an "
                               "undisturbed run, yet node " +
                               std::to_string(node) + " aborted";
                    return r;
                }
            }
        }
        return r;
    }

    PropertyResult
    checkAc5(const detail::TxnFacts& f, const std::vector<NodeId>& parts,
             const std::set<NodeId>& dropouts) const
    {
        PropertyResult r;
        r.property = "AC5";

        // Everyone who joined the vote round and is alive at the end of
        // the run must have reached an outcome.
        std::vector<NodeId> missing;
        for (NodeId p : parts)
        {
            if (dropouts.count(p))
            {
                continue;
            }
            auto wit = windows_.find(p);
            if (wit != windows_.end() && wit->second.downAtEnd())
            {
                continue; // still dead; nothing owed
            }
            auto dit = f.decides.find(p);
            if (dit == f.decides.end() || dit->second.empty())
            {
                missing.push_back(p);
            }
        }
        if (missing.empty())
        {
            // Decisions must also land within a bounded window of the
            // last repair: a decision that only exists because the run
            // kept draining stale timers is still a pass, but flag
            // pathological stalls.
            VirtualTime lastRepair = f.first_event;
            for (const auto& [node, w] : windows_)
            {
                for (const auto& [t, crash] : w.flips)
                {
                    if (!crash)
                    {
                        lastRepair = std::max(lastRepair, t);
                    }
                }
            }
            VirtualTime cycle = params_.timeout_us +
                                2 * params_.net_one_way_us +
                                params_.storage_write_us;
            VirtualTime bound =
                lastRepair + 3 * (cycle == 0 ? end_time_ + 1 : cycle) +
                params_.timeout_us;
            VirtualTime lastDecide = 0;
            for (const auto& [node, ds] : f.decides)
            {
                for (const auto& [d, idx] : ds)
                {
                    lastDecide = std::max(lastDecide, trace_[idx].time);
                }
            }
            if (params_.timeout_us != 0 && lastDecide > bound)
            {
                r.verdict = Verdict::Fail;
                r.detail = "an outcome landed at " +
                           std::to_string(lastDecide) +
                           ", beyond the repair bound " +
                           std::to_string(bound);
            }
            return r;
        }

        // Someone is stuck. Decide whether the protocol is allowed to be.
        if (params_.protocol == ProtocolKind::TwoPC)
        {
            auto wit = windows_.find(f.coordinator);
            if (wit != windows_.end() && wit->second.downAtEnd())
            {
                r.verdict = Verdict::Blocked;
                r.cause = BlockCause::CoordinatorDown;
                r.detail = "in-doubt participants cannot resolve while "
                           "the coordinator stays down";
                return r;
            }
        }
        if (storageDownAtEnd())
        {
            r.verdict = Verdict::Blocked;
            r.cause = BlockCause::StorageDown;
            r.detail = "no progress is possible without the shared log";
            return r;
        }
        r.verdict = Verdict::Fail;
        std::string who;
        for (NodeId p : missing)
        {
            who += (who.empty() ? "" : ",") + std::to_string(p);
        }
        r.detail = "live participants {" + who +
                   "} never reached an outcome with no blocking condition "
                   "present";
        return r;
    }

    // One-phase safety core: once the log determines an outcome it can
    // never flip, so outcomes derived from it at different times must be
    // identical.
    PropertyResult
    checkLemma1(const detail::TxnFacts& f, const std::vector<NodeId>& parts,
                const std::set<NodeId>& dropouts) const
    {
        PropertyResult r;
        r.property = "LEMMA1";

        std::vector<NodeId> voting;
        for (NodeId p : parts)
        {
            if (!dropouts.count(p))
            {
                voting.push_back(p);
            }
        }

        // Replay slot writes in trace order and re-derive the global
        // outcome after every write.
        std::map<NodeId, TxnLogSlot> cells;
        std::optional<GlobalDecision> definitive;
        for (size_t i = 0; i < trace_.size(); ++i)
        {
            const TraceEvent& e = trace_[i];
            if (e.kind != TraceKind::SlotWrite || !(e.txn == f.id))
            {
                continue;
            }
            TxnLogSlot& cell = cells[e.slot_owner];
            LogRecord rec{e.value, e.node, e.time};
            if (e.field == SlotField::Vote)
            {
                if (!cell.vote)
                {
                    cell.vote = rec;
                }
            }
            else if (!cell.decision)
            {
                cell.decision = rec;
            }
            GlobalDecision g = global_decision(cells, voting);
            if (g == GlobalDecision::Undetermined)
            {
                continue;
            }
            if (definitive && *definitive != g)
            {
                r.verdict = Verdict::Fail;
                r.witness = {i};
                r.detail = std::string("log outcome flipped from ") +
                           to_string(*definitive) + " to " + to_string(g);
                return r;
            }
            definitive = g;
        }
        return r;
    }

    PropertyResult
    checkReplies(const detail::TxnFacts& f) const
    {
        PropertyResult r;
        r.property = "REPLY";
        std::optional<std::pair<Decision, size_t>> first;
        for (const auto& [node, rs] : f.replies)
        {
            for (const auto& [d, idx] : rs)
            {
                if (first && first->first != d)
                {
                    r.verdict = Verdict::Fail;
                    r.witness = {first->second, idx};
                    r.detail = "the caller was answered twice with "
                               "different outcomes";
                    return r;
                }
                if (!first)
                {
                    first = {d, idx};
                }
            }
        }
        if (!first)
        {
            return r;
        }
        // The answer must agree with what the answering node decided.
        for (const auto& [node, rs] : f.replies)
        {
            for (const auto& [d, idx] : rs)
            {
                auto dit = f.decides.find(node);
                if (dit == f.decides.end())
                {
                    continue;
                }
                for (const auto& [dd, didx] : dit->second)
                {
                    if (dd != d)
                    {
                        r.verdict = Verdict::Fail;
                        r.witness = {didx, idx};
                        r.detail = "a node answered the caller against "
                                   "its own decision";
                        return r;
                    }
                }
            }
        }
        return r;
    }

    const Trace& trace_;
    CheckParams params_;
    std::map<TxnId, detail::TxnFacts> txns_;
    std::map<NodeId, detail::NodeWindows> windows_;
    VirtualTime end_time_ = 0;
};

inline CheckReport
check_trace(const Trace& trace, const CheckParams& params)
{
    return TraceChecker(trace, params).check();
}

// Parse-and-check entry point for externally supplied traces; throws
// TraceParseError on malformed input.
inline CheckReport
check_serialized(const std::string& text, const CheckParams& params)
{
    Trace t = parse_trace(text);
    return TraceChecker(t, params).check();
}

inline std::string
summarize(const CheckReport& rep)
{
    std::ostringstream os;
    size_t pass = 0, fail = 0, blocked = 0;
    for (const auto& t : rep.txns)
    {
        if (t.failed())
        {
            ++fail;
        }
        else if (t.blocked())
        {
            ++blocked;
        }
        else
        {
            ++pass;
        }
        for (const auto& r : t.results)
        {
            if (r.verdict != Verdict::Pass)
            {
                os << to_string(t.txn) << " " << r.property << " "
                   << to_string(r.verdict);
                if (r.cause != BlockCause::None)
                {
                    os << "(" << to_string(r.cause) << ")";
                }
                os << ": " << r.detail << "\n";
            }
        }
    }
    for (const auto& r : rep.global)
    {
        if (r.verdict != Verdict::Pass)
        {
            os << "global " << r.property << " " << to_string(r.verdict)
               << ": " << r.detail << "\n";
        }
    }
    os << "txns=" << rep.txns.size() << " pass=" << pass
       << " fail=" << fail << " blocked=" << blocked << "\n";
    return os.str();
}

} // namespace cornus
