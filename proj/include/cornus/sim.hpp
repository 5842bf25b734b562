#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "cornus/core.hpp"
#include "cornus/message.hpp"
#include "cornus/storage.hpp"
#include "cornus/trace.hpp"

namespace cornus
{

// Named instants at which a fault plan may kill a node. The send-loop
// points carry an index: "crashed after the k-th send of this kind".
enum class CrashPointKind : std::uint8_t
{
    CoordBeforeStart,
    CoordAfterSendVoteReq,   // index = k in 1..n
    CoordBeforeDecisionLog,  // 2PC: all votes in, decision record not issued
    CoordAfterDecisionLog,   // 2PC: decision durable, nobody told
    CoordAfterDecide,        // decision reached, no DECISION sent yet
    CoordAfterSendDecision,  // index = k in 1..n
    PartBeforeVoteReq,       // VOTE_REQ never processed (lost in the crash)
    PartAfterVoteReqBeforeLog,
    PartAfterLogBeforeReply,
    PartAfterReply,
};

inline char const*
to_string(CrashPointKind k)
{
    switch (k)
    {
    case CrashPointKind::CoordBeforeStart:
        return "coord_before_start";
    case CrashPointKind::CoordAfterSendVoteReq:
        return "coord_after_send_votereq";
    case CrashPointKind::CoordBeforeDecisionLog:
        return "coord_before_decision_log";
    case CrashPointKind::CoordAfterDecisionLog:
        return "coord_after_decision_log";
    case CrashPointKind::CoordAfterDecide:
        return "coord_after_decide";
    case CrashPointKind::CoordAfterSendDecision:
        return "coord_after_send_decision";
    case CrashPointKind::PartBeforeVoteReq:
        return "part_before_votereq";
    case CrashPointKind::PartAfterVoteReqBeforeLog:
        return "part_after_votereq";
    case CrashPointKind::PartAfterLogBeforeReply:
        return "part_after_log";
    case CrashPointKind::PartAfterReply:
        return "part_after_reply";
    }
    return "?";
}

struct CrashPoint
{
    CrashPointKind kind = CrashPointKind::CoordBeforeStart;
    std::uint32_t index = 0;

    friend bool operator==(const CrashPoint& a, const CrashPoint& b) = default;
};

struct SymbolicCrash
{
    NodeId node = 0;
    CrashPoint point;
    std::optional<VirtualTime> recover_at;
};

struct TimedCrash
{
    NodeId node = 0;
    VirtualTime at = 0;
    std::optional<VirtualTime> recover_at;
};

struct StorageOutage
{
    VirtualTime from = 0;
    std::optional<VirtualTime> until; // absent = never recovers
};

struct FaultPlan
{
    std::optional<SymbolicCrash> symbolic;
    std::vector<TimedCrash> crashes;
    std::vector<StorageOutage> outages;
};

enum class StorageOpKind : std::uint8_t
{
    LogOnce,
    Log,
    Overwrite,
    Read,
};

struct StorageOpResult
{
    std::uint64_t tag = 0; // caller-chosen correlation tag
    StorageOpKind kind = StorageOpKind::Log;
    SlotKey key;
    RecordType rec = RecordType::Abort;
    StorageResult result;
    VirtualTime issued_at = 0;
};

// A node's behavior. The simulator never invokes any of these on a node
// that is currently crashed.
class NodeActor
{
  public:
    virtual ~NodeActor() = default;
    virtual void onMessage(const Message& m) = 0;
    virtual void onTimer(std::uint64_t tag) = 0;
    virtual void onStorageResult(const StorageOpResult& r) = 0;
    virtual void
    onRecover()
    {
    }
    virtual void
    onStorageUp()
    {
    }
};

struct SimConfig
{
    VirtualTime net_one_way_us = 250;
    StorageLatencyModel storage;
    std::uint64_t seed = 1;

    // Optional per-hop jitter in [0, net_jitter_us], drawn deterministically
    // from the seed. Off by default so closed-form latency checks are exact.
    VirtualTime net_jitter_us = 0;

    // Schedule oracles for bounded-exhaustive exploration: each entry picks
    // one alternative for the next message send / storage op, consumed in
    // issue order; the default applies once a stream is exhausted.
    std::vector<std::uint8_t> msg_schedule;     // 0: d, 1: 3d, 2: big
    std::vector<std::uint8_t> storage_schedule; // 0: +0, 1: +7us
    VirtualTime big_delay_us = 0; // what "2" means; 0 = 20x one-way

    std::uint64_t max_events = 5'000'000;
};

class Sim
{
  public:
    Sim(SimConfig cfg, FaultPlan plan)
        : cfg_(cfg), plan_(plan), rng_(cfg.seed)
    {
        if (cfg_.big_delay_us == 0)
        {
            cfg_.big_delay_us = 20 * cfg_.net_one_way_us;
        }
        for (const auto& c : plan_.crashes)
        {
            Event e = mkEvent(c.at, Event::Kind::Crash);
            e.node = c.node;
            e.recover_at = c.recover_at;
            push(e);
        }
        for (const auto& o : plan_.outages)
        {
            Event e = mkEvent(o.from, Event::Kind::StorageCrash);
            push(e);
            if (o.until)
            {
                push(mkEvent(*o.until, Event::Kind::StorageRecover));
            }
        }
    }

    void
    addActor(NodeId node, NodeActor* actor)
    {
        actors_[node] = actor;
    }

    VirtualTime
    now() const
    {
        return now_;
    }

    bool
    isCrashed(NodeId node) const
    {
        return crashed_.count(node) != 0;
    }

    bool
    storageDown() const
    {
        return storage_down_;
    }

    bool
    symbolicFired() const
    {
        return symbolic_fired_;
    }

    const SimConfig&
    config() const
    {
        return cfg_;
    }

    MemoryLogStore&
    store()
    {
        return store_;
    }

    const Trace&
    trace() const
    {
        return trace_;
    }

    void
    addTrace(TraceEvent e)
    {
        e.time = now_;
        trace_.push_back(e);
    }

    // --- services available to actors -----------------------------------

    void
    send(const Message& m)
    {
        assert(!isCrashed(m.from));
        TraceEvent te;
        te.kind = TraceKind::Send;
        te.node = m.from;
        te.peer = m.to;
        te.txn = m.txn;
        te.msg = encode(m);
        addTrace(te);

        Event e = mkEvent(now_ + hopDelay(m), Event::Kind::Deliver);
        e.msg = m;
        push(e);
    }

    struct TimerHandle
    {
        NodeId node = 0;
        std::uint64_t id = 0;
    };

    TimerHandle
    setTimer(NodeId node, VirtualTime delay, std::uint64_t tag)
    {
        std::uint64_t id = ++timer_ids_;
        active_timers_[node].insert(id);
        Event e = mkEvent(now_ + delay, Event::Kind::Timer);
        e.node = node;
        e.timer_id = id;
        e.tag = tag;
        push(e);
        return {node, id};
    }

    void
    cancelTimer(const TimerHandle& h)
    {
        auto it = active_timers_.find(h.node);
        if (it != active_timers_.end())
        {
            it->second.erase(h.id);
        }
    }

    void
    storageOp(NodeId issuer, StorageOpKind kind, const SlotKey& key,
              RecordType rec, std::uint64_t tag)
    {
        assert(!isCrashed(issuer));
        OpLegs legs = kind == StorageOpKind::Read ? cfg_.storage.readLegs()
                                                  : cfg_.storage.writeLegs();
        VirtualTime jitter = nextStorageJitter();
        Event e =
            mkEvent(now_ + legs.request + legs.service + jitter,
                    Event::Kind::StorageLinearize);
        e.node = issuer;
        e.tag = tag;
        e.op_kind = kind;
        e.key = key;
        e.rec = rec;
        e.issued_at = now_;
        e.response_leg = legs.response;
        push(e);
    }

    // Fires (at most once per run) if the fault plan names this point on
    // this node. The caller must stop acting immediately when this returns
    // true: it is now crashed.
    bool
    hitCrashPoint(NodeId node, CrashPointKind kind, std::uint32_t index = 0)
    {
        if (!plan_.symbolic || symbolic_fired_ || plan_.symbolic->node != node ||
            !(plan_.symbolic->point == CrashPoint{kind, index}) ||
            isCrashed(node))
        {
            return false;
        }
        symbolic_fired_ = true;
        doCrash(node);
        if (plan_.symbolic->recover_at)
        {
            Event e =
                mkEvent(std::max(*plan_.symbolic->recover_at, now_ + 1),
                        Event::Kind::Recover);
            e.node = node;
            push(e);
        }
        return true;
    }

    // --- run loop --------------------------------------------------------

    // Runs events to quiescence. Pure function of the constructor arguments
    // and the registered actors' behavior: same inputs, same trace.
    void
    run()
    {
        std::uint64_t dispatched = 0;
        while (!queue_.empty())
        {
            if (++dispatched > cfg_.max_events)
            {
                throw std::runtime_error(
                    "sim exceeded max_events; runaway timer or retry loop?");
            }
            Event e = queue_.top();
            queue_.pop();
            assert(e.time >= now_);
            now_ = e.time;
            dispatch(e);
        }
    }

  private:
    struct Event
    {
        VirtualTime time = 0;
        std::uint64_t seq = 0;
        enum class Kind : std::uint8_t
        {
            Deliver,
            Timer,
            StorageLinearize,
            StorageComplete,
            Crash,
            Recover,
            StorageCrash,
            StorageRecover,
        } kind = Kind::Deliver;

        Message msg;                             // Deliver
        NodeId node = 0;                         // Timer/Crash/Recover/storage issuer
        std::uint64_t timer_id = 0;              // Timer
        std::uint64_t tag = 0;                   // Timer/storage correlation
        std::optional<VirtualTime> recover_at;   // Crash

        StorageOpKind op_kind = StorageOpKind::Log; // storage events
        SlotKey key;
        RecordType rec = RecordType::Abort;
        VirtualTime issued_at = 0;
        VirtualTime response_leg = 0;
        StorageResult op_result; // StorageComplete

        friend bool
        operator>(const Event& a, const Event& b)
        {
            return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
        }
    };

    Event
    mkEvent(VirtualTime t, typename Event::Kind k)
    {
        Event e;
        e.time = t;
        e.seq = ++event_seq_;
        e.kind = k;
        return e;
    }

    void
    push(const Event& e)
    {
        queue_.push(e);
    }

    VirtualTime
    hopDelay(const Message& m)
    {
        if (m.from == m.to)
        {
            return 0;
        }
        VirtualTime d = cfg_.net_one_way_us;
        if (msg_sched_next_ < cfg_.msg_schedule.size())
        {
            switch (cfg_.msg_schedule[msg_sched_next_++])
            {
            case 0:
                break;
            case 1:
                d = 3 * cfg_.net_one_way_us;
                break;
            default:
                d = cfg_.big_delay_us;
                break;
            }
            return d;
        }
        if (cfg_.net_jitter_us > 0)
        {
            d += rng_() % (cfg_.net_jitter_us + 1);
        }
        return d;
    }

    VirtualTime
    nextStorageJitter()
    {
        if (storage_sched_next_ < cfg_.storage_schedule.size())
        {
            return cfg_.storage_schedule[storage_sched_next_++] ? 7 : 0;
        }
        return 0;
    }

    void
    doCrash(NodeId node)
    {
        crashed_.insert(node);
        active_timers_[node].clear();
        TraceEvent te;
        te.kind = TraceKind::Crash;
        te.node = node;
        addTrace(te);
    }

    void
    dispatch(const Event& e)
    {
        switch (e.kind)
        {
        case Event::Kind::Deliver:
        {
            NodeId dst = e.msg.to;
            if (isCrashed(dst))
            {
                return; // lost with the node
            }
            // "Crashed before the vote request arrived": the plan kills the
            // destination at delivery time, and the message dies with it.
            if (e.msg.type == MsgType::VoteReq && plan_.symbolic &&
                !symbolic_fired_ && plan_.symbolic->node == dst &&
                plan_.symbolic->point ==
                    CrashPoint{CrashPointKind::PartBeforeVoteReq, 0})
            {
                hitCrashPoint(dst, CrashPointKind::PartBeforeVoteReq);
                return;
            }
            TraceEvent te;
            te.kind = TraceKind::Deliver;
            te.node = dst;
            te.peer = e.msg.from;
            te.txn = e.msg.txn;
            te.msg = encode(e.msg);
            addTrace(te);
            if (auto it = actors_.find(dst); it != actors_.end())
            {
                it->second->onMessage(e.msg);
            }
            return;
        }
        case Event::Kind::Timer:
        {
            if (isCrashed(e.node))
            {
                return;
            }
            auto& ids = active_timers_[e.node];
            auto it = ids.find(e.timer_id);
            if (it == ids.end())
            {
                return; // cancelled
            }
            ids.erase(it);
            if (auto a = actors_.find(e.node); a != actors_.end())
            {
                a->second->onTimer(e.tag);
            }
            return;
        }
        case Event::Kind::StorageLinearize:
        {
            StorageResult res;
            if (storage_down_)
            {
                res.status = StorageStatus::Unavailable;
            }
            else
            {
                switch (e.op_kind)
                {
                case StorageOpKind::LogOnce:
                    res = store_.logOnceAt(e.key, e.rec, e.node, now_);
                    break;
                case StorageOpKind::Log:
                    res = store_.logAt(e.key, e.rec, e.node, now_);
                    break;
                case StorageOpKind::Overwrite:
                    res = store_.overwriteAt(e.key, e.rec, e.node, now_);
                    break;
                case StorageOpKind::Read:
                    res = store_.readStateAt(e.key);
                    break;
                }
                if (res.wrote)
                {
                    TraceEvent te;
                    te.kind = TraceKind::SlotWrite;
                    te.node = e.node;
                    te.txn = e.key.txn;
                    te.slot_owner = e.key.log;
                    te.field = res.field;
                    te.value = e.rec;
                    te.issued_at = e.issued_at;
                    addTrace(te);
                }
            }
            Event done = mkEvent(now_ + e.response_leg,
                                 Event::Kind::StorageComplete);
            done.node = e.node;
            done.tag = e.tag;
            done.op_kind = e.op_kind;
            done.key = e.key;
            done.rec = e.rec;
            done.issued_at = e.issued_at;
            done.op_result = res;
            push(done);
            return;
        }
        case Event::Kind::StorageComplete:
        {
            if (isCrashed(e.node))
            {
                return; // result addressed to a dead node
            }
            if (auto a = actors_.find(e.node); a != actors_.end())
            {
                StorageOpResult r;
                r.tag = e.tag;
                r.kind = e.op_kind;
                r.key = e.key;
                r.rec = e.rec;
                r.result = e.op_result;
                r.issued_at = e.issued_at;
                a->second->onStorageResult(r);
            }
            return;
        }
        case Event::Kind::Crash:
        {
            if (!isCrashed(e.node))
            {
                doCrash(e.node);
                if (e.recover_at)
                {
                    Event r = mkEvent(std::max(*e.recover_at, now_ + 1),
                                      Event::Kind::Recover);
                    r.node = e.node;
                    push(r);
                }
            }
            return;
        }
        case Event::Kind::Recover:
        {
            if (!isCrashed(e.node))
            {
                return;
            }
            crashed_.erase(e.node);
            TraceEvent te;
            te.kind = TraceKind::Recover;
            te.node = e.node;
            addTrace(te);
            if (auto a = actors_.find(e.node); a != actors_.end())
            {
                a->second->onRecover();
            }
            return;
        }
        case Event::Kind::StorageCrash:
        {
            if (!storage_down_)
            {
                storage_down_ = true;
                TraceEvent te;
                te.kind = TraceKind::Crash;
                te.node = kStorageNode;
                addTrace(te);
            }
            return;
        }
        case Event::Kind::StorageRecover:
        {
            if (storage_down_)
            {
                storage_down_ = false;
                TraceEvent te;
                te.kind = TraceKind::Recover;
                te.node = kStorageNode;
                addTrace(te);
                // Wake anything parked on storage availability.
                for (auto& [node, actor] : actors_)
                {
                    if (!isCrashed(node))
                    {
                        actor->onStorageUp();
                    }
                }
            }
            return;
        }
        }
    }

    SimConfig cfg_;
    FaultPlan plan_;
    std::mt19937_64 rng_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t event_seq_ = 0;
    VirtualTime now_ = 0;

    std::map<NodeId, NodeActor*> actors_;
    std::set<NodeId> crashed_;
    bool storage_down_ = false;
    bool symbolic_fired_ = false;

    std::map<NodeId, std::set<std::uint64_t>> active_timers_;
    std::uint64_t timer_ids_ = 0;

    std::size_t msg_sched_next_ = 0;
    std::size_t storage_sched_next_ = 0;

    MemoryLogStore store_;
    Trace trace_;
};

} // namespace cornus
