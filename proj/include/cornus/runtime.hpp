#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Hosts the protocol roles on simulated nodes: message/timer/storage
// routing, the lock-and-execute phase, closed-loop bench clients, crash
// recovery, and per-transaction latency accounting.

#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "cornus/cornus.hpp"
#include "cornus/core.hpp"
#include "cornus/message.hpp"
#include "cornus/protocol.hpp"
#include "cornus/sim.hpp"
#include "cornus/trace.hpp"
#include "cornus/twopc.hpp"
#include "cornus/workload.hpp"

namespace cornus
{

struct ScenarioTxn
{
    Transaction txn;
    bool with_execution = false;
    // Participant -> vote; absent means yes. Only meaningful without
    // execution (with execution the lock outcome decides).
    std::map<NodeId, bool> forced_votes;
};

struct ScenarioSpec
{
    std::uint32_t n_nodes = 3;
    ProtocolConfig protocol;
    SimConfig sim;
    std::vector<ScenarioTxn> txns;
    FaultPlan faults;
};

struct BenchSpec
{
    std::uint32_t n_nodes = 4;
    ProtocolConfig protocol;
    SimConfig sim;
    WorkloadConfig workload;
    VirtualTime duration_us = 100000; // stop starting txns after this
    std::uint64_t max_txns_per_node = 0; // 0 = bounded by duration only
    FaultPlan faults;
};

enum class TxnClass : std::uint8_t
{
    SinglePartition, // all accesses at the coordinator: one local commit
    Distributed,     // needs the commit protocol
    ReadOnly,        // declared read-only upfront
};

inline char const*
to_string(TxnClass c)
{
    switch (c)
    {
    case TxnClass::SinglePartition:
        return "single_partition";
    case TxnClass::Distributed:
        return "distributed";
    case TxnClass::ReadOnly:
        return "read_only";
    }
    return "?";
}

struct TxnStat
{
    TxnId id;
    TxnClass cls = TxnClass::Distributed;
    bool replied = false;
    bool committed = false;
    bool early_abort = false; // NO_WAIT refusal before the protocol started
    VirtualTime start = 0;
    VirtualTime protocol_start = 0; // execution finished
    VirtualTime decision_time = 0;  // outcome determined
    VirtualTime reply_time = 0;     // client answered
    bool decision_stamped = false;  // decision_time is meaningful (0 is a
                                    // legal instant, not just "unset")
};

struct RunResult
{
    Trace trace;
    std::vector<TxnStat> txns;
    std::map<SlotKey, TxnLogSlot> slots;
    std::uint64_t illegal_transitions = 0;
    bool symbolic_crash_fired = false;
};

class World;

class Node : public NodeActor
{
  public:
    Node(World& w, NodeId self) : w_(w), self_(self)
    {
    }

    void onMessage(const Message& m) override;
    void onTimer(std::uint64_t tag) override;
    void onStorageResult(const StorageOpResult& r) override;
    void onRecover() override;
    void onStorageUp() override;

    void installParticipant(const Transaction& txn, bool vote_yes);
    void startCoordinator(const Transaction& txn);
    void beginTxn(const Transaction& txn);
    void clientNext();

  private:
    friend class World;

    struct ExecCtx
    {
        Transaction txn;
        std::set<NodeId> pending;
        std::vector<NodeId> granted_remote;
        Sim::TimerHandle timer{};
    };

    RoleEnv makeEnv(const TxnId& txn, bool coordinator);
    void ensureParticipant(const TxnId& txn, NodeId coordinator);
    void routeToRole(std::uint64_t cookie, Purpose p,
                     const StorageOpResult* sr);
    void execDone(const TxnId& txn);
    void earlyAbort(const TxnId& txn);
    void commitWithoutProtocol(const TxnId& txn);
    void answerDecisionReq(const Message& m);
    void handleRecoveryRead(const StorageOpResult& r);
    void releaseTxn(const TxnId& txn);
    bool acquireLocal(const Transaction& t);

    World& w_;
    NodeId self_;
    LockTable locks_;

    std::map<TxnId, std::unique_ptr<CornusCoordinator>> c_coord_;
    std::map<TxnId, std::unique_ptr<TwoPcCoordinator>> t_coord_;
    std::map<TxnId, std::unique_ptr<CornusParticipant>> c_part_;
    std::map<TxnId, std::unique_ptr<TwoPcParticipant>> t_part_;

    struct Route
    {
        TxnId txn;
        bool coordinator = false;
    };
    std::map<std::uint64_t, Route> routes_;
    std::uint64_t next_cookie_ = 1; // 0 is the node itself

    std::map<TxnId, Decision> completed_;
    std::map<TxnId, bool> part_ro_; // granted access set was all reads

    std::map<TxnId, ExecCtx> execs_;
    std::optional<TxnId> exec_timer_txn_; // at most one in flight per node
    bool recovering_ = false;
    int recovery_reads_ = 0;
    std::map<TxnId, int> recovery_read_attempts_;

    std::mt19937_64 client_rng_;
    std::uint64_t client_seq_ = 0;
    bool client_active_ = false;
};

class World
{
  public:
    World(std::uint32_t n_nodes, const ProtocolConfig& pcfg,
          const SimConfig& scfg, const FaultPlan& faults)
        : pcfg_(pcfg), sim_(scfg, faults), n_nodes_(n_nodes)
    {
        for (std::uint32_t i = 0; i < n_nodes; ++i)
        {
            nodes_.push_back(std::make_unique<Node>(*this, i));
            sim_.addActor(i, nodes_.back().get());
        }
    }

    Sim&
    sim()
    {
        return sim_;
    }

    const ProtocolConfig&
    pcfg() const
    {
        return pcfg_;
    }

    std::uint32_t
    nodeCount() const
    {
        return n_nodes_;
    }

    Node&
    node(NodeId id)
    {
        return *nodes_.at(id);
    }

    // --- scenario / bench priming ---------------------------------------

    void
    primeScenario(const ScenarioSpec& spec)
    {
        for (const auto& st : spec.txns)
        {
            forced_votes_[st.txn.id] = st.forced_votes;
            newStat(st.txn);
            noteJoined(st.txn.coordinator, st.txn, true, false);
            if (st.with_execution)
            {
                nodes_.at(st.txn.coordinator)->beginTxn(st.txn);
            }
            else
            {
                for (NodeId p : st.txn.participants)
                {
                    bool yes = true;
                    if (auto it = st.forced_votes.find(p);
                        it != st.forced_votes.end())
                    {
                        yes = it->second;
                    }
                    nodes_.at(p)->installParticipant(st.txn, yes);
                }
                statOf(st.txn.id).protocol_start = 0;
                nodes_.at(st.txn.coordinator)->startCoordinator(st.txn);
            }
        }
    }

    void
    primeBench(const BenchSpec& spec)
    {
        bench_ = true;
        wcfg_ = spec.workload;
        duration_ = spec.duration_us;
        max_txns_ = spec.max_txns_per_node;
        base_seed_ = spec.sim.seed;
        zipf_.emplace(wcfg_.rows_per_partition, wcfg_.theta);
        for (auto& n : nodes_)
        {
            n->clientNext();
        }
    }

    RunResult
    run()
    {
        sim_.run();
        RunResult r;
        r.trace = sim_.trace();
        for (auto& [id, st] : stats_)
        {
            r.txns.push_back(st);
        }
        r.slots = sim_.store().snapshot();
        r.illegal_transitions = sim_.store().illegalTransitions();
        r.symbolic_crash_fired = sim_.symbolicFired();
        return r;
    }

    // --- callbacks from nodes --------------------------------------------

    void
    onDecide(NodeId node, const TxnId& txn, Decision d)
    {
        auto key = std::make_pair(node, txn);
        auto it = decided_.find(key);
        if (it != decided_.end() && it->second == d)
        {
            return; // recovery re-derived the same outcome; not a new event
        }
        decided_[key] = d;
        TraceEvent e;
        e.kind = TraceKind::Decide;
        e.node = node;
        e.txn = txn;
        e.decision = d;
        sim_.addTrace(e);
    }

    void
    onDecisionReached(const TxnId& txn)
    {
        TxnStat& st = statOf(txn);
        if (!st.decision_stamped)
        {
            st.decision_stamped = true;
            st.decision_time = sim_.now();
        }
    }

    void
    onReply(NodeId node, const TxnId& txn, Decision d)
    {
        TxnStat& st = statOf(txn);
        if (st.replied)
        {
            return;
        }
        st.replied = true;
        st.committed = d == Decision::Commit;
        st.reply_time = sim_.now();
        if (!st.decision_stamped)
        {
            st.decision_stamped = true;
            st.decision_time = sim_.now();
        }
        TraceEvent e;
        e.kind = TraceKind::ReplyToCaller;
        e.node = node;
        e.txn = txn;
        e.decision = d;
        sim_.addTrace(e);
        if (bench_ && node == txn.coordinator)
        {
            nodes_.at(node)->clientNext();
        }
    }

    bool
    replied(const TxnId& txn) const
    {
        auto it = stats_.find(txn);
        return it != stats_.end() && it->second.replied;
    }

    // --- bookkeeping ------------------------------------------------------

    struct Joined
    {
        NodeId coordinator = 0;
        std::vector<NodeId> participants;
        bool as_coordinator = false;
        bool as_participant = false;
    };

    void
    noteJoined(NodeId node, const Transaction& txn, bool as_coord,
               bool as_part)
    {
        Joined& j = manifest_[node][txn.id];
        j.coordinator = txn.coordinator;
        j.participants = txn.participants;
        j.as_coordinator |= as_coord;
        j.as_participant |= as_part;
    }

    void
    noteJoined(NodeId node, const TxnId& id, NodeId coordinator,
               const std::vector<NodeId>& participants, bool as_coord,
               bool as_part)
    {
        Joined& j = manifest_[node][id];
        j.coordinator = coordinator;
        if (!participants.empty())
        {
            j.participants = participants;
        }
        j.as_coordinator |= as_coord;
        j.as_participant |= as_part;
    }

    const std::map<TxnId, Joined>&
    joinedAt(NodeId node)
    {
        return manifest_[node];
    }

    bool
    forcedVote(const TxnId& txn, NodeId p) const
    {
        auto it = forced_votes_.find(txn);
        if (it == forced_votes_.end())
        {
            return true;
        }
        auto v = it->second.find(p);
        return v == it->second.end() ? true : v->second;
    }

    TxnStat&
    newStat(const Transaction& txn)
    {
        TxnStat st;
        st.id = txn.id;
        st.start = sim_.now();
        if (txn.read_only)
        {
            st.cls = TxnClass::ReadOnly;
        }
        else if (txn.participants.size() == 1 &&
                 txn.participants[0] == txn.coordinator)
        {
            st.cls = TxnClass::SinglePartition;
        }
        else
        {
            st.cls = TxnClass::Distributed;
        }
        return stats_[txn.id] = st;
    }

    TxnStat&
    statOf(const TxnId& id)
    {
        return stats_.at(id);
    }

    // bench workload plumbing used by node clients
    bool bench_ = false;
    WorkloadConfig wcfg_;
    std::optional<ZipfianGenerator> zipf_;
    VirtualTime duration_ = 0;
    std::uint64_t max_txns_ = 0;
    std::uint64_t base_seed_ = 0;

  private:
    ProtocolConfig pcfg_;
    Sim sim_;
    std::uint32_t n_nodes_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::map<TxnId, TxnStat> stats_;
    std::map<std::pair<NodeId, TxnId>, Decision> decided_;
    std::map<NodeId, std::map<TxnId, Joined>> manifest_;
    std::map<TxnId, std::map<NodeId, bool>> forced_votes_;
};

// ---------------------------------------------------------------------
// Node implementation

inline RoleEnv
Node::makeEnv(const TxnId& txn, bool coordinator)
{
    std::uint64_t cookie = next_cookie_++;
    routes_[cookie] = Route{txn, coordinator};
    RoleEnv env;
    env.sim = &w_.sim();
    env.self = self_;
    env.cfg = &w_.pcfg();
    env.cookie = cookie;
    env.decide = [this](const TxnId& t, Decision d) {
        w_.onDecide(self_, t, d);
        completed_[t] = d;
        locks_.releaseAll(t);
    };
    env.reply = [this](const TxnId& t, Decision d) {
        w_.onReply(self_, t, d);
    };
    env.decision_reached = [this](const TxnId& t) {
        w_.onDecisionReached(t);
    };
    env.finish_quiet = [this](const TxnId& t) { locks_.releaseAll(t); };
    return env;
}

inline void
Node::installParticipant(const Transaction& txn, bool vote_yes)
{
    w_.noteJoined(self_, txn, false, true);
    if (w_.pcfg().kind == ProtocolKind::Cornus)
    {
        auto r = std::make_unique<CornusParticipant>(
            makeEnv(txn.id, false), txn.id, txn.coordinator, vote_yes);
        r->arm();
        c_part_[txn.id] = std::move(r);
    }
    else
    {
        auto r = std::make_unique<TwoPcParticipant>(
            makeEnv(txn.id, false), txn.id, txn.coordinator, vote_yes,
            /*ro_skip=*/false);
        r->arm();
        t_part_[txn.id] = std::move(r);
    }
}

inline void
Node::startCoordinator(const Transaction& txn)
{
    w_.noteJoined(self_, txn, true, false);
    if (w_.pcfg().kind == ProtocolKind::Cornus)
    {
        auto r = std::make_unique<CornusCoordinator>(makeEnv(txn.id, true),
                                                     txn);
        auto* p = r.get();
        c_coord_[txn.id] = std::move(r);
        p->start();
    }
    else
    {
        auto r =
            std::make_unique<TwoPcCoordinator>(makeEnv(txn.id, true), txn);
        auto* p = r.get();
        t_coord_[txn.id] = std::move(r);
        p->start();
    }
}

inline bool
Node::acquireLocal(const Transaction& t)
{
    auto it = t.accesses.find(self_);
    if (it == t.accesses.end())
    {
        return true;
    }
    for (const auto& a : it->second)
    {
        if (!locks_.acquire(t.id, a.key, a.mode))
        {
            return false;
        }
    }
    return true;
}

inline void
Node::beginTxn(const Transaction& txn)
{
    w_.noteJoined(self_, txn, true, false);
    if (!acquireLocal(txn))
    {
        locks_.releaseAll(txn.id);
        TxnStat& st = w_.statOf(txn.id);
        st.early_abort = true;
        st.protocol_start = w_.sim().now();
        w_.onDecide(self_, txn.id, Decision::Abort);
        w_.onReply(self_, txn.id, Decision::Abort);
        return;
    }
    ExecCtx ec;
    ec.txn = txn;
    for (NodeId p : txn.participants)
    {
        if (p == self_)
        {
            continue;
        }
        auto ait = txn.accesses.find(p);
        Message m;
        m.type = MsgType::AccessReq;
        m.txn = txn.id;
        m.from = self_;
        m.to = p;
        if (ait != txn.accesses.end())
        {
            m.accesses = ait->second;
        }
        w_.sim().send(m);
        ec.pending.insert(p);
    }
    if (ec.pending.empty())
    {
        execs_[txn.id] = std::move(ec);
        execDone(txn.id);
        return;
    }
    ec.timer = w_.sim().setTimer(self_, w_.pcfg().timeouts.vote_req_wait,
                                 makeTag(0, Purpose::ExecTimeout));
    exec_timer_txn_ = txn.id;
    execs_[txn.id] = std::move(ec);
}

inline void
Node::execDone(const TxnId& txn)
{
    auto it = execs_.find(txn);
    assert(it != execs_.end());
    const Transaction& t = it->second.txn;
    TxnStat& st = w_.statOf(txn);
    st.protocol_start = w_.sim().now();

    if (t.read_only && w_.pcfg().ro_known_in_advance)
    {
        commitWithoutProtocol(txn);
        return;
    }
    if (t.participants.size() == 1 && t.participants[0] == self_)
    {
        // Single-partition: no votes to gather; one durable decision
        // record in our own log and we are done.
        w_.onDecisionReached(txn);
        w_.sim().storageOp(self_, StorageOpKind::Log, SlotKey{self_, txn},
                           RecordType::Commit,
                           makeTag(0, Purpose::DecisionLogOp));
        return;
    }
    startCoordinator(t);
}

inline void
Node::commitWithoutProtocol(const TxnId& txn)
{
    w_.onDecisionReached(txn);
    w_.onDecide(self_, txn, Decision::Commit);
    completed_[txn] = Decision::Commit;
    locks_.releaseAll(txn);
    w_.onReply(self_, txn, Decision::Commit);
    for (NodeId p : execs_[txn].granted_remote)
    {
        Message m;
        m.type = MsgType::ReleaseReq;
        m.txn = txn;
        m.from = self_;
        m.to = p;
        w_.sim().send(m);
    }
}

inline void
Node::earlyAbort(const TxnId& txn)
{
    auto it = execs_.find(txn);
    if (it == execs_.end())
    {
        return;
    }
    w_.sim().cancelTimer(it->second.timer);
    locks_.releaseAll(txn);
    for (NodeId p : it->second.granted_remote)
    {
        Message m;
        m.type = MsgType::ReleaseReq;
        m.txn = txn;
        m.from = self_;
        m.to = p;
        w_.sim().send(m);
    }
    TxnStat& st = w_.statOf(txn);
    st.early_abort = true;
    if (st.protocol_start == 0)
    {
        st.protocol_start = w_.sim().now();
    }
    w_.onDecide(self_, txn, Decision::Abort);
    w_.onReply(self_, txn, Decision::Abort);
}

inline void
Node::ensureParticipant(const TxnId& txn, NodeId coordinator)
{
    bool isCornus = w_.pcfg().kind == ProtocolKind::Cornus;
    if ((isCornus && c_part_.count(txn)) || (!isCornus && t_part_.count(txn)))
    {
        return;
    }
    bool vote = w_.forcedVote(txn, self_);
    bool roSkip = false;
    if (!w_.pcfg().ro_known_in_advance)
    {
        if (auto it = part_ro_.find(txn); it != part_ro_.end())
        {
            roSkip = it->second;
        }
        else if (auto ex = execs_.find(txn); ex != execs_.end())
        {
            // Co-located coordinator acting as its own participant.
            auto ac = ex->second.txn.accesses.find(self_);
            roSkip = ac != ex->second.txn.accesses.end() &&
                     !ac->second.empty() &&
                     participantReadOnly(ex->second.txn, self_);
        }
    }
    w_.noteJoined(self_, txn, coordinator, {}, false, true);
    if (isCornus)
    {
        c_part_[txn] = std::make_unique<CornusParticipant>(
            makeEnv(txn, false), txn, coordinator, vote);
    }
    else
    {
        t_part_[txn] = std::make_unique<TwoPcParticipant>(
            makeEnv(txn, false), txn, coordinator, vote, roSkip);
    }
}

inline void
Node::onMessage(const Message& m)
{
    bool isCornus = w_.pcfg().kind == ProtocolKind::Cornus;
    switch (m.type)
    {
    case MsgType::VoteReq:
    {
        ensureParticipant(m.txn, m.from);
        w_.noteJoined(self_, m.txn, m.from, m.participants, false, true);
        if (isCornus)
        {
            c_part_.at(m.txn)->onVoteReq(m);
        }
        else
        {
            t_part_.at(m.txn)->onVoteReq(m);
        }
        return;
    }
    case MsgType::VoteResp:
    {
        if (isCornus)
        {
            if (auto it = c_coord_.find(m.txn); it != c_coord_.end())
            {
                it->second->onVoteResp(m);
            }
        }
        else if (auto it = t_coord_.find(m.txn); it != t_coord_.end())
        {
            it->second->onVoteResp(m);
        }
        return;
    }
    case MsgType::DecisionMsg:
    {
        if (isCornus)
        {
            if (auto it = c_part_.find(m.txn); it != c_part_.end())
            {
                it->second->onDecision(m);
            }
        }
        else if (auto it = t_part_.find(m.txn); it != t_part_.end())
        {
            it->second->onDecision(m);
        }
        return;
    }
    case MsgType::DecisionReq:
        answerDecisionReq(m);
        return;
    case MsgType::DecisionResp:
    {
        if (!isCornus)
        {
            if (auto it = t_part_.find(m.txn); it != t_part_.end())
            {
                it->second->onDecisionResp(m);
            }
        }
        return;
    }
    case MsgType::AccessReq:
    {
        bool ok = true;
        for (const auto& a : m.accesses)
        {
            if (!locks_.acquire(m.txn, a.key, a.mode))
            {
                ok = false;
                break;
            }
        }
        Message resp;
        resp.type = MsgType::AccessResp;
        resp.txn = m.txn;
        resp.from = self_;
        resp.to = m.from;
        resp.granted = ok;
        if (ok)
        {
            bool allReads = true;
            for (const auto& a : m.accesses)
            {
                allReads = allReads && a.mode == AccessMode::Read;
            }
            part_ro_[m.txn] = allReads && !m.accesses.empty();
            ensureParticipant(m.txn, m.from);
            if (isCornus)
            {
                c_part_.at(m.txn)->arm();
            }
            else
            {
                t_part_.at(m.txn)->arm();
            }
        }
        else
        {
            locks_.releaseAll(m.txn); // NO_WAIT: drop our partial grants
        }
        w_.sim().send(resp);
        return;
    }
    case MsgType::AccessResp:
    {
        auto it = execs_.find(m.txn);
        if (it == execs_.end())
        {
            return;
        }
        if (!m.granted)
        {
            earlyAbort(m.txn);
            return;
        }
        it->second.pending.erase(m.from);
        it->second.granted_remote.push_back(m.from);
        if (it->second.pending.empty())
        {
            w_.sim().cancelTimer(it->second.timer);
            execDone(m.txn);
        }
        return;
    }
    case MsgType::ReleaseReq:
    {
        releaseTxn(m.txn);
        return;
    }
    }
}

inline void
Node::releaseTxn(const TxnId& txn)
{
    locks_.releaseAll(txn);
    if (auto it = c_part_.find(txn); it != c_part_.end())
    {
        it->second->release();
    }
    if (auto it = t_part_.find(txn); it != t_part_.end())
    {
        it->second->release();
    }
}

inline void
Node::answerDecisionReq(const Message& m)
{
    PeerKnowledge k = PeerKnowledge::Uncertain;
    if (recovering_)
    {
        // Still reading our own log; answering now could contradict it.
        k = PeerKnowledge::Uncertain;
    }
    else if (auto it = completed_.find(m.txn); it != completed_.end())
    {
        k = it->second == Decision::Commit ? PeerKnowledge::Commit
                                           : PeerKnowledge::Abort;
    }
    else if (self_ == m.txn.coordinator)
    {
        bool activeUndecided = false;
        if (auto it = t_coord_.find(m.txn); it != t_coord_.end())
        {
            k = it->second->knowledge();
            activeUndecided = k == PeerKnowledge::Uncertain;
        }
        else if (auto it2 = c_coord_.find(m.txn); it2 != c_coord_.end())
        {
            activeUndecided = !it2->second->done();
        }
        if (!activeUndecided && k == PeerKnowledge::Uncertain)
        {
            // No trace of the transaction: presumed abort.
            k = PeerKnowledge::Abort;
        }
    }
    else if (auto it = t_part_.find(m.txn); it != t_part_.end())
    {
        k = it->second->knowledge();
    }
    Message resp;
    resp.type = MsgType::DecisionResp;
    resp.txn = m.txn;
    resp.from = self_;
    resp.to = m.from;
    resp.knowledge = k;
    w_.sim().send(resp);
}

inline void
Node::onTimer(std::uint64_t tag)
{
    Purpose p = tagPurpose(tag);
    std::uint64_t cookie = tagCookie(tag);
    if (cookie == 0)
    {
        if (p == Purpose::ExecTimeout)
        {
            // Some participant never answered the access request.
            if (exec_timer_txn_ && execs_.count(*exec_timer_txn_) &&
                !execs_[*exec_timer_txn_].pending.empty())
            {
                earlyAbort(*exec_timer_txn_);
            }
        }
        else if (p == Purpose::ClientNext)
        {
            clientNext();
        }
        return;
    }
    routeToRole(cookie, p, nullptr);
}

inline void
Node::onStorageResult(const StorageOpResult& r)
{
    Purpose p = tagPurpose(r.tag);
    std::uint64_t cookie = tagCookie(r.tag);
    if (cookie == 0)
    {
        if (p == Purpose::RecoveryRead)
        {
            handleRecoveryRead(r);
        }
        else if (p == Purpose::DecisionLogOp)
        {
            // Single-partition local commit became durable.
            if (r.result.status == StorageStatus::Ok)
            {
                w_.onDecide(self_, r.key.txn, Decision::Commit);
                completed_[r.key.txn] = Decision::Commit;
                locks_.releaseAll(r.key.txn);
                w_.onReply(self_, r.key.txn, Decision::Commit);
            }
            else
            {
                w_.sim().storageOp(self_, StorageOpKind::Log, r.key,
                                   RecordType::Commit,
                                   makeTag(0, Purpose::DecisionLogOp));
            }
        }
        return;
    }
    if (p == Purpose::AsyncLogOp)
    {
        return; // fire-and-forget
    }
    routeToRole(cookie, p, &r);
}

inline void
Node::routeToRole(std::uint64_t cookie, Purpose p, const StorageOpResult* sr)
{
    auto rit = routes_.find(cookie);
    if (rit == routes_.end())
    {
        return; // role was wiped by a crash or released
    }
    const Route& route = rit->second;
    bool isCornus = w_.pcfg().kind == ProtocolKind::Cornus;
    if (route.coordinator)
    {
        if (isCornus)
        {
            auto it = c_coord_.find(route.txn);
            if (it == c_coord_.end())
            {
                return;
            }
            sr ? it->second->onStorageResult(*sr) : it->second->onTimer(p);
        }
        else
        {
            auto it = t_coord_.find(route.txn);
            if (it == t_coord_.end())
            {
                return;
            }
            sr ? it->second->onStorageResult(*sr) : it->second->onTimer(p);
        }
    }
    else
    {
        if (isCornus)
        {
            auto it = c_part_.find(route.txn);
            if (it == c_part_.end())
            {
                return;
            }
            sr ? it->second->onStorageResult(*sr) : it->second->onTimer(p);
        }
        else
        {
            auto it = t_part_.find(route.txn);
            if (it == t_part_.end())
            {
                return;
            }
            sr ? it->second->onStorageResult(*sr) : it->second->onTimer(p);
        }
    }
}

inline void
Node::onRecover()
{
    c_coord_.clear();
    t_coord_.clear();
    c_part_.clear();
    t_part_.clear();
    execs_.clear();
    completed_.clear();
    part_ro_.clear();
    routes_.clear();
    locks_.clear();
    exec_timer_txn_.reset();
    client_active_ = false;

    recovering_ = true;
    recovery_reads_ = 0;
    recovery_read_attempts_.clear();
    for (const auto& [txn, j] : w_.joinedAt(self_))
    {
        bool needRead = j.as_participant ||
                        (j.as_coordinator &&
                         w_.pcfg().kind == ProtocolKind::TwoPC);
        if (needRead)
        {
            ++recovery_reads_;
            w_.sim().storageOp(self_, StorageOpKind::Read,
                               SlotKey{self_, txn}, RecordType::Abort,
                               makeTag(0, Purpose::RecoveryRead));
        }
    }
    if (recovery_reads_ == 0)
    {
        recovering_ = false;
    }
}

inline void
Node::handleRecoveryRead(const StorageOpResult& r)
{
    const TxnId& txn = r.key.txn;
    if (r.result.status == StorageStatus::Unavailable)
    {
        if (++recovery_read_attempts_[txn] < kMaxTerminationRounds)
        {
            w_.sim().storageOp(self_, StorageOpKind::Read, r.key,
                               RecordType::Abort,
                               makeTag(0, Purpose::RecoveryRead));
            return;
        }
        // Storage is gone; give up on this txn until everything is
        // unblocked externally anyway.
        if (--recovery_reads_ == 0)
        {
            recovering_ = false;
        }
        return;
    }
    auto joined = w_.joinedAt(self_);
    auto jit = joined.find(txn);
    const World::Joined j = jit == joined.end() ? World::Joined{} : jit->second;
    LogState state = r.result.state;

    if (j.as_coordinator && w_.pcfg().kind == ProtocolKind::TwoPC)
    {
        // The decision record (or its absence: presumed abort) is the
        // ground truth; re-announce it.
        Decision d = state == LogState::Committed ? Decision::Commit
                                                  : Decision::Abort;
        w_.onDecide(self_, txn, d);
        completed_[txn] = d;
        if (!w_.replied(txn))
        {
            w_.onReply(self_, txn, d);
        }
        for (NodeId p : j.participants)
        {
            Message m;
            m.type = MsgType::DecisionMsg;
            m.txn = txn;
            m.from = self_;
            m.to = p;
            m.decision = d;
            w_.sim().send(m);
        }
    }
    else if (j.as_participant)
    {
        switch (state)
        {
        case LogState::None:
            // Never voted: abort, and say so in our slot.
            w_.sim().storageOp(self_, StorageOpKind::Log, r.key,
                               RecordType::Abort,
                               makeTag(0, Purpose::AsyncLogOp));
            w_.onDecide(self_, txn, Decision::Abort);
            completed_[txn] = Decision::Abort;
            break;
        case LogState::Aborted:
            w_.onDecide(self_, txn, Decision::Abort);
            completed_[txn] = Decision::Abort;
            break;
        case LogState::Committed:
            w_.onDecide(self_, txn, Decision::Commit);
            completed_[txn] = Decision::Commit;
            break;
        case LogState::VoteYes:
        {
            // In doubt: resolve through the termination path.
            ensureParticipant(txn, j.coordinator);
            if (w_.pcfg().kind == ProtocolKind::Cornus)
            {
                c_part_.at(txn)->recoverInDoubt(j.participants);
            }
            else
            {
                t_part_.at(txn)->recoverInDoubt(j.participants);
            }
            break;
        }
        }
    }
    if (--recovery_reads_ == 0)
    {
        recovering_ = false;
    }
}

inline void
Node::onStorageUp()
{
    for (auto& [txn, role] : c_coord_)
    {
        role->onStorageUp();
    }
    for (auto& [txn, role] : c_part_)
    {
        role->onStorageUp();
    }
    for (auto& [txn, role] : t_coord_)
    {
        role->onStorageUp();
    }
}

inline void
Node::clientNext()
{
    if (!w_.bench_)
    {
        return;
    }
    if (!client_active_)
    {
        client_rng_.seed(w_.base_seed_ ^
                         (0x9E3779B97F4A7C15ull * (self_ + 1)));
        client_active_ = true;
    }
    if (w_.sim().now() >= w_.duration_ ||
        (w_.max_txns_ && client_seq_ >= w_.max_txns_))
    {
        return;
    }
    ++client_seq_;
    Transaction t =
        makeTransaction(w_.wcfg_, *w_.zipf_, client_rng_,
                        TxnId{self_, client_seq_}, self_, w_.nodeCount());
    w_.newStat(t);
    beginTxn(t);
}

// ---------------------------------------------------------------------

inline RunResult
run_scenario(const ScenarioSpec& spec)
{
    World w(spec.n_nodes, spec.protocol, spec.sim, spec.faults);
    w.primeScenario(spec);
    return w.run();
}

inline RunResult
run_bench(const BenchSpec& spec)
{
    World w(spec.n_nodes, spec.protocol, spec.sim, spec.faults);
    w.primeBench(spec);
    return w.run();
}

} // namespace cornus
