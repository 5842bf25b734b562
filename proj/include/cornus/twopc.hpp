#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Conventional presumed-abort two-phase commit over the same log-slot
// storage, as the comparison baseline. The coordinator's own decision
// record is the ground truth: a commit is not a commit until that record
// is durable, which puts one extra storage write on the commit critical
// path and makes in-doubt participants block whenever the coordinator is
// down and no peer learned the outcome.

#include <cassert>
#include <map>
#include <optional>
#include <vector>

#include "cornus/core.hpp"
#include "cornus/message.hpp"
#include "cornus/protocol.hpp"
#include "cornus/sim.hpp"

namespace cornus
{

class TwoPcCoordinator
{
  public:
    TwoPcCoordinator(const RoleEnv& env, Transaction txn)
        : env_(env), txn_(std::move(txn))
    {
        for (NodeId p : txn_.participants)
        {
            // A participant with a known all-read access set skips vote
            // logging and drops out at vote time; it casts no real vote.
            bool voter = true;
            if (!env_.cfg->ro_known_in_advance)
            {
                auto it = txn_.accesses.find(p);
                voter = it == txn_.accesses.end() ||
                        !participantReadOnlyAccesses(it->second);
            }
            if (voter)
            {
                voting_.push_back(p);
            }
        }
    }

    void
    start()
    {
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::CoordBeforeStart))
        {
            return;
        }
        std::uint32_t k = 0;
        for (NodeId p : txn_.participants)
        {
            Message m;
            m.type = MsgType::VoteReq;
            m.txn = txn_.id;
            m.from = env_.self;
            m.to = p;
            m.participants = txn_.participants;
            env_.sim->send(m);
            ++k;
            if (env_.sim->hitCrashPoint(
                    env_.self, CrashPointKind::CoordAfterSendVoteReq, k))
            {
                return;
            }
        }
        st_ = St::WaitVotes;
        vote_timer_ = env_.sim->setTimer(
            env_.self, env_.cfg->timeouts.vote_collect_wait,
            makeTag(env_.cookie, Purpose::VoteCollectTimeout));
    }

    void
    onVoteResp(const Message& m)
    {
        if (st_ != St::WaitVotes)
        {
            return;
        }
        if (!m.vote_yes)
        {
            abortPath();
            return;
        }
        votes_[m.from] = true;
        if (votes_.size() != txn_.participants.size())
        {
            return;
        }
        env_.sim->cancelTimer(vote_timer_);
        env_.decision_reached(txn_.id);
        if (voting_.empty())
        {
            // Everyone dropped out read-only: nothing to make durable and
            // nobody waiting for a decision message.
            st_ = St::Done;
            env_.decide(txn_.id, Decision::Commit);
            env_.reply(txn_.id, Decision::Commit);
            return;
        }
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::CoordBeforeDecisionLog))
        {
            return;
        }
        st_ = St::LoggingDecision;
        issueDecisionLog();
    }

    void
    onTimer(Purpose p)
    {
        if (p == Purpose::VoteCollectTimeout && st_ == St::WaitVotes)
        {
            // Missing votes: abort unilaterally, no termination protocol
            // on the coordinator side.
            abortPath();
        }
    }

    void
    onStorageResult(const StorageOpResult& r)
    {
        if (st_ != St::LoggingDecision ||
            tagPurpose(r.tag) != Purpose::DecisionLogOp)
        {
            return;
        }
        if (r.result.status == StorageStatus::Unavailable)
        {
            if (++log_attempts_ < kMaxTerminationRounds)
            {
                issueDecisionLog();
            }
            else
            {
                parked_ = true; // withhold the outcome until storage is back
            }
            return;
        }
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::CoordAfterDecisionLog))
        {
            return;
        }
        finish(Decision::Commit);
    }

    void
    onStorageUp()
    {
        if (st_ == St::LoggingDecision && parked_)
        {
            parked_ = false;
            issueDecisionLog();
        }
    }

    // A blocked participant is asking; answer only once we actually know.
    PeerKnowledge
    knowledge() const
    {
        if (st_ == St::Done && decision_)
        {
            return *decision_ == Decision::Commit ? PeerKnowledge::Commit
                                                  : PeerKnowledge::Abort;
        }
        return PeerKnowledge::Uncertain;
    }

    bool
    done() const
    {
        return st_ == St::Done;
    }

  private:
    void
    issueDecisionLog()
    {
        env_.sim->storageOp(env_.self, StorageOpKind::Log,
                            SlotKey{env_.self, txn_.id}, RecordType::Commit,
                            makeTag(env_.cookie, Purpose::DecisionLogOp));
    }

    void
    abortPath()
    {
        env_.sim->cancelTimer(vote_timer_);
        env_.decision_reached(txn_.id);
        // Presumed abort: reply right away; the abort record is advisory
        // and rides along asynchronously.
        env_.sim->storageOp(env_.self, StorageOpKind::Log,
                            SlotKey{env_.self, txn_.id}, RecordType::Abort,
                            makeTag(env_.cookie, Purpose::AsyncLogOp));
        finish(Decision::Abort);
    }

    void
    finish(Decision d)
    {
        st_ = St::Done;
        decision_ = d;
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::CoordAfterDecide))
        {
            return;
        }
        env_.decide(txn_.id, d);
        env_.reply(txn_.id, d);
        std::uint32_t k = 0;
        for (NodeId p : txn_.participants)
        {
            Message m;
            m.type = MsgType::DecisionMsg;
            m.txn = txn_.id;
            m.from = env_.self;
            m.to = p;
            m.decision = d;
            env_.sim->send(m);
            ++k;
            if (env_.sim->hitCrashPoint(
                    env_.self, CrashPointKind::CoordAfterSendDecision, k))
            {
                return;
            }
        }
    }

    static bool
    participantReadOnlyAccesses(const std::vector<Access>& accs)
    {
        for (const auto& a : accs)
        {
            if (a.mode == AccessMode::Write)
            {
                return false;
            }
        }
        return !accs.empty();
    }

    enum class St : std::uint8_t
    {
        Init,
        WaitVotes,
        LoggingDecision,
        Done,
    };

    RoleEnv env_;
    Transaction txn_;
    std::vector<NodeId> voting_;
    St st_ = St::Init;
    std::map<NodeId, bool> votes_;
    std::optional<Decision> decision_;
    int log_attempts_ = 0;
    bool parked_ = false;
    Sim::TimerHandle vote_timer_{};
};

class TwoPcParticipant
{
  public:
    TwoPcParticipant(const RoleEnv& env, const TxnId& txn, NodeId coordinator,
                     bool vote_yes, bool ro_skip)
        : env_(env), txn_(txn), coordinator_(coordinator), vote_yes_(vote_yes),
          ro_skip_(ro_skip)
    {
    }

    void
    arm()
    {
        vote_req_timer_ = env_.sim->setTimer(
            env_.self, env_.cfg->timeouts.vote_req_wait,
            makeTag(env_.cookie, Purpose::VoteReqTimeout));
    }

    void
    recoverInDoubt(const std::vector<NodeId>& participants)
    {
        participants_ = participants;
        startQuerying();
    }

    void
    onVoteReq(const Message& m)
    {
        if (st_ != St::WaitVoteReq)
        {
            return;
        }
        env_.sim->cancelTimer(vote_req_timer_);
        participants_ = m.participants;
        if (env_.sim->hitCrashPoint(
                env_.self, CrashPointKind::PartAfterVoteReqBeforeLog))
        {
            return;
        }
        if (ro_skip_ && vote_yes_)
        {
            // Read-only: vote yes without logging, release everything, and
            // forget the transaction; the outcome cannot affect us.
            sendVoteResp(true);
            st_ = St::Done;
            env_.finish_quiet(txn_);
            return;
        }
        if (!vote_yes_)
        {
            env_.sim->storageOp(env_.self, StorageOpKind::Log,
                                SlotKey{env_.self, txn_}, RecordType::Abort,
                                makeTag(env_.cookie, Purpose::AsyncLogOp));
            sendVoteResp(false);
            st_ = St::Done;
            env_.decide(txn_, Decision::Abort);
            return;
        }
        st_ = St::LoggingVote;
        issueVoteLog();
    }

    void
    onDecision(const Message& m)
    {
        // The coordinator's word is final; accept it even while our own
        // vote write is still in flight (fast aborts overtake it).
        if (st_ != St::WaitDecision && st_ != St::Terminating &&
            st_ != St::LoggingVote)
        {
            return;
        }
        resolve(m.decision);
    }

    void
    onDecisionResp(const Message& m)
    {
        if (st_ != St::Terminating)
        {
            return;
        }
        if (m.knowledge == PeerKnowledge::Commit)
        {
            resolve(Decision::Commit);
        }
        else if (m.knowledge == PeerKnowledge::Abort)
        {
            resolve(Decision::Abort);
        }
    }

    void
    onTimer(Purpose p)
    {
        switch (p)
        {
        case Purpose::VoteReqTimeout:
            if (st_ == St::WaitVoteReq)
            {
                // Presumed abort: nothing logged means aborted; still note
                // it in our slot for forensics and recovery reads.
                env_.sim->storageOp(env_.self, StorageOpKind::Log,
                                    SlotKey{env_.self, txn_},
                                    RecordType::Abort,
                                    makeTag(env_.cookie, Purpose::AsyncLogOp));
                st_ = St::Done;
                env_.decide(txn_, Decision::Abort);
            }
            break;
        case Purpose::DecisionTimeout:
            if (st_ == St::WaitDecision)
            {
                startQuerying();
            }
            break;
        case Purpose::TermRound:
            if (st_ == St::Terminating && !parked_)
            {
                if (rounds_ >= kMaxTerminationRounds)
                {
                    // Park: no new information is coming from retries. We
                    // stay receptive to a late DECISION or a recovered
                    // coordinator's rebroadcast.
                    parked_ = true;
                }
                else
                {
                    queryRound();
                }
            }
            break;
        default:
            break;
        }
    }

    void
    onStorageResult(const StorageOpResult& r)
    {
        if (tagPurpose(r.tag) != Purpose::VoteLogOp || st_ != St::LoggingVote)
        {
            return;
        }
        if (r.result.status == StorageStatus::Unavailable)
        {
            if (++vote_log_attempts_ < kMaxTerminationRounds)
            {
                issueVoteLog();
            }
            else
            {
                sendVoteResp(false);
                st_ = St::Done;
                env_.decide(txn_, Decision::Abort);
            }
            return;
        }
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::PartAfterLogBeforeReply))
        {
            return;
        }
        sendVoteResp(true);
        st_ = St::WaitDecision;
        decision_timer_ = env_.sim->setTimer(
            env_.self, env_.cfg->timeouts.decision_wait,
            makeTag(env_.cookie, Purpose::DecisionTimeout));
        env_.sim->hitCrashPoint(env_.self, CrashPointKind::PartAfterReply);
    }

    PeerKnowledge
    knowledge() const
    {
        if (st_ == St::Done && outcome_)
        {
            return *outcome_ == Decision::Commit ? PeerKnowledge::Commit
                                                 : PeerKnowledge::Abort;
        }
        return PeerKnowledge::Uncertain;
    }

    bool
    done() const
    {
        return st_ == St::Done;
    }

    bool
    parked() const
    {
        return parked_;
    }

    void
    release()
    {
        if (st_ == St::WaitVoteReq)
        {
            env_.sim->cancelTimer(vote_req_timer_);
            st_ = St::Done;
        }
    }

  private:
    void
    issueVoteLog()
    {
        env_.sim->storageOp(env_.self, StorageOpKind::Log,
                            SlotKey{env_.self, txn_}, RecordType::VoteYes,
                            makeTag(env_.cookie, Purpose::VoteLogOp));
    }

    void
    startQuerying()
    {
        st_ = St::Terminating;
        queryRound();
    }

    void
    queryRound()
    {
        ++rounds_;
        Message m;
        m.type = MsgType::DecisionReq;
        m.txn = txn_;
        m.from = env_.self;
        m.to = coordinator_;
        env_.sim->send(m);
        if (env_.cfg->termination == TerminationMode::Cooperative)
        {
            for (NodeId p : participants_)
            {
                if (p != env_.self && p != coordinator_)
                {
                    Message q = m;
                    q.to = p;
                    env_.sim->send(q);
                }
            }
        }
        round_timer_ = env_.sim->setTimer(
            env_.self, env_.cfg->timeouts.termination_wait,
            makeTag(env_.cookie, Purpose::TermRound));
    }

    void
    resolve(Decision d)
    {
        env_.sim->cancelTimer(decision_timer_);
        env_.sim->cancelTimer(round_timer_);
        st_ = St::Done;
        outcome_ = d;
        env_.sim->storageOp(env_.self, StorageOpKind::Log,
                            SlotKey{env_.self, txn_}, decision_record(d),
                            makeTag(env_.cookie, Purpose::AsyncLogOp));
        env_.decide(txn_, d);
    }

    void
    sendVoteResp(bool yes)
    {
        Message m;
        m.type = MsgType::VoteResp;
        m.txn = txn_;
        m.from = env_.self;
        m.to = coordinator_;
        m.vote_yes = yes;
        env_.sim->send(m);
    }

    enum class St : std::uint8_t
    {
        WaitVoteReq,
        LoggingVote,
        WaitDecision,
        Terminating,
        Done,
    };

    RoleEnv env_;
    TxnId txn_;
    NodeId coordinator_ = 0;
    bool vote_yes_ = true;
    bool ro_skip_ = false;
    std::vector<NodeId> participants_;
    St st_ = St::WaitVoteReq;
    std::optional<Decision> outcome_;
    int rounds_ = 0;
    int vote_log_attempts_ = 0;
    bool parked_ = false;
    Sim::TimerHandle vote_req_timer_{};
    Sim::TimerHandle decision_timer_{};
    Sim::TimerHandle round_timer_{};
};

} // namespace cornus
