#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// One-phase-commit-latency atomic commit over write-once log slots. A
// transaction commits exactly when every participant's slot holds
// VOTE_YES; the coordinator never writes a decision record. Any node that
// stops hearing from the others can force the outcome by conditionally
// writing ABORT into the silent participants' slots: either the write
// lands (aborting the transaction) or the slot already holds a vote that
// pins the outcome.

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

// One run of the termination protocol: conditionally abort every target
// slot, read the resulting states, and derive the decision. Retries whole
// rounds while storage is unreachable, parking after kMaxTerminationRounds
// until the host reports storage is back. With storage reachable a single
// round always resolves, because every write-once probe returns a definite
// state.
class TerminationEngine
{
  public:
    TerminationEngine(const RoleEnv& env, const TxnId& txn,
                      std::vector<NodeId> targets)
        : env_(env), txn_(txn), targets_(std::move(targets))
    {
    }

    std::optional<Decision>
    start()
    {
        active_ = true;
        if (targets_.empty())
        {
            // Nothing to probe: the caller's own VOTE_YES is the entire
            // vote set, so the outcome is already fixed.
            active_ = false;
            return Decision::Commit;
        }
        issueRound();
        return std::nullopt;
    }

    std::optional<Decision>
    onStorageResult(const StorageOpResult& r)
    {
        if (!active_ || tagPurpose(r.tag) != Purpose::TermOp)
        {
            return std::nullopt;
        }
        if (r.result.status == StorageStatus::Unavailable)
        {
            return std::nullopt; // the round timer decides what happens next
        }
        states_[r.key.log] = r.result.state;
        return evaluate();
    }

    std::optional<Decision>
    onRoundTimer()
    {
        if (!active_ || parked_)
        {
            return std::nullopt;
        }
        if (auto d = evaluate())
        {
            return d;
        }
        if (env_.sim->storageDown() && rounds_ >= kMaxTerminationRounds)
        {
            parked_ = true;
            return std::nullopt;
        }
        issueRound();
        return std::nullopt;
    }

    void
    onStorageUp()
    {
        if (active_ && parked_)
        {
            parked_ = false;
            issueRound();
        }
    }

    bool
    active() const
    {
        return active_;
    }

    bool
    parked() const
    {
        return parked_;
    }

    void
    stop()
    {
        active_ = false;
        if (timer_.id)
        {
            env_.sim->cancelTimer(timer_);
        }
    }

  private:
    void
    issueRound()
    {
        ++rounds_;
        StorageOpKind op = env_.cfg->mutate_overwrite_termination
                               ? StorageOpKind::Overwrite
                               : StorageOpKind::LogOnce;
        for (NodeId t : targets_)
        {
            env_.sim->storageOp(env_.self, op, SlotKey{t, txn_},
                                RecordType::Abort,
                                makeTag(env_.cookie, Purpose::TermOp));
        }
        timer_ = env_.sim->setTimer(env_.self,
                                    env_.cfg->timeouts.termination_wait,
                                    makeTag(env_.cookie, Purpose::TermRound));
    }

    std::optional<Decision>
    evaluate()
    {
        std::size_t yes = 0;
        for (NodeId t : targets_)
        {
            auto it = states_.find(t);
            if (it == states_.end())
            {
                continue;
            }
            switch (it->second)
            {
            case LogState::Aborted:
                return finish(Decision::Abort);
            case LogState::Committed:
                return finish(Decision::Commit);
            case LogState::VoteYes:
                ++yes;
                break;
            case LogState::None:
                // A write-once probe never reports an empty slot: it fills
                // it. Treat as missing and let the round retry.
                break;
            }
        }
        if (yes == targets_.size())
        {
            return finish(Decision::Commit);
        }
        return std::nullopt;
    }

    std::optional<Decision>
    finish(Decision d)
    {
        stop();
        return d;
    }

    RoleEnv env_;
    TxnId txn_;
    std::vector<NodeId> targets_;
    std::map<NodeId, LogState> states_;
    int rounds_ = 0;
    bool active_ = false;
    bool parked_ = false;
    Sim::TimerHandle timer_{};
};

class CornusCoordinator
{
  public:
    CornusCoordinator(const RoleEnv& env, Transaction txn)
        : env_(env), txn_(std::move(txn))
    {
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
            // One no is enough; don't wait for stragglers.
            finish(Decision::Abort);
            return;
        }
        votes_[m.from] = true;
        if (votes_.size() == txn_.participants.size())
        {
            finish(Decision::Commit);
        }
    }

    void
    onTimer(Purpose p)
    {
        if (p == Purpose::VoteCollectTimeout && st_ == St::WaitVotes)
        {
            st_ = St::Terminating;
            // The coordinator is not a voting participant of its own
            // accord; it probes every participant slot.
            term_.emplace(env_, txn_.id, txn_.participants);
            if (auto d = term_->start())
            {
                finish(*d);
            }
        }
        else if (p == Purpose::TermRound && st_ == St::Terminating)
        {
            if (auto d = term_->onRoundTimer())
            {
                finish(*d);
            }
        }
    }

    void
    onStorageResult(const StorageOpResult& r)
    {
        if (st_ == St::Terminating && term_)
        {
            if (auto d = term_->onStorageResult(r))
            {
                finish(*d);
            }
        }
    }

    void
    onStorageUp()
    {
        if (st_ == St::Terminating && term_)
        {
            term_->onStorageUp();
        }
    }

    bool
    done() const
    {
        return st_ == St::Done;
    }

  private:
    void
    finish(Decision d)
    {
        env_.sim->cancelTimer(vote_timer_);
        if (term_)
        {
            term_->stop();
        }
        st_ = St::Done;
        env_.decision_reached(txn_.id);
        if (env_.sim->hitCrashPoint(env_.self,
                                    CrashPointKind::CoordAfterDecide))
        {
            return;
        }
        env_.decide(txn_.id, d);
        env_.reply(txn_.id, d);
        // No decision record is written anywhere on this path: the
        // broadcast below is informational, and the participants' slots
        // already pin the outcome.
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

    enum class St : std::uint8_t
    {
        Init,
        WaitVotes,
        Terminating,
        Done,
    };

    RoleEnv env_;
    Transaction txn_;
    St st_ = St::Init;
    std::map<NodeId, bool> votes_;
    std::optional<TerminationEngine> term_;
    Sim::TimerHandle vote_timer_{};
};

class CornusParticipant
{
  public:
    CornusParticipant(const RoleEnv& env, const TxnId& txn, NodeId coordinator,
                      bool vote_yes)
        : env_(env), txn_(txn), coordinator_(coordinator), vote_yes_(vote_yes)
    {
    }

    // Called when the participant starts holding resources for the txn
    // (lock grant or scenario installation): from here on, a missing
    // VOTE_REQ must not leave it stuck.
    void
    arm()
    {
        vote_req_timer_ = env_.sim->setTimer(
            env_.self, env_.cfg->timeouts.vote_req_wait,
            makeTag(env_.cookie, Purpose::VoteReqTimeout));
    }

    // Recovery path: the slot already holds our VOTE_YES; resolve through
    // the termination protocol.
    void
    recoverInDoubt(const std::vector<NodeId>& participants)
    {
        participants_ = participants;
        startTermination();
    }

    void
    onVoteReq(const Message& m)
    {
        if (st_ != St::WaitVoteReq)
        {
            return; // late or duplicate VOTE_REQ; our abort already stands
        }
        env_.sim->cancelTimer(vote_req_timer_);
        participants_ = m.participants;
        if (env_.sim->hitCrashPoint(
                env_.self, CrashPointKind::PartAfterVoteReqBeforeLog))
        {
            return;
        }
        if (!vote_yes_)
        {
            // Vote no: the abort record is not on anyone's critical path,
            // so it rides along asynchronously with the reply.
            env_.sim->storageOp(env_.self, StorageOpKind::Log,
                                SlotKey{env_.self, txn_}, RecordType::Abort,
                                makeTag(env_.cookie, Purpose::AsyncLogOp));
            sendVoteResp(false);
            st_ = St::Done;
            env_.decide(txn_, Decision::Abort);
            return;
        }
        st_ = St::LoggingVote;
        env_.sim->storageOp(env_.self, StorageOpKind::LogOnce,
                            SlotKey{env_.self, txn_}, RecordType::VoteYes,
                            makeTag(env_.cookie, Purpose::VoteLogOp));
    }

    void
    onDecision(const Message& m)
    {
        // A decision can overtake our own vote write (fast aborts do);
        // adopting it early is safe: the outcome it reports is already
        // determined in the log, and our in-flight vote cannot flip it.
        if (st_ != St::WaitDecision && st_ != St::Terminating &&
            st_ != St::LoggingVote)
        {
            return;
        }
        resolve(m.decision);
    }

    void
    onTimer(Purpose p)
    {
        switch (p)
        {
        case Purpose::VoteReqTimeout:
            if (st_ == St::WaitVoteReq)
            {
                // Nobody asked for our vote in time: abort unilaterally by
                // writing the abort into our own slot, which doubles as a
                // refusal to any write-once probe that comes later.
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
                startTermination();
            }
            break;
        case Purpose::TermRound:
            if (st_ == St::Terminating && term_)
            {
                if (auto d = term_->onRoundTimer())
                {
                    resolve(*d);
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
        switch (tagPurpose(r.tag))
        {
        case Purpose::VoteLogOp:
            if (st_ == St::LoggingVote)
            {
                onVoteLogged(r);
            }
            break;
        case Purpose::TermOp:
            if (st_ == St::Terminating && term_)
            {
                if (auto d = term_->onStorageResult(r))
                {
                    resolve(*d);
                }
            }
            break;
        default:
            break;
        }
    }

    void
    onStorageUp()
    {
        if (st_ == St::Terminating && term_)
        {
            term_->onStorageUp();
        }
    }

    bool
    done() const
    {
        return st_ == St::Done;
    }

    std::optional<Decision>
    outcome() const
    {
        return outcome_;
    }

    // The coordinator released us before the commit protocol ran (early
    // abort or read-only fast path): stand down without a decision.
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
    onVoteLogged(const StorageOpResult& r)
    {
        if (r.result.status == StorageStatus::Unavailable)
        {
            if (++vote_log_attempts_ < kMaxTerminationRounds)
            {
                env_.sim->storageOp(env_.self, StorageOpKind::LogOnce,
                                    SlotKey{env_.self, txn_},
                                    RecordType::VoteYes,
                                    makeTag(env_.cookie, Purpose::VoteLogOp));
            }
            else
            {
                // Can't make the vote durable: refuse. Aborting is always
                // safe before VOTE_YES is on record.
                sendVoteResp(false);
                st_ = St::Done;
                env_.decide(txn_, Decision::Abort);
            }
            return;
        }
        switch (r.result.state)
        {
        case LogState::VoteYes:
            if (env_.sim->hitCrashPoint(
                    env_.self, CrashPointKind::PartAfterLogBeforeReply))
            {
                return;
            }
            sendVoteResp(true);
            st_ = St::WaitDecision;
            decision_timer_ = env_.sim->setTimer(
                env_.self, env_.cfg->timeouts.decision_wait,
                makeTag(env_.cookie, Purpose::DecisionTimeout));
            env_.sim->hitCrashPoint(env_.self, CrashPointKind::PartAfterReply);
            break;
        case LogState::Aborted:
            // Someone terminated us first; our yes never made it in.
            sendVoteResp(false);
            st_ = St::Done;
            env_.decide(txn_, Decision::Abort);
            break;
        case LogState::Committed:
            // Only reachable if the slot was decided before we voted,
            // which legal histories never produce; adopt it defensively.
            st_ = St::Done;
            env_.decide(txn_, Decision::Commit);
            break;
        case LogState::None:
            assert(false && "write-once probe left the slot empty");
            break;
        }
    }

    void
    startTermination()
    {
        st_ = St::Terminating;
        std::vector<NodeId> targets;
        for (NodeId p : participants_)
        {
            if (p != env_.self)
            {
                targets.push_back(p);
            }
        }
        term_.emplace(env_, txn_, targets);
        if (auto d = term_->start())
        {
            resolve(*d);
        }
    }

    void
    resolve(Decision d)
    {
        env_.sim->cancelTimer(decision_timer_);
        if (term_)
        {
            term_->stop();
        }
        st_ = St::Done;
        outcome_ = d;
        // Record the final decision in our own slot; nobody is waiting on
        // this write, so it is off the critical path.
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
    std::vector<NodeId> participants_;
    St st_ = St::WaitVoteReq;
    std::optional<Decision> outcome_;
    std::optional<TerminationEngine> term_;
    int vote_log_attempts_ = 0;
    Sim::TimerHandle vote_req_timer_{};
    Sim::TimerHandle decision_timer_{};
};

} // namespace cornus
