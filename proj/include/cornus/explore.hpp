#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Bounded-exhaustive fault explorer: enumerates every protocol crash
// point, crossed with recovery choices, vote outcomes, and network
// schedule perturbations, runs each configuration through the simulator,
// and feeds the resulting trace to the checker. The aggregate answer is
// a coverage table plus the list of property violations (expected: none)
// and blocked runs (expected: only where the protocol is allowed to
// block).

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cornus/check.hpp"
#include "cornus/runtime.hpp"

namespace cornus
{

struct ExploreConfig
{
    ProtocolKind protocol = ProtocolKind::Cornus;
    TerminationMode termination = TerminationMode::Cooperative;
    std::uint32_t n_nodes = 3;
    StorageLatencyModel storage = StorageLatencyModel::fixed(1960, 1840);
    VirtualTime net_one_way_us = 250;
    bool mutate_overwrite_termination = false;

    // Message-delay perturbation: the first `schedule_depth` network hops
    // each independently take one of `schedule_base` delay values
    // (nominal, slow, or slow enough to land mid-termination).
    std::uint32_t schedule_depth = 5;
    std::uint32_t schedule_base = 3;

    // Crash-point runs use the full perturbation space unless capped.
    std::uint64_t max_runs = 100000;
    VirtualTime recovery_at_us = 200000;
};

struct RunLabel
{
    std::string point;    // crash-point label or "fault_free"
    bool recovered = false;
    bool no_voter = false;
    std::uint64_t schedule = 0;

    std::string
    str() const
    {
        std::string s = point;
        if (no_voter)
        {
            s += "+no_voter";
        }
        s += recovered ? "+recover" : "+no_recover";
        return s;
    }
};

struct ExploreRow
{
    std::uint64_t runs = 0;
    std::uint64_t pass = 0;
    std::uint64_t blocked = 0;
    std::uint64_t fail = 0;
    std::uint64_t fired = 0; // symbolic crash actually triggered
};

struct ExploreFailure
{
    RunLabel label;
    std::string report; // summarized checker output
};

struct ExploreStats
{
    std::uint64_t total_runs = 0;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    std::uint64_t blocked_coordinator = 0;
    std::uint64_t blocked_storage = 0;
    bool capped = false;
    std::map<std::string, ExploreRow> coverage;
    std::vector<ExploreFailure> failures;

    bool
    clean() const
    {
        return failures.empty() && !capped;
    }
};

namespace detail
{

struct FaultCase
{
    std::optional<SymbolicCrash> crash;
    std::string point = "fault_free";
    bool no_voter = false;
};

inline std::vector<FaultCase>
coordinatorPoints(ProtocolKind kind, NodeId coord, std::uint32_t n)
{
    std::vector<FaultCase> out;
    auto add = [&](CrashPointKind k, std::uint32_t idx) {
        FaultCase fc;
        fc.crash = SymbolicCrash{coord, CrashPoint{k, idx}, {}};
        fc.point = std::string(to_string(k)) +
                   (idx ? "(" + std::to_string(idx) + ")" : "");
        out.push_back(fc);
    };
    add(CrashPointKind::CoordBeforeStart, 0);
    for (std::uint32_t k = 1; k <= n; ++k)
    {
        add(CrashPointKind::CoordAfterSendVoteReq, k);
    }
    if (kind == ProtocolKind::TwoPC)
    {
        add(CrashPointKind::CoordBeforeDecisionLog, 0);
        add(CrashPointKind::CoordAfterDecisionLog, 0);
    }
    add(CrashPointKind::CoordAfterDecide, 0);
    for (std::uint32_t k = 1; k <= n; ++k)
    {
        add(CrashPointKind::CoordAfterSendDecision, k);
    }
    return out;
}

inline std::vector<FaultCase>
participantPoints(NodeId coord, std::uint32_t n)
{
    std::vector<FaultCase> out;
    for (NodeId node = 0; node < n; ++node)
    {
        if (node == coord)
        {
            continue;
        }
        for (CrashPointKind k : {CrashPointKind::PartBeforeVoteReq,
                                 CrashPointKind::PartAfterVoteReqBeforeLog,
                                 CrashPointKind::PartAfterLogBeforeReply,
                                 CrashPointKind::PartAfterReply})
        {
            FaultCase fc;
            fc.crash = SymbolicCrash{node, CrashPoint{k, 0}, {}};
            fc.point = std::string(to_string(k)) + "@n" +
                       std::to_string(node);
            out.push_back(fc);
        }
    }
    return out;
}

// With a dissenting voter the interesting coordinator points are the
// ones around the (abort) decision; the pre-vote points behave as in
// the unanimous runs.
inline std::vector<FaultCase>
noVoterPoints(NodeId coord, std::uint32_t n)
{
    std::vector<FaultCase> out;
    FaultCase none;
    none.no_voter = true;
    out.push_back(none);
    auto add = [&](CrashPointKind k, std::uint32_t idx) {
        FaultCase fc;
        fc.no_voter = true;
        fc.crash = SymbolicCrash{coord, CrashPoint{k, idx}, {}};
        fc.point = std::string(to_string(k)) +
                   (idx ? "(" + std::to_string(idx) + ")" : "");
        out.push_back(fc);
    };
    add(CrashPointKind::CoordAfterDecide, 0);
    for (std::uint32_t k = 1; k <= n; ++k)
    {
        add(CrashPointKind::CoordAfterSendDecision, k);
    }
    return out;
}

inline std::vector<std::uint8_t>
decodeSchedule(std::uint64_t index, std::uint32_t depth, std::uint32_t base)
{
    std::vector<std::uint8_t> digits;
    std::uint64_t v = index;
    for (std::uint32_t i = 0; i < depth; ++i)
    {
        digits.push_back(static_cast<std::uint8_t>(v % base));
        v /= base;
    }
    return digits;
}

} // namespace detail

class Explorer
{
  public:
    explicit Explorer(const ExploreConfig& cfg) : cfg_(cfg)
    {
    }

    ExploreStats
    run()
    {
        ExploreStats stats;

        std::uint64_t schedules = 1;
        for (std::uint32_t i = 0; i < cfg_.schedule_depth; ++i)
        {
            schedules *= cfg_.schedule_base;
        }

        // Delay long enough to arrive while the receiver is already
        // running the termination protocol.
        ProtocolTimeouts tmo = timeouts();
        VirtualTime big =
            tmo.decision_wait + observedWrite() / 2 + cfg_.net_one_way_us;

        std::vector<detail::FaultCase> cases;
        cases.push_back({}); // fault-free
        for (auto& fc :
             detail::coordinatorPoints(cfg_.protocol, 0, cfg_.n_nodes))
        {
            cases.push_back(fc);
        }
        for (auto& fc : detail::participantPoints(0, cfg_.n_nodes))
        {
            cases.push_back(fc);
        }
        for (auto& fc : detail::noVoterPoints(0, cfg_.n_nodes))
        {
            cases.push_back(fc);
        }

        for (const auto& fc : cases)
        {
            for (int rec = 0; rec < (fc.crash ? 2 : 1); ++rec)
            {
                for (std::uint64_t sched = 0; sched < schedules; ++sched)
                {
                    if (stats.total_runs >= cfg_.max_runs)
                    {
                        stats.capped = true;
                        return stats;
                    }
                    RunLabel label;
                    label.point = fc.point;
                    label.recovered = rec == 1;
                    label.no_voter = fc.no_voter;
                    label.schedule = sched;
                    runOne(fc, rec == 1, sched, big, stats, label);
                }
            }
        }
        return stats;
    }

    // A single storage outage beginning after the votes are durable and
    // never repaired: the one situation where the one-phase protocol is
    // allowed to stall.
    ExploreStats
    runStorageOutage()
    {
        ExploreStats stats;
        detail::FaultCase fc;
        fc.crash = SymbolicCrash{
            0, CrashPoint{CrashPointKind::CoordAfterSendVoteReq,
                          cfg_.n_nodes},
            {}};
        fc.point = "coord_after_send_vote_req(n)+storage_outage";
        RunLabel label;
        label.point = fc.point;
        runOne(fc, false, 0, 0, stats, label,
               /*outage_at=*/2 * cfg_.net_one_way_us + observedWrite() + 1);
        return stats;
    }

  private:
    ProtocolTimeouts
    timeouts() const
    {
        return ProtocolTimeouts::defaults(cfg_.net_one_way_us,
                                          observedWrite());
    }

    VirtualTime
    observedWrite() const
    {
        return cfg_.storage.writeLegs().observed();
    }

    void
    runOne(const detail::FaultCase& fc, bool recover, std::uint64_t sched,
           VirtualTime big, ExploreStats& stats, const RunLabel& label,
           std::optional<VirtualTime> outage_at = std::nullopt)
    {
        ScenarioSpec spec;
        spec.n_nodes = cfg_.n_nodes;
        spec.protocol.kind = cfg_.protocol;
        spec.protocol.termination = cfg_.termination;
        spec.protocol.timeouts = timeouts();
        spec.protocol.mutate_overwrite_termination =
            cfg_.mutate_overwrite_termination;
        spec.sim.storage = cfg_.storage;
        spec.sim.net_one_way_us = cfg_.net_one_way_us;
        spec.sim.big_delay_us = big;
        spec.sim.msg_schedule = detail::decodeSchedule(
            sched, cfg_.schedule_depth, cfg_.schedule_base);

        Transaction t;
        t.id = TxnId{0, 1};
        t.coordinator = 0;
        t.participants.clear();
        for (NodeId n = 0; n < cfg_.n_nodes; ++n)
        {
            t.participants.push_back(n);
        }
        ScenarioTxn st;
        st.txn = t;
        if (fc.no_voter)
        {
            st.forced_votes[cfg_.n_nodes - 1] = false;
        }
        spec.txns.push_back(st);

        if (fc.crash)
        {
            spec.faults.symbolic = *fc.crash;
            if (recover)
            {
                spec.faults.symbolic->recover_at = cfg_.recovery_at_us;
            }
        }
        if (outage_at)
        {
            spec.faults.outages.push_back({*outage_at, std::nullopt});
        }

        RunResult rr = run_scenario(spec);

        CheckParams cp;
        cp.protocol = cfg_.protocol;
        cp.timeout_us = spec.protocol.timeouts.termination_wait;
        cp.net_one_way_us = cfg_.net_one_way_us;
        cp.storage_write_us = observedWrite();
        CheckReport rep = check_trace(rr.trace, cp);

        ++stats.total_runs;
        ExploreRow& row = stats.coverage[label.str()];
        ++row.runs;
        if (rr.symbolic_crash_fired)
        {
            ++row.fired;
        }

        bool fail = rep.anyFailure() || rr.illegal_transitions > 0;
        bool blocked = rep.anyBlocked();
        if (fail)
        {
            ++row.fail;
            ExploreFailure ef;
            ef.label = label;
            ef.report = summarize(rep);
            if (rr.illegal_transitions > 0)
            {
                ef.report += "illegal transitions: " +
                             std::to_string(rr.illegal_transitions) + "\n";
            }
            if (stats.failures.size() < 32)
            {
                stats.failures.push_back(std::move(ef));
            }
        }
        else if (blocked)
        {
            ++row.blocked;
            for (const auto& txn : rep.txns)
            {
                for (const auto& r : txn.results)
                {
                    if (r.verdict != Verdict::Blocked)
                    {
                        continue;
                    }
                    if (r.cause == BlockCause::CoordinatorDown)
                    {
                        ++stats.blocked_coordinator;
                    }
                    else if (r.cause == BlockCause::StorageDown)
                    {
                        ++stats.blocked_storage;
                    }
                }
            }
        }
        else
        {
            ++row.pass;
        }
        for (const auto& txn : rep.txns)
        {
            if (txn.decision == GlobalDecision::Commit)
            {
                ++stats.committed;
            }
            else if (txn.decision == GlobalDecision::Abort)
            {
                ++stats.aborted;
            }
        }
    }

    ExploreConfig cfg_;
};

inline ExploreStats
explore(const ExploreConfig& cfg)
{
    return Explorer(cfg).run();
}

inline std::string
coverageTable(const ExploreStats& stats)
{
    std::ostringstream os;
    os << "runs=" << stats.total_runs << " committed=" << stats.committed
       << " aborted=" << stats.aborted
       << " blocked_coord=" << stats.blocked_coordinator
       << " blocked_storage=" << stats.blocked_storage
       << (stats.capped ? " CAPPED" : "") << "\n";
    for (const auto& [label, row] : stats.coverage)
    {
        os << "  " << label << ": runs=" << row.runs << " pass=" << row.pass
           << " blocked=" << row.blocked << " fail=" << row.fail
           << " fired=" << row.fired << "\n";
    }
    for (const auto& f : stats.failures)
    {
        os << "FAILURE at " << f.label.str() << " schedule "
           << f.label.schedule << "\n"
           << f.report;
    }
    return os.str();
}

} // namespace cornus
