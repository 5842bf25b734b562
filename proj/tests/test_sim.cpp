// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "cornus/runtime.hpp"
#include "cornus/sim.hpp"

using namespace cornus;

namespace
{

// Scripted actor for poking at the event loop directly.
struct Probe : NodeActor
{
    Sim* sim = nullptr;
    NodeId self = 0;
    std::vector<std::pair<VirtualTime, std::uint64_t>> timers;
    std::vector<Message> messages;
    std::vector<StorageOpResult> storage;
    int recovered = 0;
    int storage_up = 0;

    void
    onMessage(const Message& m) override
    {
        messages.push_back(m);
    }

    void
    onTimer(std::uint64_t tag) override
    {
        timers.emplace_back(sim->now(), tag);
    }

    void
    onStorageResult(const StorageOpResult& r) override
    {
        storage.push_back(r);
    }

    void
    onRecover() override
    {
        ++recovered;
    }

    void
    onStorageUp() override
    {
        ++storage_up;
    }
};

ScenarioSpec
crashySpec()
{
    ScenarioSpec s;
    s.n_nodes = 3;
    s.protocol.kind = ProtocolKind::Cornus;
    s.sim.storage = StorageLatencyModel::fixed(1960, 1840);
    s.protocol.timeouts = ProtocolTimeouts::defaults(250, 1960);
    s.sim.msg_schedule = {0, 1, 2, 0, 1};
    Transaction t;
    t.id = TxnId{0, 1};
    t.coordinator = 0;
    t.participants = {0, 1, 2};
    s.txns.push_back({t, false, {}});
    s.faults.symbolic = SymbolicCrash{
        0, CrashPoint{CrashPointKind::CoordAfterSendVoteReq, 3}, 150000};
    return s;
}

} // namespace

TEST_CASE("identical configurations replay to identical traces")
{
    RunResult a = run_scenario(crashySpec());
    RunResult b = run_scenario(crashySpec());
    CHECK(serialize(a.trace) == serialize(b.trace));
    CHECK(trace_digest(a.trace) == trace_digest(b.trace));
    CHECK_FALSE(a.trace.empty());

    // And a different schedule really does change the run.
    ScenarioSpec other = crashySpec();
    other.sim.msg_schedule = {2, 2, 0, 0, 1};
    RunResult c = run_scenario(other);
    CHECK(serialize(a.trace) != serialize(c.trace));
}

TEST_CASE("timers fire exactly when set, unless cancelled")
{
    SimConfig cfg;
    Sim sim(cfg, {});
    Probe p;
    p.sim = &sim;
    sim.addActor(0, &p);

    sim.setTimer(0, 1234, 7);
    Sim::TimerHandle doomed = sim.setTimer(0, 500, 8);
    sim.cancelTimer(doomed);
    sim.run();

    REQUIRE(p.timers.size() == 1);
    CHECK(p.timers[0].first == 1234);
    CHECK(p.timers[0].second == 7);
}

TEST_CASE("messages to a crashed node are dropped, not queued")
{
    SimConfig cfg;
    FaultPlan faults;
    faults.crashes.push_back(TimedCrash{1, 100, std::nullopt});
    Sim sim(cfg, faults);
    Probe a, b;
    a.sim = b.sim = &sim;
    sim.addActor(0, &a);
    sim.addActor(1, &b);

    Message m;
    m.type = MsgType::DecisionReq;
    m.txn = TxnId{0, 1};
    m.from = 0;
    m.to = 1;
    sim.send(m); // arrives at 250, after the crash at 100
    sim.run();

    CHECK(b.messages.empty());
    bool sawDeliver = false;
    for (const auto& e : sim.trace())
    {
        sawDeliver = sawDeliver || e.kind == TraceKind::Deliver;
    }
    CHECK_FALSE(sawDeliver);
}

TEST_CASE("a write in flight at crash time still lands, stamped with its "
          "issue time")
{
    SimConfig cfg;
    cfg.storage = StorageLatencyModel::fixed(1960, 1840);
    FaultPlan faults;
    faults.crashes.push_back(TimedCrash{0, 10, std::nullopt});
    Sim sim(cfg, faults);
    Probe p;
    p.sim = &sim;
    sim.addActor(0, &p);

    sim.storageOp(0, StorageOpKind::Log, SlotKey{0, TxnId{0, 1}},
                  RecordType::VoteYes, 1);
    sim.run();

    // The write happened (storage does not know the client died)...
    CHECK(sim.store().readState(SlotKey{0, TxnId{0, 1}}).state ==
          LogState::VoteYes);
    const TraceEvent* write = nullptr;
    for (const auto& e : sim.trace())
    {
        if (e.kind == TraceKind::SlotWrite)
        {
            write = &e;
        }
    }
    REQUIRE(write != nullptr);
    CHECK(write->issued_at == 0);
    CHECK(write->time == 1960);
    CHECK(write->issued_at <= 10); // never issued from beyond the grave
    // ...but the dead client never saw the response.
    CHECK(p.storage.empty());
}

TEST_CASE("storage outages fail operations without writing")
{
    SimConfig cfg;
    cfg.storage = StorageLatencyModel::fixed(100, 100);
    FaultPlan faults;
    faults.outages.push_back(StorageOutage{50, 5000});
    Sim sim(cfg, faults);
    Probe p;
    p.sim = &sim;
    sim.addActor(0, &p);

    sim.storageOp(0, StorageOpKind::Log, SlotKey{0, TxnId{0, 1}},
                  RecordType::VoteYes, 1); // lands at 100, mid-outage
    sim.run();

    REQUIRE(p.storage.size() == 1);
    CHECK(p.storage[0].result.status == StorageStatus::Unavailable);
    CHECK(sim.store().readState(SlotKey{0, TxnId{0, 1}}).state ==
          LogState::None);
    CHECK(p.storage_up == 1); // told when the outage ended
}

TEST_CASE("self-sends deliver immediately and skip the delay schedule")
{
    SimConfig cfg;
    cfg.msg_schedule = {2, 2, 2, 2};
    Sim sim(cfg, {});
    Probe p;
    p.sim = &sim;
    sim.addActor(0, &p);

    Message m;
    m.type = MsgType::DecisionReq;
    m.txn = TxnId{0, 1};
    m.from = 0;
    m.to = 0;
    sim.send(m);
    sim.run();

    REQUIRE(p.messages.size() == 1);
    CHECK(sim.now() == 0);
}

TEST_CASE("the runaway guard stops infinite event loops")
{
    struct PingPong : NodeActor
    {
        Sim* sim = nullptr;
        void
        onMessage(const Message&) override
        {
        }
        void
        onTimer(std::uint64_t tag) override
        {
            sim->setTimer(0, 1, tag);
        }
        void
        onStorageResult(const StorageOpResult&) override
        {
        }
        void
        onRecover() override
        {
        }
        void
        onStorageUp() override
        {
        }
    };
    SimConfig cfg;
    cfg.max_events = 1000;
    Sim sim(cfg, {});
    PingPong p;
    p.sim = &sim;
    sim.addActor(0, &p);
    sim.setTimer(0, 1, 1);
    CHECK_THROWS_AS(sim.run(), std::runtime_error);
}
