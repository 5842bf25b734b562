// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end: deterministic benchmarks with latency
// breakdowns, exhaustive fault exploration with trace checking, raw
// trace dumps for single scenarios, and the storage equivalence smoke
// against a live Redis endpoint.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cornus/check.hpp"
#include "cornus/explore.hpp"
#include "cornus/redis.hpp"
#include "cornus/report.hpp"
#include "cornus/runtime.hpp"

namespace
{

struct StorageModelOpt
{
    cornus::StorageLatencyModel model =
        cornus::StorageLatencyModel::fixed(1960, 1840);
    std::string text = "fixed:1960:1840";
};

// "fixed:WRITE_US[:READ_US]" or "paxos:ONE_WAY_US[:ACCEPTORS]".
bool
parseStorageModel(const std::string& text, StorageModelOpt& out)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text)
    {
        if (c == ':')
        {
            parts.push_back(cur);
            cur.clear();
        }
        else
        {
            cur += c;
        }
    }
    parts.push_back(cur);
    try
    {
        if (parts[0] == "fixed")
        {
            std::uint64_t w = parts.size() > 1 ? std::stoull(parts[1]) : 1960;
            std::uint64_t r = parts.size() > 2 ? std::stoull(parts[2]) : w;
            out.model = cornus::StorageLatencyModel::fixed(w, r);
        }
        else if (parts[0] == "paxos")
        {
            std::uint64_t d = parts.size() > 1 ? std::stoull(parts[1]) : 250;
            std::uint32_t a = parts.size() > 2
                                  ? static_cast<std::uint32_t>(
                                        std::stoul(parts[2]))
                                  : 3;
            out.model = cornus::StorageLatencyModel::paxosLeader(d, a);
        }
        else
        {
            return false;
        }
    }
    catch (...)
    {
        return false;
    }
    out.text = text;
    return true;
}

cornus::ProtocolKind
parseProtocol(const std::string& s)
{
    return s == "2pc" ? cornus::ProtocolKind::TwoPC
                      : cornus::ProtocolKind::Cornus;
}

int
cmdBench(const std::string& protocol, const std::string& termination,
         const StorageModelOpt& storage, std::uint32_t nodes, double theta,
         double writeProb, std::uint32_t txnSize, double roFraction,
         const std::string& roKnown, std::uint64_t durationMs,
         std::uint64_t maxTxns, std::uint64_t seed,
         std::uint64_t netOneWay, const std::string& outFile)
{
    using namespace cornus;
    BenchSpec spec;
    spec.n_nodes = nodes;
    spec.protocol.kind = parseProtocol(protocol);
    spec.protocol.termination = termination == "naive"
                                    ? TerminationMode::Naive
                                    : TerminationMode::Cooperative;
    spec.protocol.ro_known_in_advance = roKnown != "no";
    spec.sim.storage = storage.model;
    spec.sim.net_one_way_us = netOneWay;
    spec.sim.seed = seed;
    spec.protocol.timeouts = ProtocolTimeouts::defaults(
        netOneWay, storage.model.writeLegs().observed());
    spec.workload.theta = theta;
    spec.workload.write_prob = writeProb;
    spec.workload.accesses_per_txn = txnSize;
    spec.workload.read_only_fraction = roFraction;
    spec.duration_us = durationMs * 1000;
    spec.max_txns_per_node = maxTxns;

    RunResult rr = run_bench(spec);

    CheckParams cp;
    cp.protocol = spec.protocol.kind;
    cp.timeout_us = spec.protocol.timeouts.termination_wait;
    cp.net_one_way_us = netOneWay;
    cp.storage_write_us = storage.model.writeLegs().observed();
    CheckReport rep = check_trace(rr.trace, cp);

    std::string csv =
        csvReport(spec.protocol.kind, nodes, theta, rr.txns);
    if (!outFile.empty())
    {
        std::ofstream f(outFile);
        if (!f)
        {
            std::cerr << "cannot write " << outFile << "\n";
            return 1;
        }
        f << csv;
    }
    else
    {
        std::cout << csv;
    }

    std::uint64_t replied = 0;
    for (const auto& t : rr.txns)
    {
        replied += t.replied ? 1 : 0;
    }
    std::cerr << "protocol=" << to_string(spec.protocol.kind)
              << " storage=" << storage.text << " seed=" << seed
              << " txns=" << rr.txns.size() << " replied=" << replied
              << " trace_events=" << rr.trace.size()
              << " digest=" << std::hex << trace_digest(rr.trace)
              << std::dec << "\n";
    if (rep.anyFailure())
    {
        std::cerr << "trace checker found violations:\n" << summarize(rep);
        return 1;
    }
    std::cerr << "trace checker: all transactions consistent\n";
    return 0;
}

int
cmdVerify(const std::string& protocol, const StorageModelOpt& storage,
          std::uint32_t nodes, std::uint32_t depth, bool mutate,
          bool storageDown, std::uint64_t netOneWay)
{
    using namespace cornus;
    bool ok = true;

    if (mutate)
    {
        // Sanity check of the checker itself: break the termination
        // write discipline and demand the violation is noticed.
        ExploreConfig cfg;
        cfg.protocol = ProtocolKind::Cornus;
        cfg.storage = storage.model;
        cfg.n_nodes = nodes;
        cfg.net_one_way_us = netOneWay;
        cfg.schedule_depth = depth;
        cfg.mutate_overwrite_termination = true;
        ExploreStats stats = explore(cfg);
        std::cout << "[mutation] unconditional-overwrite termination:\n"
                  << coverageTable(stats);
        if (stats.failures.empty())
        {
            std::cout << "mutant NOT killed: checker missed the overwrite "
                         "corruption\n";
            return 1;
        }
        std::uint64_t failing = 0;
        for (const auto& [label, row] : stats.coverage)
        {
            failing += row.fail;
        }
        std::cout << "mutant killed: " << failing
                  << " runs flagged by the checker\n";
        return 0;
    }

    if (storageDown)
    {
        ExploreConfig cfg;
        cfg.protocol = ProtocolKind::Cornus;
        cfg.storage = storage.model;
        cfg.n_nodes = nodes;
        cfg.net_one_way_us = netOneWay;
        ExploreStats stats = Explorer(cfg).runStorageOutage();
        std::cout << "[storage outage] coordinator dead, log offline:\n"
                  << coverageTable(stats);
        bool blocked = stats.blocked_storage > 0 && stats.failures.empty();
        std::cout << (blocked
                          ? "stall attributed to the storage outage, as "
                            "designed\n"
                          : "unexpected outcome for a storage outage\n");
        return blocked ? 0 : 1;
    }

    std::vector<ProtocolKind> kinds;
    if (protocol == "both")
    {
        kinds = {ProtocolKind::Cornus, ProtocolKind::TwoPC};
    }
    else
    {
        kinds = {parseProtocol(protocol)};
    }
    for (ProtocolKind kind : kinds)
    {
        std::vector<TerminationMode> terms =
            kind == ProtocolKind::TwoPC
                ? std::vector<TerminationMode>{TerminationMode::Naive,
                                               TerminationMode::Cooperative}
                : std::vector<TerminationMode>{TerminationMode::Cooperative};
        for (TerminationMode term : terms)
        {
            ExploreConfig cfg;
            cfg.protocol = kind;
            cfg.termination = term;
            cfg.storage = storage.model;
            cfg.n_nodes = nodes;
            cfg.net_one_way_us = netOneWay;
            cfg.schedule_depth = depth;
            ExploreStats stats = explore(cfg);
            std::cout << "[" << to_string(kind) << " "
                      << (term == TerminationMode::Naive ? "naive"
                                                         : "cooperative")
                      << "]\n"
                      << coverageTable(stats);
            if (!stats.clean())
            {
                ok = false;
            }
            if (kind == ProtocolKind::Cornus && stats.blocked_storage +
                                                    stats.blocked_coordinator >
                                                    0)
            {
                std::cout << "one-phase runs blocked with storage alive\n";
                ok = false;
            }
            if (kind == ProtocolKind::TwoPC &&
                stats.blocked_coordinator == 0)
            {
                std::cout << "expected at least one run blocked on a dead "
                             "coordinator\n";
                ok = false;
            }
        }
    }
    std::cout << (ok ? "verify: all runs consistent\n"
                     : "verify: FAILURES above\n");
    return ok ? 0 : 1;
}

int
cmdTrace(const std::string& protocol, const StorageModelOpt& storage,
         std::uint32_t nodes, const std::string& crash,
         std::uint64_t recoverMs, std::uint64_t netOneWay)
{
    using namespace cornus;
    ScenarioSpec spec;
    spec.n_nodes = nodes;
    spec.protocol.kind = parseProtocol(protocol);
    spec.sim.storage = storage.model;
    spec.sim.net_one_way_us = netOneWay;
    spec.protocol.timeouts = ProtocolTimeouts::defaults(
        netOneWay, storage.model.writeLegs().observed());
    Transaction t;
    t.id = TxnId{0, 1};
    t.coordinator = 0;
    for (NodeId n = 0; n < nodes; ++n)
    {
        t.participants.push_back(n);
    }
    spec.txns.push_back({t, false, {}});

    if (!crash.empty())
    {
        // "<point>[:idx][@node]", e.g. coord_after_decide or
        // part_after_log@2 or coord_after_send_votereq:2
        std::string point = crash;
        std::uint32_t idx = 0;
        NodeId node = 0;
        if (auto at = point.find('@'); at != std::string::npos)
        {
            node = static_cast<NodeId>(std::stoul(point.substr(at + 1)));
            point = point.substr(0, at);
        }
        if (auto colon = point.find(':'); colon != std::string::npos)
        {
            idx = static_cast<std::uint32_t>(
                std::stoul(point.substr(colon + 1)));
            point = point.substr(0, colon);
        }
        std::optional<CrashPointKind> kind;
        for (CrashPointKind k :
             {CrashPointKind::CoordBeforeStart,
              CrashPointKind::CoordAfterSendVoteReq,
              CrashPointKind::CoordBeforeDecisionLog,
              CrashPointKind::CoordAfterDecisionLog,
              CrashPointKind::CoordAfterDecide,
              CrashPointKind::CoordAfterSendDecision,
              CrashPointKind::PartBeforeVoteReq,
              CrashPointKind::PartAfterVoteReqBeforeLog,
              CrashPointKind::PartAfterLogBeforeReply,
              CrashPointKind::PartAfterReply})
        {
            if (point == to_string(k))
            {
                kind = k;
            }
        }
        if (!kind)
        {
            std::cerr << "unknown crash point " << point << "\n";
            return 1;
        }
        spec.faults.symbolic = SymbolicCrash{node, CrashPoint{*kind, idx},
                                             std::nullopt};
        if (recoverMs)
        {
            spec.faults.symbolic->recover_at = recoverMs * 1000;
        }
    }

    RunResult rr = run_scenario(spec);
    std::cout << serialize(rr.trace);

    CheckParams cp;
    cp.protocol = spec.protocol.kind;
    cp.timeout_us = spec.protocol.timeouts.termination_wait;
    cp.net_one_way_us = netOneWay;
    cp.storage_write_us = storage.model.writeLegs().observed();
    CheckReport rep = check_trace(rr.trace, cp);
    std::cerr << summarize(rep);
    return rep.anyFailure() ? 1 : 0;
}

int
cmdSmoke(const std::string& endpoint)
{
    using namespace cornus;
    std::string ep = endpoint;
    if (ep.empty())
    {
        if (const char* env = std::getenv("CORNUS_REDIS"))
        {
            ep = env;
        }
        else
        {
            ep = "127.0.0.1:6379";
        }
    }
    auto parsed = parse_endpoint(ep);
    if (!parsed)
    {
        std::cerr << "bad endpoint: " << ep << "\n";
        return 1;
    }
    RedisLogStore store(*parsed);
    SmokeOutcome out = runSmoke(store, "smoke-");
    if (!out.ran)
    {
        std::cout << "smoke skipped: " << out.detail << " (" << ep << ")\n";
        return 2;
    }
    std::cout << (out.matched ? "smoke passed: " : "smoke FAILED: ")
              << out.detail << "\n";
    return out.matched ? 0 : 1;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"one-phase atomic commit over shared logs: simulator, "
                 "checker, and benchmarks"};
    app.require_subcommand(1);

    std::string protocol = "cornus";
    std::string termination = "cooperative";
    std::string storageText = "fixed:1960:1840";
    std::string roKnown = "yes";
    std::string outFile;
    std::string crash;
    std::string endpoint;
    std::uint32_t nodes = 4;
    std::uint32_t txnSize = 16;
    std::uint32_t depth = 5;
    double theta = 0.0;
    double writeProb = 0.5;
    double roFraction = 0.0;
    std::uint64_t durationMs = 100;
    std::uint64_t maxTxns = 0;
    std::uint64_t seed = 1;
    std::uint64_t netOneWay = 250;
    std::uint64_t recoverMs = 0;
    bool mutate = false;
    bool storageDown = false;

    auto addStorage = [&](CLI::App* cmd) {
        cmd->add_option("--storage", storageText,
                        "latency model: fixed:WRITE_US[:READ_US] or "
                        "paxos:ONE_WAY_US[:ACCEPTORS]");
    };

    CLI::App* bench = app.add_subcommand(
        "bench", "run a deterministic closed-loop benchmark and print "
                 "per-class latency breakdowns as CSV");
    bench->add_option("--protocol", protocol, "cornus or 2pc")
        ->check(CLI::IsMember({"cornus", "2pc"}));
    bench->add_option("--termination", termination,
                      "2pc termination: naive or cooperative")
        ->check(CLI::IsMember({"naive", "cooperative"}));
    addStorage(bench);
    bench->add_option("--nodes", nodes, "server count");
    bench->add_option("--theta", theta, "zipfian skew (0 = uniform)");
    bench->add_option("--write-prob", writeProb,
                      "per-access write probability");
    bench->add_option("--txn-size", txnSize, "accesses per transaction");
    bench->add_option("--ro-fraction", roFraction,
                      "fraction of transactions declared read-only");
    bench->add_option("--ro-known", roKnown,
                      "read-only sets known upfront: yes or no")
        ->check(CLI::IsMember({"yes", "no"}));
    bench->add_option("--duration-virtual-ms", durationMs,
                      "virtual time during which clients submit");
    bench->add_option("--max-txns", maxTxns,
                      "per-node transaction cap (0 = none)");
    bench->add_option("--seed", seed, "workload seed");
    bench->add_option("--net-one-way-us", netOneWay,
                      "one-way network latency");
    bench->add_option("--out", outFile, "write CSV here instead of stdout");

    CLI::App* verify = app.add_subcommand(
        "verify", "enumerate crash points x recovery x delay schedules, "
                  "check every trace, and print the coverage table");
    verify->add_option("--protocol", protocol, "cornus, 2pc, or both")
        ->check(CLI::IsMember({"cornus", "2pc", "both"}))
        ->default_val("both");
    addStorage(verify);
    verify->add_option("--nodes", nodes, "server count")->default_val(3);
    verify->add_option("--depth", depth,
                       "perturbed message hops (3^depth schedules)");
    verify->add_option("--net-one-way-us", netOneWay,
                       "one-way network latency");
    verify->add_flag("--mutate", mutate,
                     "corrupt termination writes and demand the checker "
                     "notices");
    verify->add_flag("--storage-down", storageDown,
                     "demonstrate the documented stall when the shared "
                     "log goes offline");

    CLI::App* trace = app.add_subcommand(
        "trace", "run one scenario and dump its event trace");
    trace->add_option("--protocol", protocol, "cornus or 2pc")
        ->check(CLI::IsMember({"cornus", "2pc"}));
    addStorage(trace);
    trace->add_option("--nodes", nodes, "server count")->default_val(3);
    trace->add_option("--crash", crash,
                      "crash point, e.g. coord_after_decide, "
                      "coord_after_send_votereq:2, part_after_log@1");
    trace->add_option("--recover-ms", recoverMs,
                      "revive the crashed node after this many virtual ms");
    trace->add_option("--net-one-way-us", netOneWay,
                      "one-way network latency");

    CLI::App* smoke = app.add_subcommand(
        "smoke", "replay scripted slot operations against a live Redis "
                 "and the in-memory reference; exit 2 if unreachable");
    smoke->add_option("--endpoint", endpoint,
                      "host:port (default $CORNUS_REDIS or "
                      "127.0.0.1:6379)");

    CLI11_PARSE(app, argc, argv);

    StorageModelOpt storage;
    if (!parseStorageModel(storageText, storage))
    {
        std::cerr << "bad storage model: " << storageText << "\n";
        return 1;
    }

    if (bench->parsed())
    {
        return cmdBench(protocol, termination, storage, nodes, theta,
                        writeProb, txnSize, roFraction, roKnown, durationMs,
                        maxTxns, seed, netOneWay, outFile);
    }
    if (verify->parsed())
    {
        return cmdVerify(protocol, storage, nodes, depth, mutate,
                         storageDown, netOneWay);
    }
    if (trace->parsed())
    {
        return cmdTrace(protocol, storage, nodes, crash, recoverMs,
                        netOneWay);
    }
    return cmdSmoke(endpoint);
}
