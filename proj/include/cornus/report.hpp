#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Latency accounting over bench runs: per-class aggregation of the
// execution / prepare / commit phases and CSV emission.

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cornus/runtime.hpp"

namespace cornus
{

struct PhaseBreakdown
{
    double exec_us = 0;    // start -> protocol start (locks + remote reads)
    double prepare_us = 0; // protocol start -> outcome determined
    double commit_us = 0;  // outcome determined -> caller answered
    double abort_us = 0;   // protocol start -> answered, aborted runs only
};

struct ClassSummary
{
    TxnClass cls = TxnClass::Distributed;
    std::uint64_t count = 0;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    double mean_us = 0;
    double p50_us = 0;
    double p99_us = 0;
    PhaseBreakdown phases; // means over committed (abort_us over aborted)
    double abort_rate = 0;
};

namespace detail
{

inline double
percentile(std::vector<double>& sorted, double q)
{
    if (sorted.empty())
    {
        return 0;
    }
    // Nearest-rank on the sorted sample.
    size_t idx = static_cast<size_t>(q * static_cast<double>(sorted.size()));
    if (idx >= sorted.size())
    {
        idx = sorted.size() - 1;
    }
    return sorted[idx];
}

} // namespace detail

inline std::vector<ClassSummary>
summarizeByClass(const std::vector<TxnStat>& txns)
{
    std::map<TxnClass, std::vector<const TxnStat*>> byClass;
    for (const auto& t : txns)
    {
        if (!t.replied)
        {
            continue; // still in flight when the run was cut off
        }
        byClass[t.cls].push_back(&t);
    }
    std::vector<ClassSummary> out;
    for (auto& [cls, list] : byClass)
    {
        ClassSummary s;
        s.cls = cls;
        s.count = list.size();
        std::vector<double> totals;
        double sumExec = 0, sumPrep = 0, sumCommit = 0, sumAbort = 0;
        for (const TxnStat* t : list)
        {
            double total = static_cast<double>(t->reply_time - t->start);
            totals.push_back(total);
            if (t->committed)
            {
                ++s.committed;
                sumExec +=
                    static_cast<double>(t->protocol_start - t->start);
                sumPrep += static_cast<double>(t->decision_time -
                                               t->protocol_start);
                sumCommit +=
                    static_cast<double>(t->reply_time - t->decision_time);
            }
            else
            {
                ++s.aborted;
                sumExec +=
                    static_cast<double>(t->protocol_start - t->start);
                sumAbort += static_cast<double>(t->reply_time -
                                                t->protocol_start);
            }
        }
        double n = static_cast<double>(s.count);
        s.mean_us = 0;
        for (double v : totals)
        {
            s.mean_us += v;
        }
        s.mean_us /= n;
        std::sort(totals.begin(), totals.end());
        s.p50_us = detail::percentile(totals, 0.50);
        s.p99_us = detail::percentile(totals, 0.99);
        s.phases.exec_us = sumExec / n;
        s.phases.prepare_us =
            s.committed ? sumPrep / static_cast<double>(s.committed) : 0;
        s.phases.commit_us =
            s.committed ? sumCommit / static_cast<double>(s.committed) : 0;
        s.phases.abort_us =
            s.aborted ? sumAbort / static_cast<double>(s.aborted) : 0;
        s.abort_rate = static_cast<double>(s.aborted) / n;
        out.push_back(s);
    }
    return out;
}

inline std::string
csvHeader()
{
    return "protocol,nodes,theta,txn_class,count,mean_us,p50_us,p99_us,"
           "exec_us,prepare_us,commit_us,abort_us,abort_rate";
}

inline std::string
csvRow(ProtocolKind protocol, std::uint32_t nodes, double theta,
       const ClassSummary& s)
{
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "%s,%u,%.2f,%s,%llu,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,"
                  "%.4f",
                  to_string(protocol), nodes, theta, to_string(s.cls),
                  static_cast<unsigned long long>(s.count), s.mean_us,
                  s.p50_us, s.p99_us, s.phases.exec_us, s.phases.prepare_us,
                  s.phases.commit_us, s.phases.abort_us, s.abort_rate);
    return buf;
}

inline std::string
csvReport(ProtocolKind protocol, std::uint32_t nodes, double theta,
          const std::vector<TxnStat>& txns)
{
    std::ostringstream os;
    os << csvHeader() << "\n";
    for (const auto& s : summarizeByClass(txns))
    {
        os << csvRow(protocol, nodes, theta, s) << "\n";
    }
    return os.str();
}

} // namespace cornus
