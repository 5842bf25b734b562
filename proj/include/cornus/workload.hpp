#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "cornus/core.hpp"

namespace cornus
{

// Deterministic uniform double in [0, 1): take the top 53 bits so the
// result does not depend on library-specific distribution internals.
inline double
uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Zipfian over {0, .., n-1} with skew theta (theta = 0 is uniform), via a
// precomputed cumulative weight table and binary search. Weight of rank i
// is 1/(i+1)^theta.
class ZipfianGenerator
{
  public:
    ZipfianGenerator(std::uint64_t n, double theta) : cum_(n)
    {
        assert(n > 0);
        double sum = 0;
        for (std::uint64_t i = 0; i < n; ++i)
        {
            sum += 1.0 / std::pow(static_cast<double>(i + 1), theta);
            cum_[i] = sum;
        }
        for (auto& c : cum_)
        {
            c /= sum;
        }
        cum_.back() = 1.0; // guard against rounding
    }

    std::uint64_t
    sample(double u01) const
    {
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u01);
        if (it == cum_.end())
        {
            --it;
        }
        return static_cast<std::uint64_t>(it - cum_.begin());
    }

    std::uint64_t
    sample(std::mt19937_64& rng) const
    {
        return sample(uniform01(rng));
    }

  private:
    std::vector<double> cum_;
};

// NO-WAIT two-mode lock table: a conflicting request is refused
// immediately, never queued. Re-entrant for the holding transaction,
// including read-after-write; a lone shared holder may upgrade.
class LockTable
{
  public:
    bool
    acquire(const TxnId& txn, std::uint64_t key, AccessMode mode)
    {
        Entry& e = table_[key];
        if (mode == AccessMode::Read)
        {
            if (e.exclusive && *e.exclusive != txn)
            {
                return false;
            }
            if (e.exclusive)
            {
                return true; // already held exclusively by us
            }
            if (e.sharers.insert(txn).second)
            {
                held_[txn].push_back(key);
            }
            return true;
        }
        // write
        if (e.exclusive)
        {
            return *e.exclusive == txn;
        }
        if (!e.sharers.empty() &&
            !(e.sharers.size() == 1 && *e.sharers.begin() == txn))
        {
            return false;
        }
        bool wasSharer = e.sharers.count(txn) != 0;
        e.sharers.clear();
        e.exclusive = txn;
        if (!wasSharer)
        {
            held_[txn].push_back(key);
        }
        return true;
    }

    void
    releaseAll(const TxnId& txn)
    {
        auto it = held_.find(txn);
        if (it == held_.end())
        {
            return;
        }
        for (std::uint64_t key : it->second)
        {
            auto te = table_.find(key);
            if (te == table_.end())
            {
                continue;
            }
            Entry& e = te->second;
            if (e.exclusive == txn)
            {
                e.exclusive.reset();
            }
            e.sharers.erase(txn);
            if (!e.exclusive && e.sharers.empty())
            {
                table_.erase(te);
            }
        }
        held_.erase(it);
    }

    void
    clear()
    {
        table_.clear();
        held_.clear();
    }

    std::size_t
    lockedKeys() const
    {
        return table_.size();
    }

    bool
    holds(const TxnId& txn) const
    {
        return held_.count(txn) != 0;
    }

  private:
    struct Entry
    {
        std::set<TxnId> sharers;
        std::optional<TxnId> exclusive;
    };

    std::map<std::uint64_t, Entry> table_;
    std::map<TxnId, std::vector<std::uint64_t>> held_;
};

struct WorkloadConfig
{
    std::uint64_t rows_per_partition = 10000;
    std::uint32_t accesses_per_txn = 16;
    double write_prob = 0.5;
    double theta = 0.0;
    double read_only_fraction = 0.0;
};

// Global key: partition p, row r -> p * rows + r.
inline std::uint64_t
rowKey(const WorkloadConfig& cfg, NodeId partition, std::uint64_t row)
{
    return static_cast<std::uint64_t>(partition) * cfg.rows_per_partition +
           row;
}

// Draws one transaction: each access picks a uniform partition and a
// Zipfian row within it; duplicate rows are re-rolled so a transaction
// never conflicts with itself.
inline Transaction
makeTransaction(const WorkloadConfig& cfg, const ZipfianGenerator& zipf,
                std::mt19937_64& rng, TxnId id, NodeId coordinator,
                std::uint32_t n_nodes)
{
    Transaction t;
    t.id = id;
    t.coordinator = coordinator;
    bool readOnly = cfg.read_only_fraction > 0 &&
                    uniform01(rng) < cfg.read_only_fraction;
    t.read_only = readOnly;

    std::set<std::uint64_t> seen;
    for (std::uint32_t i = 0; i < cfg.accesses_per_txn; ++i)
    {
        NodeId part = static_cast<NodeId>(rng() % n_nodes);
        std::uint64_t row = zipf.sample(rng);
        std::uint64_t key = rowKey(cfg, part, row);
        while (!seen.insert(key).second)
        {
            row = (row + 1) % cfg.rows_per_partition;
            key = rowKey(cfg, part, row);
        }
        AccessMode mode = AccessMode::Read;
        if (!readOnly && uniform01(rng) < cfg.write_prob)
        {
            mode = AccessMode::Write;
        }
        t.accesses[part].push_back(Access{key, mode});
    }
    if (!readOnly)
    {
        // A transaction with no writes at all is read-only in effect.
        bool anyWrite = false;
        for (const auto& [p, accs] : t.accesses)
        {
            for (const auto& a : accs)
            {
                anyWrite = anyWrite || a.mode == AccessMode::Write;
            }
        }
        t.read_only = !anyWrite;
    }
    for (const auto& [p, accs] : t.accesses)
    {
        t.participants.push_back(p);
    }
    return t;
}

// All of a participant's accesses are reads: relevant for the read-only
// optimizations in both protocols.
inline bool
participantReadOnly(const Transaction& t, NodeId p)
{
    auto it = t.accesses.find(p);
    if (it == t.accesses.end())
    {
        return true;
    }
    for (const auto& a : it->second)
    {
        if (a.mode == AccessMode::Write)
        {
            return false;
        }
    }
    return true;
}

} // namespace cornus
