#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Wing-Gong linearizability search over histories of slot operations.
// Small histories only (the search is exponential in the worst case);
// the tests keep them at eight operations.

#include <algorithm>
#include <optional>
#include <vector>

#include "cornus/core.hpp"
#include "cornus/storage.hpp"

namespace cornus::test
{

struct SlotOp
{
    enum class Kind
    {
        LogOnce,
        Log,
        Read
    };
    Kind kind = Kind::LogOnce;
    RecordType rec = RecordType::VoteYes;
    VirtualTime invoked = 0;
    VirtualTime responded = 0;
    // observed outcome
    StorageStatus status = StorageStatus::Ok;
    LogState state = LogState::None;
    bool wrote = false;
};

// Applies one operation to the sequential model and says whether the
// observed outcome is what the model produces.
inline bool
applyMatches(MemoryLogStore& model, const SlotOp& op, const SlotKey& key)
{
    StorageResult r;
    switch (op.kind)
    {
    case SlotOp::Kind::LogOnce:
        r = model.logOnce(key, op.rec);
        break;
    case SlotOp::Kind::Log:
        r = model.log(key, op.rec);
        break;
    case SlotOp::Kind::Read:
        r = model.readState(key);
        break;
    }
    return r.status == op.status && r.state == op.state &&
           r.wrote == op.wrote;
}

// True when some permutation of the history that respects real-time
// order (an op whose response precedes another's invocation must come
// first) replays cleanly against the sequential slot.
inline bool
linearizable(std::vector<SlotOp> history)
{
    const size_t n = history.size();
    std::vector<bool> taken(n, false);
    std::vector<size_t> order;
    order.reserve(n);

    // Depth-first search over linearization prefixes with undo; the
    // model is rebuilt per step (slots are tiny).
    struct Frame
    {
        size_t next_candidate = 0;
    };
    std::vector<Frame> stack(1);
    while (true)
    {
        if (order.size() == n)
        {
            return true;
        }
        bool advanced = false;
        for (size_t i = stack.back().next_candidate; i < n; ++i)
        {
            if (taken[i])
            {
                continue;
            }
            // i is a candidate if no untaken op completed before i began.
            bool minimal = true;
            for (size_t j = 0; j < n; ++j)
            {
                if (!taken[j] && j != i &&
                    history[j].responded < history[i].invoked)
                {
                    minimal = false;
                    break;
                }
            }
            if (!minimal)
            {
                continue;
            }
            // Replay prefix + i against a fresh model.
            MemoryLogStore model;
            SlotKey key{1, TxnId{0, 1}};
            bool ok = true;
            for (size_t k : order)
            {
                if (!applyMatches(model, history[k], key))
                {
                    ok = false;
                    break;
                }
            }
            if (ok && !applyMatches(model, history[i], key))
            {
                ok = false;
            }
            if (!ok)
            {
                continue;
            }
            stack.back().next_candidate = i + 1;
            taken[i] = true;
            order.push_back(i);
            stack.push_back(Frame{});
            advanced = true;
            break;
        }
        if (advanced)
        {
            continue;
        }
        // Backtrack.
        stack.pop_back();
        if (stack.empty())
        {
            return false;
        }
        taken[order.back()] = false;
        order.pop_back();
    }
}

} // namespace cornus::test
