#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornus/core.hpp"

namespace cornus
{

// Stable 64-bit digest (FNV-1a). std::hash is not specified to be stable
// across runs or platforms, and trace digests end up in golden files.
inline std::uint64_t
fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull)
{
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

enum class TraceKind : std::uint8_t
{
    Send,         // message handed to the network
    Deliver,      // message handed to a (live) destination node
    SlotWrite,    // storage mutated a slot field, at linearization time
    Decide,       // a node adopted a final decision for a txn
    Crash,        // node (or kStorageNode) failed
    Recover,      // node (or kStorageNode) restarted
    ReplyToCaller // coordinator answered the client that submitted the txn
};

inline char const*
to_string(TraceKind k)
{
    switch (k)
    {
    case TraceKind::Send:
        return "SEND";
    case TraceKind::Deliver:
        return "DELIVER";
    case TraceKind::SlotWrite:
        return "SLOT_WRITE";
    case TraceKind::Decide:
        return "DECIDE";
    case TraceKind::Crash:
        return "CRASH";
    case TraceKind::Recover:
        return "RECOVER";
    case TraceKind::ReplyToCaller:
        return "REPLY";
    }
    return "?";
}

struct TraceEvent
{
    VirtualTime time = 0;
    TraceKind kind = TraceKind::Send;
    NodeId node = 0; // acting node; for SLOT_WRITE, the writer

    TxnId txn;

    // Send/Deliver
    NodeId peer = 0;          // destination (Send) or source (Deliver)
    std::string msg;          // encoded message payload

    // SlotWrite
    NodeId slot_owner = 0;    // whose log the slot belongs to
    SlotField field = SlotField::Vote;
    RecordType value = RecordType::Abort;
    VirtualTime issued_at = 0; // when the writer issued the op; a node may
                               // not issue writes after its crash, but ops
                               // already in flight do land afterwards

    // Decide / ReplyToCaller
    Decision decision = Decision::Abort;

    friend bool operator==(const TraceEvent& a, const TraceEvent& b) = default;
};

inline std::string
serialize(const TraceEvent& e)
{
    std::ostringstream os;
    os << e.time << ' ' << to_string(e.kind) << " node=" << e.node;
    switch (e.kind)
    {
    case TraceKind::Send:
    case TraceKind::Deliver:
        os << " peer=" << e.peer << " txn=" << to_string(e.txn)
           << " msg=" << e.msg;
        break;
    case TraceKind::SlotWrite:
        os << " txn=" << to_string(e.txn) << " slot=" << e.slot_owner
           << " field=" << (e.field == SlotField::Vote ? "vote" : "decision")
           << " value=" << to_string(e.value) << " issued=" << e.issued_at;
        break;
    case TraceKind::Decide:
    case TraceKind::ReplyToCaller:
        os << " txn=" << to_string(e.txn)
           << " decision=" << to_string(e.decision);
        break;
    case TraceKind::Crash:
    case TraceKind::Recover:
        break;
    }
    return os.str();
}

struct TraceParseError : std::runtime_error
{
    explicit TraceParseError(const std::string& line)
        : std::runtime_error("malformed trace line: " + line)
    {
    }
};

namespace detail
{

inline std::string
traceField(const std::vector<std::string>& toks, std::string_view key,
           const std::string& line)
{
    for (const auto& t : toks)
    {
        if (t.size() > key.size() && t.compare(0, key.size(), key) == 0 &&
            t[key.size()] == '=')
        {
            return t.substr(key.size() + 1);
        }
    }
    throw TraceParseError(line);
}

inline TxnId
parseTxnId(const std::string& s, const std::string& line)
{
    // "c<coordinator>:<seq>"
    auto colon = s.find(':');
    if (s.size() < 4 || s[0] != 'c' || colon == std::string::npos)
    {
        throw TraceParseError(line);
    }
    try
    {
        return TxnId{static_cast<NodeId>(std::stoul(s.substr(1, colon - 1))),
                     std::stoull(s.substr(colon + 1))};
    }
    catch (const std::exception&)
    {
        throw TraceParseError(line);
    }
}

} // namespace detail

inline TraceEvent
parse_trace_line(const std::string& line)
{
    std::istringstream is(line);
    std::vector<std::string> toks;
    std::string t;
    while (is >> t)
    {
        toks.push_back(t);
    }
    if (toks.size() < 3)
    {
        throw TraceParseError(line);
    }

    TraceEvent e;
    try
    {
        e.time = std::stoull(toks[0]);
    }
    catch (const std::exception&)
    {
        throw TraceParseError(line);
    }

    const std::string& kind = toks[1];
    auto field = [&](std::string_view key) {
        return detail::traceField(toks, key, line);
    };
    auto fieldU64 = [&](std::string_view key) -> std::uint64_t {
        try
        {
            return std::stoull(field(key));
        }
        catch (const TraceParseError&)
        {
            throw;
        }
        catch (const std::exception&)
        {
            throw TraceParseError(line);
        }
    };

    e.node = static_cast<NodeId>(fieldU64("node"));
    if (kind == "SEND" || kind == "DELIVER")
    {
        e.kind = kind == "SEND" ? TraceKind::Send : TraceKind::Deliver;
        e.peer = static_cast<NodeId>(fieldU64("peer"));
        e.txn = detail::parseTxnId(field("txn"), line);
        e.msg = field("msg");
    }
    else if (kind == "SLOT_WRITE")
    {
        e.kind = TraceKind::SlotWrite;
        e.txn = detail::parseTxnId(field("txn"), line);
        e.slot_owner = static_cast<NodeId>(fieldU64("slot"));
        std::string f = field("field");
        if (f == "vote")
        {
            e.field = SlotField::Vote;
        }
        else if (f == "decision")
        {
            e.field = SlotField::Decision;
        }
        else
        {
            throw TraceParseError(line);
        }
        std::string v = field("value");
        if (v == "VOTE_YES")
        {
            e.value = RecordType::VoteYes;
        }
        else if (v == "ABORT")
        {
            e.value = RecordType::Abort;
        }
        else if (v == "COMMIT")
        {
            e.value = RecordType::Commit;
        }
        else
        {
            throw TraceParseError(line);
        }
        e.issued_at = fieldU64("issued");
    }
    else if (kind == "DECIDE" || kind == "REPLY")
    {
        e.kind = kind == "DECIDE" ? TraceKind::Decide : TraceKind::ReplyToCaller;
        e.txn = detail::parseTxnId(field("txn"), line);
        std::string d = field("decision");
        if (d == "COMMIT")
        {
            e.decision = Decision::Commit;
        }
        else if (d == "ABORT")
        {
            e.decision = Decision::Abort;
        }
        else
        {
            throw TraceParseError(line);
        }
    }
    else if (kind == "CRASH")
    {
        e.kind = TraceKind::Crash;
    }
    else if (kind == "RECOVER")
    {
        e.kind = TraceKind::Recover;
    }
    else
    {
        throw TraceParseError(line);
    }
    return e;
}

using Trace = std::vector<TraceEvent>;

inline std::string
serialize(const Trace& tr)
{
    std::string out;
    for (const auto& e : tr)
    {
        out += serialize(e);
        out += '\n';
    }
    return out;
}

inline Trace
parse_trace(const std::string& text)
{
    Trace tr;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
    {
        if (!line.empty())
        {
            tr.push_back(parse_trace_line(line));
        }
    }
    return tr;
}

inline std::uint64_t
trace_digest(const Trace& tr)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& e : tr)
    {
        h = fnv1a64(serialize(e), h);
        h = fnv1a64("\n", h);
    }
    return h;
}

} // namespace cornus
