#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornus/core.hpp"

namespace cornus
{

enum class MsgType : std::uint8_t
{
    VoteReq,      // coordinator -> participant, carries participant list
    VoteResp,     // participant -> coordinator, yes/no
    DecisionMsg,  // final decision broadcast / rebroadcast
    DecisionReq,  // cooperative termination: "do you know the outcome?"
    DecisionResp, // answer: COMMIT / ABORT / UNCERTAIN
    AccessReq,    // execution phase: batched lock+read/write request
    AccessResp,   // granted or NO_WAIT refusal
    ReleaseReq,   // early-abort cleanup of granted locks
};

inline char const*
to_string(MsgType t)
{
    switch (t)
    {
    case MsgType::VoteReq:
        return "VOTE_REQ";
    case MsgType::VoteResp:
        return "VOTE_RESP";
    case MsgType::DecisionMsg:
        return "DECISION";
    case MsgType::DecisionReq:
        return "DECISION_REQ";
    case MsgType::DecisionResp:
        return "DECISION_RESP";
    case MsgType::AccessReq:
        return "ACCESS_REQ";
    case MsgType::AccessResp:
        return "ACCESS_RESP";
    case MsgType::ReleaseReq:
        return "RELEASE";
    }
    return "?";
}

// What a peer can answer to a DecisionReq.
enum class PeerKnowledge : std::uint8_t
{
    Commit,
    Abort,
    Uncertain,
};

struct Message
{
    MsgType type = MsgType::VoteReq;
    TxnId txn;
    NodeId from = 0;
    NodeId to = 0;

    std::vector<NodeId> participants;    // VoteReq
    bool vote_yes = false;               // VoteResp
    Decision decision = Decision::Abort; // DecisionMsg
    PeerKnowledge knowledge = PeerKnowledge::Uncertain; // DecisionResp
    std::vector<Access> accesses;        // AccessReq
    bool granted = false;                // AccessResp

    friend bool operator==(const Message& a, const Message& b) = default;
};

// One-token text encoding ("v1|TYPE|..."): deterministic, no spaces, so an
// encoded message embeds verbatim in a trace line. Bump the version tag on
// any change to the field layout.

inline std::string
encode(const Message& m)
{
    std::ostringstream os;
    os << "v1|" << to_string(m.type) << "|f" << m.from << "|t" << m.to << '|'
       << to_string(m.txn);
    switch (m.type)
    {
    case MsgType::VoteReq:
        os << "|p";
        for (size_t i = 0; i < m.participants.size(); ++i)
        {
            os << (i ? "," : "") << m.participants[i];
        }
        break;
    case MsgType::VoteResp:
        os << '|' << (m.vote_yes ? "yes" : "no");
        break;
    case MsgType::DecisionMsg:
        os << '|' << to_string(m.decision);
        break;
    case MsgType::DecisionReq:
        break;
    case MsgType::DecisionResp:
        os << '|'
           << (m.knowledge == PeerKnowledge::Commit    ? "COMMIT"
               : m.knowledge == PeerKnowledge::Abort   ? "ABORT"
                                                       : "UNCERTAIN");
        break;
    case MsgType::AccessReq:
        os << "|a";
        for (size_t i = 0; i < m.accesses.size(); ++i)
        {
            os << (i ? "," : "") << m.accesses[i].key
               << (m.accesses[i].mode == AccessMode::Write ? 'w' : 'r');
        }
        break;
    case MsgType::AccessResp:
        os << '|' << (m.granted ? "granted" : "refused");
        break;
    case MsgType::ReleaseReq:
        break;
    }
    return os.str();
}

struct MessageParseError : std::runtime_error
{
    explicit MessageParseError(const std::string& s)
        : std::runtime_error("malformed message: " + s)
    {
    }
};

inline Message
decode(const std::string& s)
{
    std::vector<std::string> parts;
    size_t pos = 0;
    while (pos <= s.size())
    {
        size_t bar = s.find('|', pos);
        if (bar == std::string::npos)
        {
            parts.push_back(s.substr(pos));
            break;
        }
        parts.push_back(s.substr(pos, bar - pos));
        pos = bar + 1;
    }
    if (parts.size() < 5 || parts[0] != "v1" || parts[2].empty() ||
        parts[2][0] != 'f' || parts[3].empty() || parts[3][0] != 't')
    {
        throw MessageParseError(s);
    }

    Message m;
    try
    {
        m.from = static_cast<NodeId>(std::stoul(parts[2].substr(1)));
        m.to = static_cast<NodeId>(std::stoul(parts[3].substr(1)));
        auto colon = parts[4].find(':');
        if (parts[4].empty() || parts[4][0] != 'c' ||
            colon == std::string::npos)
        {
            throw MessageParseError(s);
        }
        m.txn.coordinator =
            static_cast<NodeId>(std::stoul(parts[4].substr(1, colon - 1)));
        m.txn.seq = std::stoull(parts[4].substr(colon + 1));

        const std::string& type = parts[1];
        auto extra = [&]() -> const std::string& {
            if (parts.size() < 6)
            {
                throw MessageParseError(s);
            }
            return parts[5];
        };
        auto splitList = [](const std::string& body) {
            std::vector<std::string> out;
            if (body.empty())
            {
                return out;
            }
            size_t p = 0;
            while (p <= body.size())
            {
                size_t comma = body.find(',', p);
                if (comma == std::string::npos)
                {
                    out.push_back(body.substr(p));
                    break;
                }
                out.push_back(body.substr(p, comma - p));
                p = comma + 1;
            }
            return out;
        };

        if (type == "VOTE_REQ")
        {
            m.type = MsgType::VoteReq;
            const std::string& e = extra();
            if (e.empty() || e[0] != 'p')
            {
                throw MessageParseError(s);
            }
            for (const auto& tok : splitList(e.substr(1)))
            {
                m.participants.push_back(
                    static_cast<NodeId>(std::stoul(tok)));
            }
        }
        else if (type == "VOTE_RESP")
        {
            m.type = MsgType::VoteResp;
            m.vote_yes = extra() == "yes";
            if (!m.vote_yes && extra() != "no")
            {
                throw MessageParseError(s);
            }
        }
        else if (type == "DECISION")
        {
            m.type = MsgType::DecisionMsg;
            if (extra() == "COMMIT")
            {
                m.decision = Decision::Commit;
            }
            else if (extra() == "ABORT")
            {
                m.decision = Decision::Abort;
            }
            else
            {
                throw MessageParseError(s);
            }
        }
        else if (type == "DECISION_REQ")
        {
            m.type = MsgType::DecisionReq;
        }
        else if (type == "DECISION_RESP")
        {
            m.type = MsgType::DecisionResp;
            if (extra() == "COMMIT")
            {
                m.knowledge = PeerKnowledge::Commit;
            }
            else if (extra() == "ABORT")
            {
                m.knowledge = PeerKnowledge::Abort;
            }
            else if (extra() == "UNCERTAIN")
            {
                m.knowledge = PeerKnowledge::Uncertain;
            }
            else
            {
                throw MessageParseError(s);
            }
        }
        else if (type == "ACCESS_REQ")
        {
            m.type = MsgType::AccessReq;
            const std::string& e = extra();
            if (e.empty() || e[0] != 'a')
            {
                throw MessageParseError(s);
            }
            for (const auto& tok : splitList(e.substr(1)))
            {
                if (tok.size() < 2 ||
                    (tok.back() != 'r' && tok.back() != 'w'))
                {
                    throw MessageParseError(s);
                }
                m.accesses.push_back(
                    Access{std::stoull(tok.substr(0, tok.size() - 1)),
                           tok.back() == 'w' ? AccessMode::Write
                                             : AccessMode::Read});
            }
        }
        else if (type == "ACCESS_RESP")
        {
            m.type = MsgType::AccessResp;
            m.granted = extra() == "granted";
            if (!m.granted && extra() != "refused")
            {
                throw MessageParseError(s);
            }
        }
        else if (type == "RELEASE")
        {
            m.type = MsgType::ReleaseReq;
        }
        else
        {
            throw MessageParseError(s);
        }
    }
    catch (const MessageParseError&)
    {
        throw;
    }
    catch (const std::exception&)
    {
        throw MessageParseError(s);
    }
    return m;
}

} // namespace cornus
