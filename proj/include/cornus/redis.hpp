#pragma once

// Copyright 2026 the cornus authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Log storage backed by a real Redis instance. The write-once operation
// runs as a server-side script, so the conditional write is atomic at
// the storage service exactly like the in-memory reference; the smoke
// runner replays scripted sequences against both and demands identical
// results.

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "cornus/storage.hpp"

namespace cornus
{

// --- tiny RESP2 client ------------------------------------------------

class RedisClient
{
  public:
    struct Reply
    {
        enum class Kind
        {
            Nil,
            Int,
            Str,
            Error,
            Array
        };
        Kind kind = Kind::Nil;
        long long integer = 0;
        std::string str;
        std::vector<Reply> elems;
    };

    RedisClient() = default;

    ~RedisClient()
    {
        close();
    }

    RedisClient(const RedisClient&) = delete;
    RedisClient& operator=(const RedisClient&) = delete;

    bool
    connect(const std::string& host, int port, int timeout_ms = 500)
    {
        close();
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                        &res) != 0)
        {
            return false;
        }
        for (addrinfo* ai = res; ai; ai = ai->ai_next)
        {
            int fd = ::socket(ai->ai_family, ai->ai_socktype,
                              ai->ai_protocol);
            if (fd < 0)
            {
                continue;
            }
            ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
            int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
            if (rc != 0 && errno == EINPROGRESS)
            {
                pollfd pfd{fd, POLLOUT, 0};
                rc = ::poll(&pfd, 1, timeout_ms) == 1 ? 0 : -1;
                if (rc == 0)
                {
                    int err = 0;
                    socklen_t len = sizeof err;
                    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                    rc = err == 0 ? 0 : -1;
                }
            }
            if (rc == 0)
            {
                fd_ = fd;
                break;
            }
            ::close(fd);
        }
        freeaddrinfo(res);
        return fd_ >= 0;
    }

    bool
    connected() const
    {
        return fd_ >= 0;
    }

    void
    close()
    {
        if (fd_ >= 0)
        {
            ::close(fd_);
            fd_ = -1;
        }
    }

    std::optional<Reply>
    command(const std::vector<std::string>& args, int timeout_ms = 500)
    {
        if (fd_ < 0)
        {
            return std::nullopt;
        }
        std::string req = "*" + std::to_string(args.size()) + "\r\n";
        for (const auto& a : args)
        {
            req += "$" + std::to_string(a.size()) + "\r\n" + a + "\r\n";
        }
        if (!writeAll(req, timeout_ms))
        {
            close();
            return std::nullopt;
        }
        auto r = readReply(timeout_ms);
        if (!r)
        {
            close();
        }
        return r;
    }

  private:
    bool
    writeAll(const std::string& data, int timeout_ms)
    {
        size_t off = 0;
        while (off < data.size())
        {
            pollfd pfd{fd_, POLLOUT, 0};
            if (::poll(&pfd, 1, timeout_ms) != 1)
            {
                return false;
            }
            ssize_t n = ::send(fd_, data.data() + off, data.size() - off,
                               MSG_NOSIGNAL);
            if (n <= 0)
            {
                return false;
            }
            off += static_cast<size_t>(n);
        }
        return true;
    }

    bool
    fill(int timeout_ms)
    {
        pollfd pfd{fd_, POLLIN, 0};
        if (::poll(&pfd, 1, timeout_ms) != 1)
        {
            return false;
        }
        char tmp[4096];
        ssize_t n = ::recv(fd_, tmp, sizeof tmp, 0);
        if (n <= 0)
        {
            return false;
        }
        buf_.append(tmp, static_cast<size_t>(n));
        return true;
    }

    std::optional<std::string>
    readLine(int timeout_ms)
    {
        for (;;)
        {
            size_t eol = buf_.find("\r\n");
            if (eol != std::string::npos)
            {
                std::string line = buf_.substr(0, eol);
                buf_.erase(0, eol + 2);
                return line;
            }
            if (!fill(timeout_ms))
            {
                return std::nullopt;
            }
        }
    }

    std::optional<Reply>
    readReply(int timeout_ms)
    {
        auto line = readLine(timeout_ms);
        if (!line || line->empty())
        {
            return std::nullopt;
        }
        Reply r;
        char type = (*line)[0];
        std::string rest = line->substr(1);
        switch (type)
        {
        case '+':
            r.kind = Reply::Kind::Str;
            r.str = rest;
            return r;
        case '-':
            r.kind = Reply::Kind::Error;
            r.str = rest;
            return r;
        case ':':
            r.kind = Reply::Kind::Int;
            r.integer = std::stoll(rest);
            return r;
        case '$':
        {
            long long len = std::stoll(rest);
            if (len < 0)
            {
                r.kind = Reply::Kind::Nil;
                return r;
            }
            while (buf_.size() < static_cast<size_t>(len) + 2)
            {
                if (!fill(timeout_ms))
                {
                    return std::nullopt;
                }
            }
            r.kind = Reply::Kind::Str;
            r.str = buf_.substr(0, static_cast<size_t>(len));
            buf_.erase(0, static_cast<size_t>(len) + 2);
            return r;
        }
        case '*':
        {
            long long n = std::stoll(rest);
            r.kind = Reply::Kind::Array;
            for (long long i = 0; i < n; ++i)
            {
                auto el = readReply(timeout_ms);
                if (!el)
                {
                    return std::nullopt;
                }
                r.elems.push_back(std::move(*el));
            }
            return r;
        }
        default:
            return std::nullopt;
        }
    }

    int fd_ = -1;
    std::string buf_;
};

struct RedisEndpoint
{
    std::string host = "127.0.0.1";
    int port = 6379;
};

// Accepts "host", "host:port", or "redis://host:port".
inline std::optional<RedisEndpoint>
parse_endpoint(const std::string& text)
{
    std::string s = text;
    if (const std::string scheme = "redis://"; s.rfind(scheme, 0) == 0)
    {
        s = s.substr(scheme.size());
    }
    if (s.empty())
    {
        return std::nullopt;
    }
    RedisEndpoint ep;
    size_t colon = s.rfind(':');
    if (colon == std::string::npos)
    {
        ep.host = s;
        return ep;
    }
    ep.host = s.substr(0, colon);
    try
    {
        ep.port = std::stoi(s.substr(colon + 1));
    }
    catch (...)
    {
        return std::nullopt;
    }
    if (ep.host.empty() || ep.port <= 0 || ep.port > 65535)
    {
        return std::nullopt;
    }
    return ep;
}

// --- log store over Redis ----------------------------------------------

// Slot states are flattened to one integer per slot, matching what
// derive_state produces over the two-field in-memory cell:
//   (nil)=nothing, 1=yes vote, 2=aborted, 3=committed.
class RedisLogStore : public LogStore
{
  public:
    explicit RedisLogStore(const RedisEndpoint& ep, int timeout_ms = 500)
        : ep_(ep), timeout_ms_(timeout_ms)
    {
        client_.connect(ep_.host, ep_.port, timeout_ms_);
    }

    bool
    connected() const
    {
        return client_.connected();
    }

    bool
    ping()
    {
        auto r = client_.command({"PING"}, timeout_ms_);
        return r && r->kind == RedisClient::Reply::Kind::Str;
    }

    // Conditional write-once: set only if the slot is empty, and return
    // the slot state either way. One server-side script keeps the
    // check-and-set atomic under concurrent writers.
    StorageResult
    logOnce(const SlotKey& key, RecordType rec,
            const std::string* data = nullptr) override
    {
        static const char* kScript =
            "local cur = redis.call('GET', KEYS[1]) "
            "if not cur then "
            "  redis.call('SET', KEYS[1], ARGV[1]) "
            "  if ARGV[2] ~= '' then redis.call('SET', KEYS[2], ARGV[2]) end "
            "  return {1, tonumber(ARGV[1])} "
            "end "
            "return {0, tonumber(cur)}";
        auto r = client_.command(
            {"EVAL", kScript, "2", stateKey(key), dataKey(key),
             std::to_string(static_cast<int>(record_as_state(rec))),
             data ? *data : ""},
            timeout_ms_);
        if (!r || r->kind != RedisClient::Reply::Kind::Array ||
            r->elems.size() != 2)
        {
            return {StorageStatus::Unavailable, LogState::None, false,
                    SlotField::Vote};
        }
        StorageResult out;
        out.status = StorageStatus::Ok;
        out.wrote = r->elems[0].integer == 1;
        out.state = static_cast<LogState>(r->elems[1].integer);
        out.field = rec == RecordType::VoteYes ? SlotField::Vote
                                               : SlotField::Decision;
        return out;
    }

    // Unconditional append by the slot owner; the script enforces the
    // same transition matrix as the in-memory store (a decision cannot
    // reverse, votes never clobber decisions).
    StorageResult
    log(const SlotKey& key, RecordType rec,
        const std::string* data = nullptr) override
    {
        static const char* kScript =
            "local cur = redis.call('GET', KEYS[1]) "
            "local c = cur and tonumber(cur) or 0 "
            "local want = tonumber(ARGV[1]) "
            "if want == 1 then " // yes vote: only fills an empty slot
            "  if c == 0 then "
            "    redis.call('SET', KEYS[1], '1') "
            "    if ARGV[2] ~= '' then redis.call('SET', KEYS[2], ARGV[2]) end "
            "    return {1, 1} "
            "  end "
            "  return {0, c} "
            "end "
            "if want == 2 then " // abort decision
            "  if c == 3 then return {-1, c} end "
            "  if c == 2 then return {0, c} end "
            "  redis.call('SET', KEYS[1], '2') "
            "  return {1, 2} "
            "end "
            // commit decision
            "if c == 2 then return {-1, c} end "
            "if c == 3 then return {0, c} end "
            "redis.call('SET', KEYS[1], '3') "
            "return {1, 3}";
        auto r = client_.command(
            {"EVAL", kScript, "2", stateKey(key), dataKey(key),
             std::to_string(static_cast<int>(record_as_state(rec))),
             data ? *data : ""},
            timeout_ms_);
        if (!r || r->kind != RedisClient::Reply::Kind::Array ||
            r->elems.size() != 2)
        {
            return {StorageStatus::Unavailable, LogState::None, false,
                    SlotField::Vote};
        }
        StorageResult out;
        out.wrote = r->elems[0].integer == 1;
        out.status = r->elems[0].integer == -1
                         ? StorageStatus::IllegalTransition
                         : StorageStatus::Ok;
        out.state = static_cast<LogState>(r->elems[1].integer);
        out.field = rec == RecordType::VoteYes ? SlotField::Vote
                                               : SlotField::Decision;
        return out;
    }

    StorageResult
    readState(const SlotKey& key) override
    {
        auto r = client_.command({"GET", stateKey(key)}, timeout_ms_);
        if (!r || r->kind == RedisClient::Reply::Kind::Error)
        {
            return {StorageStatus::Unavailable, LogState::None, false,
                    SlotField::Vote};
        }
        StorageResult out;
        out.status = StorageStatus::Ok;
        out.state = r->kind == RedisClient::Reply::Kind::Nil
                        ? LogState::None
                        : static_cast<LogState>(std::stoi(r->str));
        return out;
    }

    bool
    flushSlots(const std::string& run_tag)
    {
        // Only our own namespaced keys; never FLUSHALL on a shared box.
        auto keys = client_.command(
            {"KEYS", "state-" + run_tag + "*"}, timeout_ms_);
        auto dkeys = client_.command(
            {"KEYS", "data-" + run_tag + "*"}, timeout_ms_);
        for (auto* batch : {&keys, &dkeys})
        {
            if (!*batch ||
                (*batch)->kind != RedisClient::Reply::Kind::Array)
            {
                return false;
            }
            for (const auto& k : (*batch)->elems)
            {
                client_.command({"DEL", k.str}, timeout_ms_);
            }
        }
        return true;
    }

    void
    setRunTag(const std::string& tag)
    {
        tag_ = tag;
    }

  private:
    std::string
    stateKey(const SlotKey& key) const
    {
        return "state-" + tag_ + std::to_string(key.log) + "-" +
               to_string(key.txn);
    }

    std::string
    dataKey(const SlotKey& key) const
    {
        return "data-" + tag_ + std::to_string(key.log) + "-" +
               to_string(key.txn);
    }

    RedisEndpoint ep_;
    int timeout_ms_;
    std::string tag_;
    RedisClient client_;
};

// --- memory/redis equivalence smoke --------------------------------------

struct SmokeStep
{
    enum class Op
    {
        LogOnce,
        Log,
        Read
    };
    Op op = Op::LogOnce;
    NodeId slot = 0;
    RecordType rec = RecordType::VoteYes;
};

// A scripted sequence that exercises every transition class: first
// writer wins, duplicate suppression, decisions over votes, and the two
// forbidden reversals.
inline std::vector<SmokeStep>
smokeScript()
{
    using Op = SmokeStep::Op;
    return {
        {Op::Read, 1, RecordType::VoteYes},    // empty slot
        {Op::LogOnce, 1, RecordType::VoteYes}, // vote lands
        {Op::LogOnce, 1, RecordType::Abort},   // loses the race
        {Op::Read, 1, RecordType::VoteYes},
        {Op::Log, 1, RecordType::Commit},      // decision over the vote
        {Op::Log, 1, RecordType::Commit},      // duplicate decision
        {Op::Log, 1, RecordType::Abort},       // forbidden reversal
        {Op::LogOnce, 2, RecordType::Abort},   // force-abort an empty slot
        {Op::LogOnce, 2, RecordType::VoteYes}, // vote arrives too late
        {Op::Log, 2, RecordType::Commit},      // forbidden over abort
        {Op::Log, 3, RecordType::Abort},       // unilateral abort, empty
        {Op::Log, 3, RecordType::VoteYes},     // late vote is a no-op
        {Op::Read, 3, RecordType::VoteYes},
        {Op::Log, 4, RecordType::Commit},      // decision w/o vote
        {Op::Read, 4, RecordType::VoteYes},
    };
}

struct SmokeOutcome
{
    bool ran = false; // false: storage unreachable, comparison skipped
    bool matched = false;
    std::string detail;
};

inline SmokeOutcome
runSmoke(RedisLogStore& redis, const std::string& run_tag)
{
    SmokeOutcome out;
    if (!redis.connected() || !redis.ping())
    {
        out.detail = "storage endpoint unreachable";
        return out;
    }
    redis.setRunTag(run_tag);
    if (!redis.flushSlots(run_tag))
    {
        out.detail = "could not clear the keyspace for the run tag";
        return out;
    }
    out.ran = true;
    MemoryLogStore mem;
    TxnId txn{7, 99};
    size_t step = 0;
    for (const SmokeStep& s : smokeScript())
    {
        SlotKey key{s.slot, txn};
        StorageResult a, b;
        switch (s.op)
        {
        case SmokeStep::Op::LogOnce:
            a = mem.logOnce(key, s.rec);
            b = redis.logOnce(key, s.rec);
            break;
        case SmokeStep::Op::Log:
            a = mem.log(key, s.rec);
            b = redis.log(key, s.rec);
            break;
        case SmokeStep::Op::Read:
            a = mem.readState(key);
            b = redis.readState(key);
            break;
        }
        if (a.status != b.status || a.state != b.state || a.wrote != b.wrote)
        {
            out.detail = "step " + std::to_string(step) +
                         ": memory {status=" +
                         std::to_string(static_cast<int>(a.status)) +
                         ",state=" + to_string(a.state) +
                         ",wrote=" + std::to_string(a.wrote) +
                         "} vs redis {status=" +
                         std::to_string(static_cast<int>(b.status)) +
                         ",state=" + to_string(b.state) +
                         ",wrote=" + std::to_string(b.wrote) + "}";
            return out;
        }
        ++step;
    }
    out.matched = true;
    out.detail = "all " + std::to_string(step) + " scripted operations agree";
    return out;
}

} // namespace cornus
