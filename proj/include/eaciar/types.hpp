#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eaciar {

using RequestId = std::uint32_t;
using Slot = std::uint32_t;       // slot index within a BI; 1 slot = 1 us
using SlotCount = std::int64_t;   // signed: C_remain of an ISO_M may go negative
using BiIndex = std::uint64_t;

// Sentinel owner for an unallocated slot. Valid request ids start at 1.
inline constexpr RequestId kNoOwner = 0;

// Default BI length: 1 TU = 1024 us.
inline constexpr Slot kDefaultBiSlots = 1024;

enum class RequestType : std::uint8_t { Iso, Async };

// Structural subtype, derived from the period encoding.
enum class RequestKind : std::uint8_t { IsoMultiple, IsoFraction, Async };

namespace detail {

// Internal-error check for conditions the admission gate is supposed to make
// impossible (the pseudocode's "this should not happen" exits).
inline void require(bool cond, const char* what) {
    if (!cond) throw std::logic_error(std::string("internal error: ") + what);
}

}  // namespace detail

/// Immutable parameters of an arriving request (DMG TSpec subset).
///
/// The period is a rational multiple of one BI, period_num/period_den:
///   ISO, den == 1            -> ISO_M, period of `num` BIs
///   ISO, num == 1, den > 1   -> ISO_F, period of 1/den BI
///   ASYNC                    -> den == 1, num = deadline in BIs
struct TrafficSpec {
    RequestId id = 0;
    RequestType type = RequestType::Iso;
    std::uint32_t period_num = 1;
    std::uint32_t period_den = 1;
    SlotCount c_min = 0;        // us per period (ASYNC: one time)
    SlotCount c_max = 0;        // us per period; ISO only, reserved for ASYNC
    std::uint32_t lifetime = 1; // BIs until the request leaves

    RequestKind kind() const {
        if (type == RequestType::Async) return RequestKind::Async;
        return period_den > 1 ? RequestKind::IsoFraction : RequestKind::IsoMultiple;
    }

    bool is_iso() const { return type == RequestType::Iso; }

    // Period length in slots.
    SlotCount period_slots(Slot bi_slots) const {
        if (period_den > 1) return static_cast<SlotCount>(bi_slots / period_den);
        return static_cast<SlotCount>(period_num) * bi_slots;
    }

    bool operator==(const TrafficSpec&) const = default;
};

/// Validates a spec against the type invariants. Returns one message per
/// problem; empty means valid.
inline std::vector<std::string> validate(const TrafficSpec& s, Slot bi_slots) {
    std::vector<std::string> problems;
    auto bad = [&](const std::string& m) { problems.push_back(m); };

    if (s.id == kNoOwner) bad("id must be >= 1");
    if (s.period_num == 0 || s.period_den == 0) bad("period numerator and denominator must be positive");
    if (s.period_num > 1 && s.period_den > 1)
        bad("period must be an integer multiple (num/1) or integer fraction (1/den) of a BI");
    if (s.c_min < 1) bad("c_min must be >= 1");
    if (s.lifetime < 1) bad("lifetime must be >= 1");

    switch (s.kind()) {
    case RequestKind::IsoFraction:
        if (s.c_min > s.c_max) bad("c_min must not exceed c_max");
        if (bi_slots % s.period_den != 0) {
            bad("ISO_F period 1/" + std::to_string(s.period_den) + " BI does not divide bi_slots=" +
                std::to_string(bi_slots) + " evenly");
        } else {
            if (s.c_min > s.period_slots(bi_slots))
                bad("c_min exceeds the per-period slot count " + std::to_string(s.period_slots(bi_slots)));
            if (s.c_max > s.period_slots(bi_slots))
                bad("c_max exceeds the per-period slot count " + std::to_string(s.period_slots(bi_slots)));
        }
        break;
    case RequestKind::IsoMultiple:
        if (s.c_min > s.c_max) bad("c_min must not exceed c_max");
        if (s.c_min > s.period_slots(bi_slots))
            bad("c_min exceeds the period length " + std::to_string(s.period_slots(bi_slots)) + " slots");
        if (s.c_max > s.period_slots(bi_slots))
            bad("c_max exceeds the period length " + std::to_string(s.period_slots(bi_slots)) + " slots");
        break;
    case RequestKind::Async:
        if (s.lifetime != s.period_num)
            bad("ASYNC lifetime must equal its deadline (" + std::to_string(s.period_num) + " BIs)");
        break;
    }
    return problems;
}

/// Mutable per-request table entry.
struct RequestRecord {
    TrafficSpec spec;
    SlotCount c_op = 0;            // operational per-period allocation; ISO only
    SlotCount c_budget = 0;        // c_op ceiling for the period in progress; ISO_M only.
                                   // Never raised mid-period: a raise would let the request
                                   // catch up right before its deadline and squeeze the
                                   // c_min of another request due at the same time.
    SlotCount c_remain = 0;        // remaining toward c_min this period; ISO_M and ASYNC
    std::uint32_t t_remain_life = 0; // BIs until departure
    std::uint32_t d_curr = 0;      // current deadline in BIs; ISO_M and ASYNC

    RequestId id() const { return spec.id; }
    RequestKind kind() const { return spec.kind(); }

    bool operator==(const RequestRecord&) const = default;
};

/// Fresh table entry for a newly admitted request.
inline RequestRecord make_record(const TrafficSpec& spec) {
    RequestRecord r;
    r.spec = spec;
    r.c_op = spec.c_min;
    r.c_budget = spec.c_min;
    r.t_remain_life = spec.lifetime;
    if (spec.kind() != RequestKind::IsoFraction) {
        r.c_remain = spec.c_min;
        r.d_curr = spec.period_num;
    }
    return r;
}

/// One allocation instance of a request. For ISO_F, release/deadline are slot
/// offsets within the BI; the containing BI supplies the absolute position.
struct Job {
    RequestId owner = 0;
    Slot release = 0;
    Slot deadline = 0;   // exclusive
    SlotCount demand = 0;
};

/// Slot occupancy of one beacon interval.
struct BiSchedule {
    std::vector<RequestId> slots;

    BiSchedule() = default;
    explicit BiSchedule(Slot bi_slots) : slots(bi_slots, kNoOwner) {}

    Slot size() const { return static_cast<Slot>(slots.size()); }

    SlotCount owned_by(RequestId id) const {
        return std::count(slots.begin(), slots.end(), id);
    }
    SlotCount empty_count() const { return owned_by(kNoOwner); }

    bool operator==(const BiSchedule&) const = default;
};

/// The D_max-BI schedule computed when ASYNC requests are present.
struct LongSchedule {
    std::vector<BiSchedule> bis;

    std::uint32_t d_max() const { return static_cast<std::uint32_t>(bis.size()); }

    SlotCount empty_count() const {
        SlotCount n = 0;
        for (const auto& bi : bis) n += bi.empty_count();
        return n;
    }

    bool operator==(const LongSchedule&) const = default;
};

struct ActiveLongSchedule {
    LongSchedule sched;
    BiIndex start_bi = 0;   // first BI the schedule covers

    bool operator==(const ActiveLongSchedule&) const = default;
};

/// Global scheduler state: the two request sets plus run-level configuration.
struct SystemState {
    Slot bi_slots = kDefaultBiSlots;
    BiIndex current_bi = 0;
    std::vector<RequestRecord> iso;     // kept sorted by id
    std::vector<RequestRecord> async_reqs;
    std::optional<ActiveLongSchedule> long_schedule;  // present iff async_reqs nonempty

    bool empty() const { return iso.empty() && async_reqs.empty(); }

    const RequestRecord* find(RequestId id) const {
        for (const auto& r : iso)
            if (r.id() == id) return &r;
        for (const auto& r : async_reqs)
            if (r.id() == id) return &r;
        return nullptr;
    }
    RequestRecord* find(RequestId id) {
        return const_cast<RequestRecord*>(static_cast<const SystemState*>(this)->find(id));
    }

    void insert(const RequestRecord& rec) {
        auto& set = rec.spec.type == RequestType::Iso ? iso : async_reqs;
        auto pos = std::find_if(set.begin(), set.end(),
                                [&](const RequestRecord& r) { return r.id() > rec.id(); });
        set.insert(pos, rec);
    }

    void erase(RequestId id) {
        auto drop = [&](std::vector<RequestRecord>& set) {
            std::erase_if(set, [&](const RequestRecord& r) { return r.id() == id; });
        };
        drop(iso);
        drop(async_reqs);
    }

    bool operator==(const SystemState&) const = default;
};

inline const char* to_string(RequestType t) {
    return t == RequestType::Iso ? "ISO" : "ASYNC";
}

inline const char* to_string(RequestKind k) {
    switch (k) {
    case RequestKind::IsoMultiple: return "ISO_M";
    case RequestKind::IsoFraction: return "ISO_F";
    default: return "ASYNC";
    }
}

}  // namespace eaciar
