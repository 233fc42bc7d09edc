#pragma once

#include <algorithm>
#include <vector>

#include "eaciar/jobs.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

/// Earliest-fit: fills up to `demand` empty slots of `bi` in [from, to),
/// left to right. Returns the number of slots actually taken.
inline SlotCount allocate_window(BiSchedule& bi, Slot from, Slot to, SlotCount demand,
                                 RequestId owner) {
    to = std::min(to, bi.size());
    SlotCount got = 0;
    for (Slot pos = from; pos < to && got < demand; ++pos) {
        if (bi.slots[pos] == kNoOwner) {
            bi.slots[pos] = owner;
            ++got;
        }
    }
    return got;
}

/// Earliest-fit across a LongSchedule, absolute slot range [from, to).
inline SlotCount allocate_span(LongSchedule& ls, Slot bi_slots, std::uint64_t from,
                               std::uint64_t to, SlotCount demand, RequestId owner) {
    SlotCount got = 0;
    for (std::uint32_t b = static_cast<std::uint32_t>(from / bi_slots);
         b < ls.d_max() && got < demand; ++b) {
        const std::uint64_t bi_start = static_cast<std::uint64_t>(b) * bi_slots;
        if (bi_start >= to) break;
        const Slot lo = from > bi_start ? static_cast<Slot>(from - bi_start) : 0;
        const Slot hi = static_cast<Slot>(std::min<std::uint64_t>(bi_slots, to - bi_start));
        got += allocate_window(ls.bis[b], lo, hi, demand - got, owner);
    }
    return got;
}

/// EDF allocation of in-BI jobs (non-decreasing deadline, ties by owner id).
/// Every job must fit inside its own window; the utilization gate makes a
/// shortfall impossible, so one is an internal error.
inline void allocate_bi_jobs(BiSchedule& bi, std::vector<Job> jobs) {
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        return a.deadline != b.deadline ? a.deadline < b.deadline : a.owner < b.owner;
    });
    for (const Job& j : jobs) {
        const SlotCount got = allocate_window(bi, j.release, j.deadline, j.demand, j.owner);
        detail::require(got == j.demand, "ISO_F job did not fit inside its window");
    }
}

/// One ISO_M (or runtime EDF) allocation entry for the current BI. `tier`
/// grades how strong the demand's claim is: 0 for demand still owed toward a
/// c_min, 1 for top-up service beyond it, 2 for a period the owner's
/// lifetime cuts short. Tiers 0 and 1 break equal-deadline ties (a full BI
/// starves top-ups before guarantees); tier 2 ranks behind every other
/// demand regardless of deadline, because a period that cannot complete is
/// never held to any guarantee and its slots are pure scavenge.
struct MultipleEntry {
    RequestId id = 0;
    std::uint32_t d_curr = 0;
    SlotCount demand = 0;
    SlotCount allocated = 0;
    std::uint8_t tier = 0;
};

/// EDF allocation of ISO_M demands within one BI (non-decreasing d_curr, ties
/// by tier then id; tier 2 after everything), earliest-fit from slot 0. A
/// full BI is not an error: the remainder carries to later BIs of the same
/// period.
inline void allocate_bi_multiples(BiSchedule& bi, std::vector<MultipleEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const MultipleEntry& a, const MultipleEntry& b) {
        const bool a_cut = a.tier == 2, b_cut = b.tier == 2;
        if (a_cut != b_cut) return b_cut;
        if (a.d_curr != b.d_curr) return a.d_curr < b.d_curr;
        return a.tier != b.tier ? a.tier < b.tier : a.id < b.id;
    });
    for (auto& e : entries)
        e.allocated = allocate_window(bi, 0, bi.size(), e.demand, e.id);
}

}  // namespace eaciar
