#pragma once

// Reference feasibility checks used by the test suite. These are
// deliberately independent of the admission engine: they expand request
// sets into explicit job lists and schedule slot by slot.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "eaciar/rational.hpp"
#include "eaciar/types.hpp"

namespace eaciar::oracle {

struct OracleJob {
    std::uint64_t release = 0;   // slot index, inclusive
    std::uint64_t deadline = 0;  // slot index, exclusive
    SlotCount demand = 0;
};

/// Expands every complete service window inside min(lifetime, horizon) into
/// a job with demand c_min. ASYNC requests become one job due at their
/// deadline. Partial trailing windows carry no obligation.
inline std::vector<OracleJob> expand_jobs(const std::vector<TrafficSpec>& specs,
                                          Slot bi_slots, std::uint32_t horizon_bis) {
    std::vector<OracleJob> jobs;
    for (const TrafficSpec& s : specs) {
        if (s.kind() == RequestKind::Async) {
            jobs.push_back({0, static_cast<std::uint64_t>(s.period_num) * bi_slots, s.c_min});
            continue;
        }
        const std::uint64_t alive_end =
            static_cast<std::uint64_t>(std::min<std::uint32_t>(s.lifetime, horizon_bis)) * bi_slots;
        const std::uint64_t ps = s.period_slots(bi_slots);
        for (std::uint64_t rel = 0; rel + ps <= alive_end; rel += ps)
            jobs.push_back({rel, rel + ps, s.c_min});
    }
    return jobs;
}

/// Preemptive EDF over single capacity, one slot at a time. EDF is optimal
/// for this job model, so the return value decides feasibility.
inline bool edf_feasible(std::vector<OracleJob> jobs, std::uint64_t total_slots) {
    for (const OracleJob& j : jobs)
        if (j.deadline > total_slots) return false;
    for (std::uint64_t t = 0; t < total_slots; ++t) {
        std::size_t pick = jobs.size();
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const OracleJob& j = jobs[i];
            if (j.demand <= 0 || j.release > t || j.deadline <= t) continue;
            if (pick == jobs.size() || j.deadline < jobs[pick].deadline) pick = i;
        }
        if (pick < jobs.size()) --jobs[pick].demand;
    }
    return std::all_of(jobs.begin(), jobs.end(),
                       [](const OracleJob& j) { return j.demand == 0; });
}

/// Exhaustive backtracking over per-slot choices. Exponential; refuses
/// instances beyond the slot cap. Idling while work is available never
/// helps feasibility, so only released pending jobs are branched on.
inline bool exhaustive_feasible(const std::vector<OracleJob>& jobs, std::uint64_t total_slots,
                                std::uint64_t slot_cap = 64) {
    if (total_slots > slot_cap)
        throw std::invalid_argument("exhaustive oracle: instance exceeds the slot cap");
    for (const OracleJob& j : jobs)
        if (j.deadline > total_slots) return false;

    std::vector<SlotCount> rem(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) rem[i] = jobs[i].demand;

    std::uint64_t nodes = 0;
    const std::uint64_t node_cap = 4'000'000;

    auto dfs = [&](auto&& self, std::uint64_t t) -> bool {
        if (++nodes > node_cap)
            throw std::runtime_error("exhaustive oracle: node budget exhausted");
        // Laxity prune: every pending job must still fit before its deadline.
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (rem[i] <= 0) continue;
            const std::uint64_t lo = std::max<std::uint64_t>(t, jobs[i].release);
            if (jobs[i].deadline < lo || static_cast<std::uint64_t>(rem[i]) > jobs[i].deadline - lo)
                return false;
        }
        if (t == total_slots) return true;

        // Candidates in EDF order so the first branch mirrors the EDF pick.
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (rem[i] > 0 && jobs[i].release <= t && t < jobs[i].deadline) cand.push_back(i);
        if (cand.empty()) return self(self, t + 1);
        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return jobs[a].deadline < jobs[b].deadline;
        });
        for (std::size_t i : cand) {
            --rem[i];
            if (self(self, t + 1)) { ++rem[i]; return true; }
            ++rem[i];
        }
        return false;
    };
    return dfs(dfs, 0);
}

/// Feasibility of a request set over a horizon, by explicit job expansion.
/// exhaustive=true cross-checks with backtracking instead of EDF.
inline bool brute_force_feasible(const std::vector<TrafficSpec>& specs, Slot bi_slots,
                                 std::uint32_t horizon_bis, bool exhaustive = false) {
    auto jobs = expand_jobs(specs, bi_slots, horizon_bis);
    const std::uint64_t total = static_cast<std::uint64_t>(horizon_bis) * bi_slots;
    return exhaustive ? exhaustive_feasible(jobs, total) : edf_feasible(std::move(jobs), total);
}

/// Conservative baseline that treats every ASYNC request as a periodic one
/// with period equal to its deadline: admit iff sum(c_min / period) <= 1.
inline bool periodic_async_baseline(const std::vector<TrafficSpec>& specs, Slot bi_slots) {
    Rational u = 0;
    for (const TrafficSpec& s : specs)
        u += make_rational(s.c_min, static_cast<std::int64_t>(s.period_slots(bi_slots)));
    return u <= 1;
}

}  // namespace eaciar::oracle
