#pragma once

#include <algorithm>
#include <vector>

#include "eaciar/admission.hpp"
#include "eaciar/alloc.hpp"
#include "eaciar/table.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

/// Per-BI execution mode. Playback replays the active LongSchedule; PureEdf
/// computes an EDF schedule from the request table each BI.
struct RuntimeMode {
    enum class Kind : std::uint8_t { Playback, PureEdf };

    Kind kind = Kind::PureEdf;
    std::uint32_t cursor = 0;   // playback position within the LongSchedule

    // ISO_M requests still finishing a period that began under Playback.
    // Until their next period reset they are allocated max(C_remain, 0)
    // instead of C_op.
    std::vector<RequestId> settling;

    bool is_settling(RequestId id) const {
        return std::find(settling.begin(), settling.end(), id) != settling.end();
    }
};

/// Mode matching a (possibly freshly loaded) state.
inline RuntimeMode mode_for(const SystemState& st) {
    RuntimeMode m;
    if (st.long_schedule) {
        m.kind = RuntimeMode::Kind::Playback;
        m.cursor = static_cast<std::uint32_t>(st.current_bi - st.long_schedule->start_bi);
    }
    return m;
}

namespace detail {

inline BiSchedule pure_edf_bi(const SystemState& st, const RuntimeMode& mode) {
    BiSchedule bi(st.bi_slots);

    std::vector<Job> frac_jobs;
    for (const auto& r : st.iso) {
        if (r.kind() != RequestKind::IsoFraction) continue;
        for (Job j : expand_iso_f_jobs(r, st.bi_slots)) {
            j.demand = r.c_op;
            frac_jobs.push_back(j);
        }
    }
    allocate_bi_jobs(bi, std::move(frac_jobs));

    // ISO_M demand splits into what is still owed toward the c_min (tier 0)
    // and top-up service beyond it (tier 1). Arrivals and departures can
    // transiently pack more equal-deadline demand into a BI than it has
    // slots, and the shortfall must then land on top-ups: a top-up granted
    // ahead of another request's unmet c_min at the same deadline would turn
    // surplus service into a guarantee violation. A request whose remaining
    // lifetime ends before the current period does demotes entirely (tier
    // 2): a period its owner cannot stay for is never held to its c_min, and
    // slots it grabs from completable periods are unrecoverable.
    std::vector<MultipleEntry> mult;
    for (const auto& r : st.iso) {
        if (r.kind() != RequestKind::IsoMultiple) continue;
        const SlotCount demand =
            mode.is_settling(r.id())
                ? std::max<SlotCount>(r.c_remain, 0)
                : std::max<SlotCount>(0, r.c_budget - (r.spec.c_min - r.c_remain));
        if (r.t_remain_life < r.d_curr) {
            if (demand > 0) mult.push_back({r.id(), r.d_curr, demand, 0, 2});
            continue;
        }
        const SlotCount owed = std::clamp<SlotCount>(r.c_remain, 0, demand);
        if (owed > 0) mult.push_back({r.id(), r.d_curr, owed, 0, 0});
        if (demand > owed) mult.push_back({r.id(), r.d_curr, demand - owed, 0, 1});
    }
    allocate_bi_multiples(bi, mult);
    return bi;
}

}  // namespace detail

/// The schedule to execute in current_bi. Playback returns the stored BI and
/// advances the cursor; PureEdf computes the per-BI EDF allocation.
inline BiSchedule next_bi_schedule(const SystemState& st, RuntimeMode& mode) {
    if (mode.kind == RuntimeMode::Kind::Playback) {
        detail::require(st.long_schedule.has_value(), "playback without an active LongSchedule");
        const ActiveLongSchedule& act = *st.long_schedule;
        detail::require(mode.cursor < act.sched.d_max(), "playback cursor past the horizon");
        detail::require(st.current_bi == act.start_bi + mode.cursor, "playback cursor drift");
        return act.sched.bis[mode.cursor++];
    }
    return detail::pure_edf_bi(st, mode);
}

/// Syncs the runtime mode with an admission outcome. Record mutations
/// (C_op values, the stored LongSchedule) were already applied by
/// admit/recompute; this switches the execution mode from the next BI.
inline void install_outcome(const SystemState& st, RuntimeMode& mode,
                            const AdmissionOutcome& outcome) {
    if (!outcome.accepted()) return;
    if (outcome.mode == OutcomeMode::LongSchedule) {
        mode.kind = RuntimeMode::Kind::Playback;
        mode.cursor = 0;
        mode.settling.clear();
        return;
    }
    const bool leaving_playback = mode.kind == RuntimeMode::Kind::Playback;
    mode.kind = RuntimeMode::Kind::PureEdf;
    mode.cursor = 0;
    if (leaving_playback) {
        mode.settling.clear();
        for (const auto& r : st.iso)
            if (r.kind() == RequestKind::IsoMultiple && r.d_curr != r.spec.period_num)
                mode.settling.push_back(r.id());
    }
}

struct BiResult {
    BiSchedule executed;
    std::vector<RequestId> departed;
};

/// Executes one BI: produce the schedule, run the end-of-BI table update,
/// and on any departure recompute the allocation for the following BIs.
inline BiResult run_bi(SystemState& st, RuntimeMode& mode) {
    BiResult out{next_bi_schedule(st, mode), {}};
    out.departed = advance_bi(st, out.executed);

    // A settling ISO_M leaves that state at its period reset (or departure).
    std::erase_if(mode.settling, [&](RequestId id) {
        const RequestRecord* r = st.find(id);
        return r == nullptr || r->d_curr == r->spec.period_num;
    });

    if (!out.departed.empty()) {
        const AdmissionOutcome oc = recompute_on_departure(st);
        install_outcome(st, mode, oc);
    }
    return out;
}

}  // namespace eaciar
