#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eaciar/alloc.hpp"
#include "eaciar/jobs.hpp"
#include "eaciar/rational.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

enum class Decision : std::uint8_t { Accept, Reject };
enum class OutcomeMode : std::uint8_t { EdfWithCop, LongSchedule };
enum class RejectReason : std::uint8_t {
    IsoUtilization,
    AsyncCapacity,
    AsyncDeadline,
    InvalidRequest,
};

inline const char* to_string(RejectReason r) {
    switch (r) {
    case RejectReason::IsoUtilization: return "ISO_UTILIZATION";
    case RejectReason::AsyncCapacity: return "ASYNC_CAPACITY";
    case RejectReason::AsyncDeadline: return "ASYNC_DEADLINE";
    default: return "INVALID_REQUEST";
    }
}

/// Why a request was turned away, with the witness that failed.
struct RejectInfo {
    RejectReason reason = RejectReason::InvalidRequest;
    std::optional<RequestId> request;      // the request that could not be served
    std::optional<std::uint64_t> slot;     // failing slot position / bound
    std::string detail;
};

using CopMap = std::map<RequestId, SlotCount>;

struct AdmissionOutcome {
    Decision decision = Decision::Reject;
    OutcomeMode mode = OutcomeMode::EdfWithCop;   // meaningful when accepted
    CopMap c_op_map;                              // EdfWithCop payload
    std::optional<LongSchedule> long_schedule;    // LongSchedule payload
    std::optional<RejectInfo> reject;             // Reject payload

    bool accepted() const { return decision == Decision::Accept; }

    static AdmissionOutcome accept_edf(CopMap cop) {
        AdmissionOutcome o;
        o.decision = Decision::Accept;
        o.mode = OutcomeMode::EdfWithCop;
        o.c_op_map = std::move(cop);
        return o;
    }
    static AdmissionOutcome accept_long(LongSchedule ls) {
        AdmissionOutcome o;
        o.decision = Decision::Accept;
        o.mode = OutcomeMode::LongSchedule;
        o.long_schedule = std::move(ls);
        return o;
    }
    static AdmissionOutcome rejected(RejectInfo info) {
        AdmissionOutcome o;
        o.decision = Decision::Reject;
        o.reject = std::move(info);
        return o;
    }
};

/// Total ISO utilization based on C_min: sum of c_min / P with P in slots.
/// The caller rejects when the result exceeds 1.
inline Rational check_iso_utilization(const std::vector<RequestRecord>& iso, Slot bi_slots) {
    Rational u = 0;
    for (const auto& r : iso)
        u += make_rational(r.spec.c_min, r.spec.period_slots(bi_slots));
    return u;
}

/// Proportional-fair C_op for an ISO-only system: each request gets C_min
/// plus min(1, U_surplus / du_tot) of its (C_max - C_min) range, floored to
/// whole slots. u_min is the C_min utilization of the same set.
inline CopMap proportional_fair_cop(const std::vector<RequestRecord>& iso, Slot bi_slots,
                                    const Rational& u_min) {
    CopMap cop;
    Rational du_tot = 0;
    for (const auto& r : iso)
        du_tot += make_rational(r.spec.c_max - r.spec.c_min, r.spec.period_slots(bi_slots));

    Rational factor = 0;
    if (du_tot > 0) {
        factor = (Rational(1) - u_min) / du_tot;
        if (factor > 1) factor = 1;
    }
    for (const auto& r : iso)
        cop[r.id()] = r.spec.c_min + floor_scaled(factor, r.spec.c_max - r.spec.c_min);
    return cop;
}

struct BuildOptions {
    bool surplus = true;
    std::optional<RequestId> new_request;   // witness attribution for rejects
};

using BuildResult = std::variant<LongSchedule, RejectInfo>;

namespace detail {

// Installs freshly computed C_op values on the ISO records. The per-period
// budget follows immediately when the request's period is just opening (the
// recompute and the period start coincide, so the new value governs the whole
// period) and otherwise only downward; see RequestRecord::c_budget.
inline void apply_cop(std::vector<RequestRecord>& iso, const CopMap& cop) {
    for (auto& r : iso) {
        const SlotCount v = cop.at(r.id());
        const bool opening = r.kind() != RequestKind::IsoMultiple ||
                             (r.c_remain == r.spec.c_min && r.d_curr == r.spec.period_num);
        r.c_op = v;
        r.c_budget = opening ? v : std::min(r.c_budget, v);
    }
}

// The utilization gate bounds long-run rates, but an arrival or a C_op raise
// can also land in a backlogged state: service already owed from the current
// periods, concentrated into their remaining BIs. This verifies the committed
// demand also fits every BI-boundary horizon D: ISO_F service at C_op (it is
// never displaced), ISO_M periods due within D at their remaining per-period
// budget, and whole later periods at C_op. Cut-short periods scavenge
// leftovers only and are not counted. Returns the first boundary whose demand
// exceeds its capacity, or nullopt when everything fits.
//
// Horizons run to the farthest ISO_M departure because period-end demand is
// lumpy: lifetimes offset the period grids, and whole-period lumps can stack
// on one stretch of BIs arbitrarily deep into the future. These prefix
// checks cover every interval: a window chain tiles disjoint period-length
// intervals, so a span starting later than now holds at most floor(span/P)
// whole windows per request and stays within the admitted rate by
// construction -- only spans anchored at now carry the backlog.
//
// When the next planned_bis BIs are covered by a frozen schedule, the check
// starts beyond it: the schedule construction already packed every obligation
// due inside it (guaranteed ISO service and all pending ASYNC service), and
// playback grants exactly the planned rows, so obligations due later compete
// only for the BIs after it. Periods that close inside the planned stretch
// are satisfied there and any unserved top-up above the guarantee lapses with
// them; a period still open when playback ends keeps today's budget remainder
// (its slice of the plan never serves it), and later periods open at C_op.
inline std::optional<std::uint32_t> first_backlog_overrun(const std::vector<RequestRecord>& iso,
                                                          Slot bi_slots,
                                                          std::uint32_t planned_bis = 0) {
    std::uint32_t horizon = 1;
    for (const auto& r : iso)
        if (r.kind() == RequestKind::IsoMultiple && r.t_remain_life >= r.d_curr)
            horizon = std::max(horizon, r.t_remain_life);
    for (std::uint32_t d = planned_bis + 1; d <= horizon; ++d) {
        SlotCount need = 0;
        for (const auto& r : iso) {
            if (r.t_remain_life <= planned_bis) continue;
            if (r.kind() == RequestKind::IsoFraction) {
                need += r.c_op * r.spec.period_den * (std::min(d, r.t_remain_life) - planned_bis);
                continue;
            }
            if (r.t_remain_life < r.d_curr) continue;
            if (r.d_curr > planned_bis && r.d_curr <= d)
                need += std::max<SlotCount>(0, r.c_budget - (r.spec.c_min - r.c_remain));
            for (std::uint32_t end = r.d_curr + r.spec.period_num;
                 end <= d && end <= r.t_remain_life; end += r.spec.period_num)
                if (end > planned_bis) need += r.c_op;
        }
        if (need > static_cast<SlotCount>(d - planned_bis) * static_cast<SlotCount>(bi_slots))
            return d;
    }
    return std::nullopt;
}

// Period of an ISO request as a rational number of BIs, for the surplus
// ordering (non-decreasing period).
inline bool shorter_period(const RequestRecord& a, const RequestRecord& b) {
    const auto lhs = static_cast<std::uint64_t>(a.spec.period_num) * b.spec.period_den;
    const auto rhs = static_cast<std::uint64_t>(b.spec.period_num) * a.spec.period_den;
    if (lhs != rhs) return lhs < rhs;
    return a.id() < b.id();
}

// EDF plan of the ISO requests alone over d_max BIs, following the per-BI
// working-state evolution of the request table. Exposed for the priority
// property tests: the ISO slots of a full build must match this exactly.
inline LongSchedule plan_iso_horizon(std::vector<RequestRecord> work, std::uint32_t d_max,
                                     Slot bi_slots) {
    LongSchedule ls;
    ls.bis.reserve(d_max);
    for (std::uint32_t h = 0; h < d_max; ++h) {
        BiSchedule bi(bi_slots);

        std::vector<Job> frac_jobs;
        for (const auto& w : work)
            if (w.kind() == RequestKind::IsoFraction)
                for (const Job& j : expand_iso_f_jobs(w, bi_slots)) frac_jobs.push_back(j);
        allocate_bi_jobs(bi, std::move(frac_jobs));

        // A period the lifetime cannot complete never faces its shortfall
        // check below, so its demand must not displace one that will.
        std::vector<MultipleEntry> mult;
        for (const auto& w : work)
            if (w.kind() == RequestKind::IsoMultiple && w.c_remain > 0)
                mult.push_back({w.id(), w.d_curr, w.c_remain, 0,
                                w.t_remain_life < w.d_curr ? std::uint8_t{2} : std::uint8_t{0}});
        allocate_bi_multiples(bi, mult);

        ls.bis.push_back(std::move(bi));

        // Working-table update, mirroring the end-of-BI rules.
        for (auto it = work.begin(); it != work.end();) {
            RequestRecord& w = *it;
            if (w.kind() == RequestKind::IsoMultiple)
                for (const auto& e : mult)
                    if (e.id == w.id()) w.c_remain -= e.allocated;
            w.t_remain_life -= 1;
            if (w.t_remain_life == 0) {
                it = work.erase(it);
                continue;
            }
            if (w.kind() == RequestKind::IsoMultiple) {
                w.d_curr -= 1;
                if (w.d_curr == 0) {
                    require(w.c_remain <= 0, "ISO_M period shortfall inside the plan");
                    w.c_remain = w.spec.c_min;
                    w.d_curr = w.spec.period_num;
                }
            }
            ++it;
        }
    }
    return ls;
}

}  // namespace detail

/// Computes the D_max-BI schedule for a system holding at least one ASYNC
/// request: ISO_F then ISO_M by EDF per BI, then ASYNC by EDF over the whole
/// horizon, then proportional-fair distribution of surplus slots to ISO jobs.
/// ISO shortfalls are internal errors (the utilization gate excludes them);
/// ASYNC shortfalls reject.
inline BuildResult build_long_schedule(const std::vector<RequestRecord>& iso,
                                       const std::vector<RequestRecord>& async_reqs,
                                       Slot bi_slots, const BuildOptions& opts = {}) {
    detail::require(!async_reqs.empty(), "build_long_schedule needs an ASYNC request");

    std::uint32_t d_max = 0;
    for (const auto& a : async_reqs) d_max = std::max(d_max, a.d_curr);

    LongSchedule ls = detail::plan_iso_horizon(iso, d_max, bi_slots);
    const std::uint64_t horizon_end = static_cast<std::uint64_t>(d_max) * bi_slots;

    SlotCount tot_async_dur = 0;
    for (const auto& a : async_reqs) tot_async_dur += a.c_remain;
    if (tot_async_dur > ls.empty_count()) {
        RejectInfo info;
        info.reason = RejectReason::AsyncCapacity;
        if (opts.new_request) {
            info.request = opts.new_request;
        } else {
            for (const auto& a : async_reqs)
                if (a.d_curr == d_max) { info.request = a.id(); break; }
        }
        info.slot = static_cast<std::uint64_t>(ls.empty_count());
        info.detail = "total ASYNC demand " + std::to_string(tot_async_dur) + " exceeds " +
                      std::to_string(ls.empty_count()) + " empty slots";
        return info;
    }

    std::vector<RequestRecord> sorted_async = async_reqs;
    std::sort(sorted_async.begin(), sorted_async.end(),
              [](const RequestRecord& a, const RequestRecord& b) {
                  return a.d_curr != b.d_curr ? a.d_curr < b.d_curr : a.id() < b.id();
              });
    for (const auto& a : sorted_async) {
        const std::uint64_t deadline = static_cast<std::uint64_t>(a.d_curr) * bi_slots;
        const SlotCount got = allocate_span(ls, bi_slots, 0, deadline, a.c_remain, a.id());
        if (got < a.c_remain) {
            RejectInfo info;
            info.reason = RejectReason::AsyncDeadline;
            info.request = a.id();
            info.slot = deadline;
            info.detail = "request " + std::to_string(a.id()) + " short by " +
                          std::to_string(a.c_remain - got) + " slots at its deadline slot " +
                          std::to_string(deadline);
            return info;
        }
    }

    if (!opts.surplus) return ls;

    // Surplus: distribute empty slots beyond the C_min commitments to ISO
    // jobs released within the horizon, shortest period first.
    SlotCount tot_c_iso = 0;
    SlotCount dc_tot = 0;
    for (const auto& r : iso) {
        const std::uint64_t end_bi = std::min<std::uint64_t>(r.t_remain_life, d_max);
        std::uint64_t jobs = 0;
        if (r.kind() == RequestKind::IsoFraction) {
            jobs = end_bi * r.spec.period_den;
        } else {
            jobs = (end_bi + r.spec.period_num - 1) / r.spec.period_num;  // ceil(end_BI / P)
        }
        tot_c_iso += r.spec.c_min * static_cast<SlotCount>(jobs);
        dc_tot += (r.spec.c_max - r.spec.c_min) * static_cast<SlotCount>(jobs);
    }
    const SlotCount surplus_c =
        static_cast<SlotCount>(horizon_end) - (tot_c_iso + tot_async_dur);
    if (surplus_c <= 0 || dc_tot == 0) return ls;

    Rational factor = make_rational(surplus_c, dc_tot);
    if (factor > 1) factor = 1;

    std::vector<RequestRecord> sorted_iso = iso;
    std::sort(sorted_iso.begin(), sorted_iso.end(), detail::shorter_period);
    for (const auto& r : sorted_iso) {
        const SlotCount c_extra = floor_scaled(factor, r.spec.c_max - r.spec.c_min);
        if (c_extra <= 0) continue;
        const std::uint64_t alive_end =
            std::min<std::uint64_t>(r.t_remain_life, d_max) * bi_slots;
        if (r.kind() == RequestKind::IsoFraction) {
            const auto period = static_cast<std::uint64_t>(r.spec.period_slots(bi_slots));
            for (std::uint64_t rel = 0; rel < alive_end; rel += period)
                allocate_span(ls, bi_slots, rel, rel + period, c_extra, r.id());
        } else {
            // Jobs released within the horizon; the current period of a
            // mid-period request was released in the past and gets none.
            const std::uint64_t p = r.spec.period_num;
            for (std::uint64_t b = r.d_curr % p; b * bi_slots < alive_end; b += p) {
                const std::uint64_t rel = b * bi_slots;
                const std::uint64_t dl = std::min({(b + p) * bi_slots, alive_end, horizon_end});
                allocate_span(ls, bi_slots, rel, dl, c_extra, r.id());
            }
        }
    }
    return ls;
}

/// EACIAR entry point for a new request. Mutates `st` only on ACCEPT; a
/// REJECT leaves the state bit-identical.
inline AdmissionOutcome admit(SystemState& st, const TrafficSpec& spec) {
    auto problems = validate(spec, st.bi_slots);
    if (st.find(spec.id) != nullptr)
        problems.push_back("duplicate request id " + std::to_string(spec.id));
    if (!problems.empty()) {
        RejectInfo info;
        info.reason = RejectReason::InvalidRequest;
        info.request = spec.id;
        for (const auto& p : problems) {
            if (!info.detail.empty()) info.detail += "; ";
            info.detail += p;
        }
        return AdmissionOutcome::rejected(std::move(info));
    }

    SystemState trial = st;
    trial.insert(make_record(spec));

    const Rational u_min = check_iso_utilization(trial.iso, trial.bi_slots);
    if (u_min > 1) {
        RejectInfo info;
        info.reason = RejectReason::IsoUtilization;
        info.request = spec.id;
        info.detail = "ISO utilization " + u_min.get_str() + " exceeds 1";
        return AdmissionOutcome::rejected(std::move(info));
    }

    if (trial.async_reqs.empty()) {
        CopMap cop = proportional_fair_cop(trial.iso, trial.bi_slots, u_min);
        detail::apply_cop(trial.iso, cop);
        if (const auto d = detail::first_backlog_overrun(trial.iso, trial.bi_slots)) {
            RejectInfo info;
            info.reason = RejectReason::IsoUtilization;
            info.request = spec.id;
            info.slot = static_cast<std::uint64_t>(*d) * trial.bi_slots;
            info.detail = "ISO demand already owed would overrun the deadline at slot " +
                          std::to_string(*info.slot);
            return AdmissionOutcome::rejected(std::move(info));
        }
        trial.long_schedule.reset();
        st = std::move(trial);
        return AdmissionOutcome::accept_edf(std::move(cop));
    }

    BuildOptions opts;
    opts.new_request = spec.id;
    BuildResult res = build_long_schedule(trial.iso, trial.async_reqs, trial.bi_slots, opts);
    if (auto* info = std::get_if<RejectInfo>(&res))
        return AdmissionOutcome::rejected(std::move(*info));

    // The schedule above proves the horizon out to the last ASYNC deadline;
    // the committed C_op values also govern the BIs after it. Refresh them
    // for the grown population and hold the demand due after the planned
    // stretch to the same fit bar as an ISO-only admission -- otherwise
    // values from an earlier, smaller population leak past the end of the
    // plan.
    auto& sched = std::get<LongSchedule>(res);
    CopMap cop = proportional_fair_cop(trial.iso, trial.bi_slots, u_min);
    detail::apply_cop(trial.iso, cop);
    if (const auto d = detail::first_backlog_overrun(trial.iso, trial.bi_slots, sched.d_max())) {
        RejectInfo info;
        info.reason = spec.type == RequestType::Async ? RejectReason::AsyncCapacity
                                                      : RejectReason::IsoUtilization;
        info.request = spec.id;
        info.slot = static_cast<std::uint64_t>(*d) * trial.bi_slots;
        info.detail = "ISO demand due after the " + std::to_string(sched.d_max()) +
                      "-BI schedule would overrun the deadline at slot " +
                      std::to_string(*info.slot);
        return AdmissionOutcome::rejected(std::move(info));
    }

    trial.long_schedule = ActiveLongSchedule{sched, trial.current_bi};
    st = std::move(trial);
    return AdmissionOutcome::accept_long(std::move(sched));
}

/// Re-runs the allocation half of the algorithm after a departure: no new
/// request, no utilization gate. A smaller version of an already-feasible set
/// always fits, so a reject here is an internal error.
inline AdmissionOutcome recompute_on_departure(SystemState& st) {
    if (st.async_reqs.empty()) {
        const Rational u_min = check_iso_utilization(st.iso, st.bi_slots);
        CopMap cop = proportional_fair_cop(st.iso, st.bi_slots, u_min);
        // A departure only ever raises survivors' C_op, and records with a
        // period just opening consume a raise at once -- which can overrun a
        // survivor still owed concentrated service from before the raise. If
        // the raised demand fails the backlog fit, keep the previous values
        // (feasible a BI ago, and the departure only removed demand); a later
        // recompute retries the raise once the backlog has drained.
        std::vector<RequestRecord> trial = st.iso;
        detail::apply_cop(trial, cop);
        if (!detail::first_backlog_overrun(trial, st.bi_slots)) {
            st.iso = std::move(trial);
        } else {
            for (auto& [id, v] : cop) v = st.find(id)->c_op;
        }
        st.long_schedule.reset();
        return AdmissionOutcome::accept_edf(std::move(cop));
    }
    BuildResult res = build_long_schedule(st.iso, st.async_reqs, st.bi_slots, {});
    detail::require(!std::holds_alternative<RejectInfo>(res),
                    "recompute rejected a previously feasible set");
    auto& sched = std::get<LongSchedule>(res);
    st.long_schedule = ActiveLongSchedule{sched, st.current_bi};
    return AdmissionOutcome::accept_long(std::move(sched));
}

}  // namespace eaciar
