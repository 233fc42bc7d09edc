#pragma once

#include <vector>

#include "eaciar/types.hpp"

namespace eaciar {

/// End-of-BI table update. `executed` is the schedule actually run in
/// current_bi. Returns the ids of requests whose lifetime expired; those
/// records are removed from their set. Does not touch long_schedule; the
/// runtime reacts to departures.
///
/// Update order per entry: C_remain -= allocated duration (ISO_M/ASYNC),
/// t_remain_life -= 1 with removal at zero, D_curr -= 1 (ISO_M/ASYNC),
/// then the ISO_M period reset (C_remain = C_min, D_curr = P) when D_curr
/// hits zero while the request lives on.
inline std::vector<RequestId> advance_bi(SystemState& st, const BiSchedule& executed) {
    std::vector<RequestId> departed;

    auto update_set = [&](std::vector<RequestRecord>& set) {
        for (auto it = set.begin(); it != set.end();) {
            RequestRecord& r = *it;
            if (r.kind() != RequestKind::IsoFraction)
                r.c_remain -= executed.owned_by(r.id());
            r.t_remain_life -= 1;
            if (r.t_remain_life == 0) {
                departed.push_back(r.id());
                it = set.erase(it);
                continue;
            }
            if (r.kind() != RequestKind::IsoFraction) {
                r.d_curr -= 1;
                if (r.kind() == RequestKind::IsoMultiple && r.d_curr == 0) {
                    r.c_remain = r.spec.c_min;
                    r.d_curr = r.spec.period_num;
                    r.c_budget = r.c_op;   // a raised C_op takes effect here
                }
                // An ASYNC reaching its deadline departs in the same BI
                // (lifetime equals the original deadline).
                detail::require(r.kind() != RequestKind::Async || r.d_curr >= 1,
                                "ASYNC outlived its deadline");
            }
            ++it;
        }
    };

    update_set(st.iso);
    update_set(st.async_reqs);
    st.current_bi += 1;
    return departed;
}

}  // namespace eaciar
