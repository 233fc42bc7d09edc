#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eaciar/admission.hpp"
#include "eaciar/rational.hpp"
#include "eaciar/runtime.hpp"
#include "eaciar/scenario.hpp"
#include "eaciar/types.hpp"

namespace eaciar {

/// Per-request outcome of a replay. Window accounting is computed from the
/// executed schedules alone, independent of the engine's own bookkeeping:
/// for ISO requests, one entry per complete service window (partial trailing
/// windows cut off by departure carry no obligation and are not counted);
/// for ASYNC, the running total against c_min before departure.
struct RequestMetrics {
    TrafficSpec spec;
    BiIndex arrival_bi = 0;
    bool admitted = false;
    std::string reject_reason;                  // empty when admitted
    std::int64_t granted = 0;                   // total slots received
    std::vector<std::int64_t> window_granted;   // ISO: slots per complete window
    std::int64_t misses = 0;                    // windows short of c_min / ASYNC shortfall
    std::optional<BiIndex> completion_bi;       // ASYNC: BI where granted reached c_min
    std::optional<BiIndex> depart_bi;
};

struct MetricsReport {
    Slot bi_slots = 0;
    std::uint64_t bis_simulated = 0;
    std::uint64_t offered_iso = 0, admitted_iso = 0;
    std::uint64_t offered_async = 0, admitted_async = 0;
    std::uint64_t busy_slots = 0;
    std::uint64_t admit_calls = 0;
    std::uint64_t admit_ns_total = 0;           // wall time; never in golden output
    std::vector<RequestMetrics> requests;       // sorted by id

    std::uint64_t capacity_slots() const { return bis_simulated * bi_slots; }

    Rational mean_utilization() const {
        if (capacity_slots() == 0) return 0;
        return make_rational(static_cast<std::int64_t>(busy_slots),
                             static_cast<std::int64_t>(capacity_slots()));
    }

    std::int64_t total_misses() const {
        std::int64_t n = 0;
        for (const auto& m : requests) n += m.misses;
        return n;
    }
};

/// One executed BI, for schedule dumps and trace-level assertions.
struct BiTrace {
    BiIndex bi = 0;
    bool playback = false;
    std::optional<std::uint32_t> d_max;   // set in playback
    BiSchedule executed;
};

struct ReplayResult {
    MetricsReport report;
    std::vector<BiTrace> trace;   // only with collect_trace
};

struct ReplayOptions {
    bool collect_trace = false;
};

/// Replays a scenario: admissions at BI boundaries, one run_bi per BI, until
/// every admitted request has departed and no arrivals remain. Deterministic
/// up to the timing fields.
inline ReplayResult replay(const Scenario& sc, const ReplayOptions& opts = {}) {
    ReplayResult out;
    MetricsReport& rep = out.report;
    rep.bi_slots = sc.bi_slots;

    SystemState st;
    st.bi_slots = sc.bi_slots;
    RuntimeMode mode;

    std::map<RequestId, std::size_t> index;        // id -> rep.requests position
    std::map<RequestId, std::int64_t> window_acc;  // ISO_M window in progress

    std::size_t next = 0;
    while (next < sc.arrivals.size() || !st.empty()) {
        while (next < sc.arrivals.size() && sc.arrivals[next].bi == st.current_bi) {
            const Arrival& a = sc.arrivals[next++];
            RequestMetrics m;
            m.spec = a.spec;
            m.arrival_bi = a.bi;

            const auto t0 = std::chrono::steady_clock::now();
            const AdmissionOutcome oc = admit(st, a.spec);
            rep.admit_ns_total += static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count());
            ++rep.admit_calls;

            m.admitted = oc.accepted();
            if (!m.admitted) m.reject_reason = to_string(oc.reject->reason);
            install_outcome(st, mode, oc);

            (a.spec.is_iso() ? rep.offered_iso : rep.offered_async) += 1;
            if (m.admitted) (a.spec.is_iso() ? rep.admitted_iso : rep.admitted_async) += 1;
            if (m.admitted && a.spec.kind() == RequestKind::IsoMultiple) window_acc[a.spec.id] = 0;
            index[a.spec.id] = rep.requests.size();
            rep.requests.push_back(std::move(m));
        }

        // Pre-run view of the table: window boundaries depend on d_curr as it
        // was when the BI executed.
        std::vector<RequestRecord> snap = st.iso;
        snap.insert(snap.end(), st.async_reqs.begin(), st.async_reqs.end());
        const BiIndex bi_run = st.current_bi;
        const bool playback = mode.kind == RuntimeMode::Kind::Playback;
        const std::optional<std::uint32_t> d_max =
            playback ? std::optional<std::uint32_t>(st.long_schedule->sched.d_max()) : std::nullopt;

        const BiResult r = run_bi(st, mode);
        ++rep.bis_simulated;
        if (opts.collect_trace) out.trace.push_back({bi_run, playback, d_max, r.executed});

        std::map<RequestId, std::int64_t> owned;
        for (const RequestId o : r.executed.slots)
            if (o != kNoOwner) ++owned[o];
        for (const auto& [id, n] : owned) {
            rep.requests[index.at(id)].granted += n;
            rep.busy_slots += static_cast<std::uint64_t>(n);
        }

        for (const RequestRecord& s : snap) {
            RequestMetrics& m = rep.requests[index.at(s.id())];
            switch (s.kind()) {
            case RequestKind::IsoFraction: {
                const Slot ps = static_cast<Slot>(s.spec.period_slots(sc.bi_slots));
                for (Slot w = 0; w < sc.bi_slots; w += ps) {
                    std::int64_t got = 0;
                    for (Slot i = w; i < w + ps; ++i)
                        if (r.executed.slots[i] == s.id()) ++got;
                    m.window_granted.push_back(got);
                    if (got < s.spec.c_min) ++m.misses;
                }
                break;
            }
            case RequestKind::IsoMultiple: {
                auto acc = window_acc.find(s.id());
                acc->second += owned.count(s.id()) ? owned[s.id()] : 0;
                if (s.d_curr == 1) {  // window closed with this BI
                    m.window_granted.push_back(acc->second);
                    if (acc->second < s.spec.c_min) ++m.misses;
                    acc->second = 0;
                }
                break;
            }
            case RequestKind::Async:
                if (!m.completion_bi && m.granted >= s.spec.c_min) m.completion_bi = bi_run;
                break;
            }
        }

        for (const RequestId id : r.departed) {
            RequestMetrics& m = rep.requests[index.at(id)];
            m.depart_bi = bi_run;
            if (m.spec.kind() == RequestKind::Async && m.granted < m.spec.c_min) ++m.misses;
            window_acc.erase(id);
        }
    }

    std::sort(rep.requests.begin(), rep.requests.end(),
              [](const RequestMetrics& a, const RequestMetrics& b) { return a.spec.id < b.spec.id; });
    return out;
}

enum class ReportFormat { Text, Csv };

namespace detail {

inline std::string join_windows(const std::vector<std::int64_t>& v, char sep) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s << sep;
        s << v[i];
    }
    return s.str();
}

}  // namespace detail

/// Serializes a report. Timing fields are opt-in so that repeated runs of the
/// same scenario produce byte-identical output.
inline void write_report(std::ostream& out, const MetricsReport& rep,
                         ReportFormat format = ReportFormat::Text, bool with_timing = false) {
    const auto opt = [](const std::optional<BiIndex>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    if (format == ReportFormat::Text) {
        out << "report bi_slots=" << rep.bi_slots << " bis_simulated=" << rep.bis_simulated << '\n';
        out << "aggregate offered_iso=" << rep.offered_iso << " admitted_iso=" << rep.admitted_iso
            << " offered_async=" << rep.offered_async << " admitted_async=" << rep.admitted_async
            << '\n';
        out << "aggregate busy_slots=" << rep.busy_slots << " capacity_slots=" << rep.capacity_slots()
            << " mean_utilization=" << rep.mean_utilization().get_str() << '\n';
        for (const RequestMetrics& m : rep.requests) {
            out << "request id=" << m.spec.id << " type=" << to_string(m.spec.type) << " period="
                << m.spec.period_num << '/' << m.spec.period_den << " arrival_bi=" << m.arrival_bi
                << " admitted=" << (m.admitted ? "yes" : "no");
            if (!m.admitted) {
                out << " reject=" << m.reject_reason << '\n';
                continue;
            }
            out << " granted=" << m.granted << " misses=" << m.misses;
            if (m.completion_bi) out << " completion_bi=" << *m.completion_bi;
            if (m.depart_bi) out << " depart_bi=" << *m.depart_bi;
            if (!m.window_granted.empty())
                out << " windows=" << detail::join_windows(m.window_granted, ',');
            out << '\n';
        }
        if (with_timing)
            out << "timing admit_calls=" << rep.admit_calls << " admit_ns_total=" << rep.admit_ns_total
                << '\n';
        return;
    }
    out << "# report bi_slots=" << rep.bi_slots << " bis_simulated=" << rep.bis_simulated
        << " busy_slots=" << rep.busy_slots << " capacity_slots=" << rep.capacity_slots()
        << " offered_iso=" << rep.offered_iso << " admitted_iso=" << rep.admitted_iso
        << " offered_async=" << rep.offered_async << " admitted_async=" << rep.admitted_async << '\n';
    out << "id,type,period,arrival_bi,admitted,reject,granted,misses,completion_bi,depart_bi,windows\n";
    for (const RequestMetrics& m : rep.requests) {
        out << m.spec.id << ',' << to_string(m.spec.type) << ',' << m.spec.period_num << '/'
            << m.spec.period_den << ',' << m.arrival_bi << ',' << (m.admitted ? "yes" : "no") << ','
            << m.reject_reason << ',' << m.granted << ',' << m.misses << ',' << opt(m.completion_bi)
            << ',' << opt(m.depart_bi) << ',' << detail::join_windows(m.window_granted, ';') << '\n';
    }
    if (with_timing)
        out << "# timing admit_calls=" << rep.admit_calls << " admit_ns_total=" << rep.admit_ns_total
            << '\n';
}

inline std::string report_to_text(const MetricsReport& rep,
                                  ReportFormat format = ReportFormat::Text,
                                  bool with_timing = false) {
    std::ostringstream out;
    write_report(out, rep, format, with_timing);
    return out.str();
}

}  // namespace eaciar
