#pragma once

// Scenario files: a line-oriented text format listing the BI length and the
// arrival sequence. Grammar (one record per line, '#' starts a comment):
//
//   scenario bi_slots=<int> [seed=<int>]
//   request id=<int> type=<ISO|ASYNC> period=<num>/<den> c_min=<slots>
//           [c_max=<slots>] lifetime=<bis> arrival_bi=<bi>     (one line, wrapped here)
//
// Periods are in units of one BI; durations are in slots.
// c_max may be omitted for ASYNC requests (it is reserved there).

#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eaciar/types.hpp"

namespace eaciar {

struct Arrival {
    BiIndex bi = 0;
    TrafficSpec spec;

    bool operator==(const Arrival&) const = default;
};

struct Scenario {
    Slot bi_slots = kDefaultBiSlots;
    std::optional<std::uint64_t> seed;
    std::vector<Arrival> arrivals;   // sorted by bi, stable in file order

    bool operator==(const Scenario&) const = default;
};

/// Parse failure with the offending line number (1-based; 0 = whole file).
struct ScenarioParseError : std::runtime_error {
    ScenarioParseError(std::size_t line_, const std::string& msg)
        : std::runtime_error(line_ ? "line " + std::to_string(line_) + ": " + msg : msg),
          line(line_) {}
    std::size_t line;
};

namespace detail {

// Splits "key=value key=value ..." after the leading keyword.
inline std::map<std::string, std::string> parse_fields(const std::string& rest,
                                                       std::size_t line) {
    std::map<std::string, std::string> fields;
    std::istringstream iss(rest);
    std::string tok;
    while (iss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.size())
            throw ScenarioParseError(line, "expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        if (!fields.emplace(key, tok.substr(eq + 1)).second)
            throw ScenarioParseError(line, "field '" + key + "' given twice");
    }
    return fields;
}

inline std::int64_t parse_int_field(const std::map<std::string, std::string>& fields,
                                    const std::string& key, std::size_t line) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ScenarioParseError(line, "missing field '" + key + "'");
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ScenarioParseError(line, "field '" + key + "': not an integer: '" + it->second + "'");
    }
}

// "num/den" or a bare integer (den = 1), in units of one BI.
inline std::pair<std::uint32_t, std::uint32_t> parse_period_field(
    const std::map<std::string, std::string>& fields, std::size_t line) {
    const auto it = fields.find("period");
    if (it == fields.end()) throw ScenarioParseError(line, "missing field 'period'");
    const std::string& v = it->second;
    const auto slash = v.find('/');
    auto to_u32 = [&](const std::string& part) -> std::uint32_t {
        try {
            std::size_t pos = 0;
            const long long n = std::stoll(part, &pos);
            if (pos != part.size() || n < 0 || n > 0xffffffffLL) throw std::invalid_argument("");
            return static_cast<std::uint32_t>(n);
        } catch (const std::exception&) {
            throw ScenarioParseError(line, "field 'period': bad rational '" + v + "'");
        }
    };
    if (slash == std::string::npos) return {to_u32(v), 1};
    return {to_u32(v.substr(0, slash)), to_u32(v.substr(slash + 1))};
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    bool saw_header = false;
    std::map<RequestId, std::size_t> seen_ids;  // id -> defining line
    std::string raw;
    std::size_t line = 0;

    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream iss(raw);
        std::string keyword;
        if (!(iss >> keyword)) continue;
        std::string rest;
        std::getline(iss, rest);

        if (keyword == "scenario") {
            if (saw_header) throw ScenarioParseError(line, "duplicate scenario header");
            saw_header = true;
            const auto fields = detail::parse_fields(rest, line);
            const auto bi = detail::parse_int_field(fields, "bi_slots", line);
            if (bi < 1) throw ScenarioParseError(line, "field 'bi_slots': must be >= 1");
            sc.bi_slots = static_cast<Slot>(bi);
            if (fields.count("seed"))
                sc.seed = static_cast<std::uint64_t>(detail::parse_int_field(fields, "seed", line));
            continue;
        }
        if (keyword == "request") {
            if (!saw_header)
                throw ScenarioParseError(line, "request before the scenario header");
            const auto fields = detail::parse_fields(rest, line);

            TrafficSpec s;
            s.id = static_cast<RequestId>(detail::parse_int_field(fields, "id", line));
            const auto type_it = fields.find("type");
            if (type_it == fields.end()) throw ScenarioParseError(line, "missing field 'type'");
            if (type_it->second == "ISO") s.type = RequestType::Iso;
            else if (type_it->second == "ASYNC") s.type = RequestType::Async;
            else throw ScenarioParseError(line, "field 'type': expected ISO or ASYNC, got '" +
                                                    type_it->second + "'");
            std::tie(s.period_num, s.period_den) = detail::parse_period_field(fields, line);
            s.c_min = detail::parse_int_field(fields, "c_min", line);
            if (fields.count("c_max")) {
                s.c_max = detail::parse_int_field(fields, "c_max", line);
            } else if (s.type == RequestType::Async) {
                s.c_max = s.c_min;  // reserved field
            } else {
                throw ScenarioParseError(line, "missing field 'c_max'");
            }
            s.lifetime = static_cast<std::uint32_t>(detail::parse_int_field(fields, "lifetime", line));
            const auto arrival = detail::parse_int_field(fields, "arrival_bi", line);
            if (arrival < 0) throw ScenarioParseError(line, "field 'arrival_bi': must be >= 0");

            if (const auto [it, fresh] = seen_ids.emplace(s.id, line); !fresh)
                throw ScenarioParseError(line, "duplicate request id " + std::to_string(s.id) +
                                                   " (first defined on line " +
                                                   std::to_string(it->second) + ")");
            for (const std::string& p : validate(s, sc.bi_slots))
                throw ScenarioParseError(line, "request id " + std::to_string(s.id) + ": " + p);

            sc.arrivals.push_back({static_cast<BiIndex>(arrival), s});
            continue;
        }
        throw ScenarioParseError(line, "unknown record '" + keyword + "'");
    }
    if (!saw_header) throw ScenarioParseError(0, "missing scenario header");
    std::stable_sort(sc.arrivals.begin(), sc.arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.bi < b.bi; });
    return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

inline void write_scenario(std::ostream& out, const Scenario& sc) {
    out << "scenario bi_slots=" << sc.bi_slots;
    if (sc.seed) out << " seed=" << *sc.seed;
    out << '\n';
    for (const Arrival& a : sc.arrivals) {
        const TrafficSpec& s = a.spec;
        out << "request id=" << s.id << " type=" << to_string(s.type) << " period=" << s.period_num
            << '/' << s.period_den << " c_min=" << s.c_min << " c_max=" << s.c_max
            << " lifetime=" << s.lifetime << " arrival_bi=" << a.bi << '\n';
    }
}

inline std::string scenario_to_text(const Scenario& sc) {
    std::ostringstream out;
    write_scenario(out, sc);
    return out.str();
}

/// Parameter ranges for random scenario generation.
struct GenParams {
    Slot bi_slots = kDefaultBiSlots;
    std::uint32_t n_iso_m = 0;
    std::uint32_t n_iso_f = 0;
    std::uint32_t n_async = 0;
    std::uint32_t max_period_bis = 4;    // ISO_M period upper bound
    std::uint32_t max_deadline_bis = 4;  // ASYNC deadline upper bound
    std::uint32_t max_lifetime_bis = 12;
    std::uint32_t max_arrival_bi = 8;
    std::uint32_t util_percent = 90;     // per-request c_min cap as % of its period
};

namespace detail {

// Bounded draw independent of std distribution internals, so identical seeds
// give identical scenarios on every platform.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
}

}  // namespace detail

/// Reproducible random scenario: same seed and params, same scenario.
/// ISO_F periods are drawn from the exact divisors of bi_slots.
inline Scenario generate_scenario(std::uint64_t seed, const GenParams& p) {
    if (p.bi_slots < 1) throw std::invalid_argument("generate_scenario: bi_slots must be >= 1");
    if (p.max_period_bis < 1 || p.max_deadline_bis < 1 || p.max_lifetime_bis < 1)
        throw std::invalid_argument("generate_scenario: ranges must be >= 1");
    if (p.util_percent < 1 || p.util_percent > 100)
        throw std::invalid_argument("generate_scenario: util_percent must be in [1,100]");

    std::vector<std::uint32_t> divisors;  // den > 1 with a nonempty c_min range
    for (std::uint32_t d = 2; d <= p.bi_slots; ++d)
        if (p.bi_slots % d == 0 && (p.bi_slots / d) * p.util_percent >= 100) divisors.push_back(d);
    if (p.n_iso_f > 0 && divisors.empty())
        throw std::invalid_argument("generate_scenario: bi_slots has no usable ISO_F divisor");

    std::mt19937_64 rng(seed);
    Scenario sc;
    sc.bi_slots = p.bi_slots;
    sc.seed = seed;

    auto cap = [&](SlotCount period_slots) {
        return std::max<SlotCount>(1, period_slots * p.util_percent / 100);
    };

    for (std::uint32_t i = 0; i < p.n_iso_m + p.n_iso_f + p.n_async; ++i) {
        TrafficSpec s;
        if (i < p.n_iso_m) {
            s.type = RequestType::Iso;
            s.period_num = static_cast<std::uint32_t>(detail::draw(rng, 1, p.max_period_bis));
            s.period_den = 1;
        } else if (i < p.n_iso_m + p.n_iso_f) {
            s.type = RequestType::Iso;
            s.period_num = 1;
            s.period_den = divisors[detail::draw(rng, 0, divisors.size() - 1)];
        } else {
            s.type = RequestType::Async;
            s.period_num = static_cast<std::uint32_t>(detail::draw(rng, 1, p.max_deadline_bis));
            s.period_den = 1;
        }
        const SlotCount ps = s.period_slots(p.bi_slots);
        s.c_min = static_cast<SlotCount>(detail::draw(rng, 1, cap(ps)));
        if (s.type == RequestType::Iso) {
            s.c_max = static_cast<SlotCount>(detail::draw(rng, s.c_min, cap(ps)));
            s.lifetime = static_cast<std::uint32_t>(detail::draw(rng, 1, p.max_lifetime_bis));
        } else {
            s.c_max = s.c_min;
            s.lifetime = s.period_num;
        }
        sc.arrivals.push_back({detail::draw(rng, 0, p.max_arrival_bi), s});
    }

    std::stable_sort(sc.arrivals.begin(), sc.arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.bi < b.bi; });
    for (std::size_t i = 0; i < sc.arrivals.size(); ++i)
        sc.arrivals[i].spec.id = static_cast<RequestId>(i + 1);  // ids follow arrival order
    return sc;
}

}  // namespace eaciar
