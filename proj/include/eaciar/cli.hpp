#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eaciar/admission.hpp"
#include "eaciar/bench.hpp"
#include "eaciar/dump.hpp"
#include "eaciar/replay.hpp"
#include "eaciar/scenario.hpp"
#include "eaciar/state_io.hpp"

namespace eaciar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

namespace detail {

struct RunArgs {
    std::string scenario_path;
    std::string format = "text";
    std::string dump_path;
    std::string output_path;
    bool timing = false;
};

struct AdmitArgs {
    std::string state_path;
    Slot bi_slots = kDefaultBiSlots;
    std::uint32_t id = 0;
    std::string type;
    std::string period;
    SlotCount c_min = 0;
    SlotCount c_max = -1;   // defaults to c_min when unset
    std::uint32_t lifetime = 0;  // ASYNC default: the deadline
    bool commit = false;
};

struct BenchArgs {
    std::vector<std::uint32_t> ns{10, 20, 40, 80, 160};
    Slot bi_slots = kDefaultBiSlots;
    std::uint32_t d_max = 8;
    std::uint32_t reps = 30;
};

struct GenerateArgs {
    std::uint64_t seed = 0;
    GenParams params;
    std::string output_path;
};

inline int write_text_file(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream f(path);
    if (!f) {
        err << "error: cannot write '" << path << "'\n";
        return kExitIo;
    }
    f << text;
    return kExitOk;
}

inline int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    std::ifstream f(a.scenario_path);
    if (!f) {
        err << "error: cannot open '" << a.scenario_path << "'\n";
        return kExitIo;
    }
    Scenario sc;
    try {
        sc = parse_scenario(f);
    } catch (const ScenarioParseError& e) {
        err << a.scenario_path << ": " << e.what() << '\n';
        return kExitValidation;
    }

    ReplayOptions opts;
    opts.collect_trace = !a.dump_path.empty();
    const ReplayResult res = replay(sc, opts);

    const ReportFormat fmt = a.format == "csv" ? ReportFormat::Csv : ReportFormat::Text;
    const std::string report = report_to_text(res.report, fmt, a.timing);
    if (a.output_path.empty()) out << report;
    else if (const int rc = write_text_file(a.output_path, report, err); rc != kExitOk) return rc;

    if (!a.dump_path.empty())
        if (const int rc = write_text_file(a.dump_path, schedule_dump_to_text(res.trace, sc.bi_slots),
                                           err);
            rc != kExitOk)
            return rc;
    return kExitOk;
}

inline int cmd_admit(const AdmitArgs& a, std::ostream& out, std::ostream& err) {
    SystemState st;
    st.bi_slots = a.bi_slots;
    if (!a.state_path.empty()) {
        std::ifstream f(a.state_path);
        if (f) {
            try {
                st = load_state(f);
            } catch (const ScenarioParseError& e) {
                err << a.state_path << ": " << e.what() << '\n';
                return kExitValidation;
            }
        } else if (!a.commit) {
            // Only --commit may start a fresh file; a read-only probe against
            // a missing path is a typo, not an empty system.
            err << "error: cannot open '" << a.state_path << "'\n";
            return kExitIo;
        }
    }

    TrafficSpec s;
    s.id = a.id;
    if (a.type == "ISO") s.type = RequestType::Iso;
    else if (a.type == "ASYNC") s.type = RequestType::Async;
    else {
        err << "error: --type must be ISO or ASYNC\n";
        return kExitValidation;
    }
    {
        const auto slash = a.period.find('/');
        try {
            s.period_num = static_cast<std::uint32_t>(std::stoul(a.period.substr(0, slash)));
            s.period_den = slash == std::string::npos
                               ? 1
                               : static_cast<std::uint32_t>(std::stoul(a.period.substr(slash + 1)));
        } catch (const std::exception&) {
            err << "error: --period must be <num>/<den> in BIs\n";
            return kExitValidation;
        }
    }
    s.c_min = a.c_min;
    s.c_max = a.c_max >= 0 ? a.c_max : a.c_min;
    s.lifetime = a.lifetime > 0 ? a.lifetime
                                : (s.type == RequestType::Async ? s.period_num : 1);

    bool invalid = false;
    for (const std::string& p : validate(s, st.bi_slots)) {
        err << "invalid request: " << p << '\n';
        invalid = true;
    }
    if (st.find(s.id) != nullptr) {
        err << "invalid request: id " << s.id << " already present\n";
        invalid = true;
    }
    if (invalid) return kExitValidation;

    const AdmissionOutcome oc = admit(st, s);
    if (!oc.accepted()) {
        out << "REJECT reason=" << to_string(oc.reject->reason);
        if (oc.reject->request) out << " request=" << *oc.reject->request;
        if (oc.reject->slot) out << " slot=" << *oc.reject->slot;
        if (!oc.reject->detail.empty()) out << " detail=" << oc.reject->detail;
        out << '\n';
        return kExitOk;
    }
    if (oc.mode == OutcomeMode::EdfWithCop) {
        out << "ACCEPT mode=EDF\n";
        for (const auto& [id, c_op] : oc.c_op_map) out << "c_op id=" << id << " value=" << c_op << '\n';
    } else {
        out << "ACCEPT mode=LONG_SCHEDULE d_max=" << oc.long_schedule->d_max()
            << " empty_slots=" << oc.long_schedule->empty_count() << '\n';
    }
    if (a.commit)
        if (const int rc = write_text_file(a.state_path, state_to_text(st), err); rc != kExitOk)
            return rc;
    return kExitOk;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchConfig cfg;
    cfg.bi_slots = a.bi_slots;
    cfg.d_max = a.d_max;
    cfg.reps = a.reps;
    const auto rows = scaling_benchmark(a.ns, cfg);
    write_bench_csv(out, rows);
    out << "# linear_fit_r2=" << linear_fit_r2(rows) << '\n';
    return kExitOk;
}

inline int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = generate_scenario(a.seed, a.params);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    if (a.output_path.empty()) {
        write_scenario(out, sc);
        return kExitOk;
    }
    return write_text_file(a.output_path, scenario_to_text(sc), err);
}

}  // namespace detail

/// Dispatches one CLI invocation; args excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Admission control and scheduling simulator for 802.11ad service periods"};
    app.require_subcommand(1);

    detail::RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Replay a scenario file and report metrics");
    run->add_option("scenario", run_args.scenario_path, "Scenario file")->required();
    run->add_option("--format", run_args.format, "Report format")
        ->check(CLI::IsMember({"text", "csv"}));
    run->add_option("--dump-schedule", run_args.dump_path, "Write a per-BI schedule dump here");
    run->add_option("--output", run_args.output_path, "Write the report here instead of stdout");
    run->add_flag("--timing", run_args.timing, "Include wall-time fields in the report");

    detail::AdmitArgs admit_args;
    CLI::App* admit = app.add_subcommand("admit", "What-if admission check against a saved state");
    CLI::Option* state_opt = admit->add_option(
        "--state", admit_args.state_path,
        "Saved state file (omit for empty; --commit creates a missing one)");
    admit->add_option("--bi-slots", admit_args.bi_slots, "BI length for an empty state")
        ->capture_default_str();
    admit->add_option("--id", admit_args.id, "Request id")->required();
    admit->add_option("--type", admit_args.type, "ISO or ASYNC")->required();
    admit->add_option("--period", admit_args.period, "Period (or deadline) in BIs, <num>/<den>")
        ->required();
    admit->add_option("--c-min", admit_args.c_min, "Minimum allocation, us per period")->required();
    admit->add_option("--c-max", admit_args.c_max, "Maximum allocation, us per period");
    admit->add_option("--lifetime", admit_args.lifetime, "Lifetime in BIs");
    admit->add_flag("--commit", admit_args.commit, "Write the accepted state back")
        ->needs(state_opt);

    detail::BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Admission-time scaling benchmark (CSV)");
    bench->add_option("--n", bench_args.ns, "ISO request counts to sweep")->delimiter(',');
    bench->add_option("--bi-slots", bench_args.bi_slots, "BI length")->capture_default_str();
    bench->add_option("--d-max", bench_args.d_max, "Horizon in BIs")->capture_default_str();
    bench->add_option("--reps", bench_args.reps, "Repetitions per point")->capture_default_str();

    detail::GenerateArgs gen_args;
    CLI::App* gen = app.add_subcommand("generate", "Generate a random scenario from a seed");
    gen->add_option("--seed", gen_args.seed, "RNG seed")->required();
    gen->add_option("--bi-slots", gen_args.params.bi_slots, "BI length")->capture_default_str();
    gen->add_option("--iso-m", gen_args.params.n_iso_m, "ISO_M request count")->capture_default_str();
    gen->add_option("--iso-f", gen_args.params.n_iso_f, "ISO_F request count")->capture_default_str();
    gen->add_option("--async", gen_args.params.n_async, "ASYNC request count")->capture_default_str();
    gen->add_option("--max-period", gen_args.params.max_period_bis, "Max ISO_M period, BIs")
        ->capture_default_str();
    gen->add_option("--max-deadline", gen_args.params.max_deadline_bis, "Max ASYNC deadline, BIs")
        ->capture_default_str();
    gen->add_option("--max-lifetime", gen_args.params.max_lifetime_bis, "Max ISO lifetime, BIs")
        ->capture_default_str();
    gen->add_option("--max-arrival", gen_args.params.max_arrival_bi, "Latest arrival BI")
        ->capture_default_str();
    gen->add_option("--util-percent", gen_args.params.util_percent,
                    "c_min cap as a percentage of the period")
        ->capture_default_str();
    gen->add_option("--output", gen_args.output_path, "Write the scenario here instead of stdout");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return detail::cmd_run(run_args, out, err);
        if (admit->parsed()) return detail::cmd_admit(admit_args, out, err);
        if (bench->parsed()) return detail::cmd_bench(bench_args, out);
        return detail::cmd_generate(gen_args, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace eaciar::cli
