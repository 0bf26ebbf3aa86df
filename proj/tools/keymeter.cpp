#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "keymeter/analysis.hpp"
#include "keymeter/clock.hpp"
#include "keymeter/collector.hpp"
#include "keymeter/control.hpp"
#include "keymeter/levels.hpp"
#include "keymeter/runner.hpp"
#include "keymeter/serial_port.hpp"
#include "keymeter/sim_meter.hpp"
#include "keymeter/tc66_backend.hpp"
#include "keymeter/text.hpp"
#include "keymeter/udp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitWorkload = 3;

keymeter::CollectorStatus* g_serving = nullptr;

void handle_signal(int)
{
    if (g_serving)
        g_serving->stop_requested = true;
}

keymeter::Endpoint collector_endpoint(const std::string& flag_value)
{
    std::string text = flag_value;
    if (text.empty()) {
        if (const char* env = std::getenv("KEYMETER_COLLECTOR"))
            text = env;
    }
    if (text.empty())
        text = "127.0.0.1";
    auto parsed = keymeter::parse_endpoint(text, keymeter::kDefaultControlPort);
    if (!parsed.ok()) {
        std::cerr << "error: " << parsed.error() << '\n';
        std::exit(kExitConfig);
    }
    return parsed.value();
}

std::uint16_t control_port(std::uint16_t flag_value, bool flag_set)
{
    if (flag_set)
        return flag_value;
    if (const char* env = std::getenv("KEYMETER_PORT")) {
        const int v = std::atoi(env);
        if (v < 1 || v > 65535) {
            std::cerr << "error: KEYMETER_PORT '" << env
                      << "' is not a valid port\n";
            std::exit(kExitConfig);
        }
        return static_cast<std::uint16_t>(v);
    }
    return flag_value;
}

std::string read_file_or_exit(const std::string& path)
{
    std::ifstream file(path);
    if (!file) {
        std::cerr << "error: cannot open " << path << '\n';
        std::exit(kExitConfig);
    }
    std::ostringstream body;
    body << file.rdbuf();
    return body.str();
}

keymeter::PlatformHooks hooks_from_flags(const std::string& fan,
                                         const std::string& cpu,
                                         const std::string& restore,
                                         const std::string& temp)
{
    keymeter::PlatformHooks hooks;
    hooks.set_fan_max.shell = fan;
    hooks.pin_cpu_clock.shell = cpu;
    hooks.restore.shell = restore;
    hooks.read_temp.shell = temp;
    return hooks;
}

int exit_for_run_error(const std::string& error)
{
    // Environment problems (missing keygen binary, unreachable socket) are
    // config-class; anything mid-iteration is a workload failure.
    if (error.find("environment:") != std::string::npos)
        return kExitConfig;
    return kExitWorkload;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-node key-generation energy benchmarker"};
    app.require_subcommand(1);

    keymeter::SystemClock clock;
    keymeter::SystemCommandRunner commands;

    // --- experiment ---------------------------------------------------
    auto* experiment = app.add_subcommand(
        "experiment", "Run one measured experiment on this device");
    std::string algorithm;
    std::uint64_t iterations = 0;
    std::string collector_flag;
    double settle = 5.0;
    double poll_hz = keymeter::kMaxPollHz;
    std::string keygen_binary = "openssl";
    std::string hook_fan, hook_cpu, hook_restore, hook_temp;
    experiment->add_option("--algorithm", algorithm,
                           "Key-generation descriptor or NULL")
        ->required();
    experiment->add_option("--iterations", iterations, "Workload repetitions")
        ->required()
        ->check(CLI::PositiveNumber);
    experiment->add_option("--collector", collector_flag,
                           "Collector host[:port] (default "
                           "$KEYMETER_COLLECTOR or 127.0.0.1)");
    experiment->add_option("--settle", settle,
                           "Seconds to wait after pinning the environment");
    experiment->add_option("--poll-hz", poll_hz,
                           "Meter sample rate requested from the collector");
    experiment->add_option("--keygen-binary", keygen_binary,
                           "Key-generation executable (default openssl)");
    experiment->add_option("--hook-fan", hook_fan, "Shell command: fan to max");
    experiment->add_option("--hook-cpu", hook_cpu,
                           "Shell command: pin CPU clock");
    experiment->add_option("--hook-restore", hook_restore,
                           "Shell command: restore fan/clock defaults");
    experiment->add_option("--hook-temp", hook_temp,
                           "Shell command printing the CPU temperature");

    // --- batch --------------------------------------------------------
    auto* batch = app.add_subcommand(
        "batch", "Run experiments from a <algorithm>,<iterations> file");
    std::string batch_path;
    std::optional<std::uint64_t> batch_override;
    batch->add_option("file", batch_path, "Batch input file")->required();
    batch->add_option("--iterations", batch_override,
                      "Override every line's iteration count");
    batch->add_option("--collector", collector_flag,
                      "Collector host[:port] (default $KEYMETER_COLLECTOR "
                      "or 127.0.0.1)");
    batch->add_option("--settle", settle, "Settle seconds per experiment");
    batch->add_option("--poll-hz", poll_hz, "Meter sample rate");
    batch->add_option("--keygen-binary", keygen_binary,
                      "Key-generation executable");
    batch->add_option("--hook-fan", hook_fan, "Shell command: fan to max");
    batch->add_option("--hook-cpu", hook_cpu, "Shell command: pin CPU clock");
    batch->add_option("--hook-restore", hook_restore,
                      "Shell command: restore defaults");
    batch->add_option("--hook-temp", hook_temp,
                      "Shell command printing the CPU temperature");

    // --- collect --------------------------------------------------------
    auto* collect = app.add_subcommand(
        "collect", "Run the acquisition service beside the meter");
    std::string com_port;
    std::uint16_t listen_port = keymeter::kDefaultControlPort;
    std::string out_dir = ".";
    std::string backend = "tc66";
    std::string sim_profile_path;
    double idle_timeout = 120.0;
    int sessions = 0;
    auto* port_opt = collect->add_option(
        "--port", listen_port, "UDP control port (default $KEYMETER_PORT or 55555)");
    collect->add_option("--com", com_port,
                        "Serial device of the meter (skips the menu)");
    collect->add_option("--out", out_dir, "Output directory");
    collect->add_option("--backend", backend, "Meter backend")
        ->check(CLI::IsMember({"tc66", "sim"}));
    collect->add_option("--sim-profile", sim_profile_path,
                        "Simulated load profile file (with --backend sim)");
    collect->add_option("--idle-timeout", idle_timeout,
                        "Seconds of static energy before a session is "
                        "finalized as truncated");
    collect->add_option("--sessions", sessions,
                        "Exit after this many sessions (0 = run until "
                        "interrupted)");

    // --- analyze --------------------------------------------------------
    auto* analyze = app.add_subcommand(
        "analyze", "Baseline-correct AllResults.csv and emit reports");
    std::string all_results = "AllResults.csv";
    std::string levels_path;
    std::string analyze_out = ".";
    std::string fleet_path;
    analyze->add_option("--all-results", all_results, "Master results file");
    analyze->add_option("--levels", levels_path,
                        "Security-level mapping CSV (default: built-in)");
    analyze->add_option("--out", analyze_out, "Output directory");
    analyze->add_option("--fleet", fleet_path,
                        "Fleet scenario key=value file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (experiment->parsed() || batch->parsed()) {
        keymeter::RunnerOptions options;
        options.collector = collector_endpoint(collector_flag);
        options.keygen.binary = keygen_binary;
        options.hooks =
            hooks_from_flags(hook_fan, hook_cpu, hook_restore, hook_temp);

        keymeter::ExperimentRunner runner(clock, commands, options, std::cout);
        if (experiment->parsed()) {
            keymeter::ExperimentSpec spec;
            spec.algorithm_label = algorithm;
            spec.iterations = iterations;
            spec.settle_seconds = settle;
            spec.poll_hz = poll_hz;
            auto report = runner.run(spec);
            if (!report.ok()) {
                std::cerr << "error: " << report.error() << '\n';
                return exit_for_run_error(report.error());
            }
            return kExitOk;
        }

        auto lines = keymeter::parse_batch_file(read_file_or_exit(batch_path));
        if (!lines.ok()) {
            std::cerr << "error: " << batch_path << ": " << lines.error()
                      << '\n';
            return kExitConfig;
        }
        auto outcome =
            runner.run_batch(lines.value(), batch_override, settle, poll_hz);
        std::cout << outcome.reports.size() << " of " << lines.value().size()
                  << " experiments completed\n";
        if (outcome.error) {
            std::cerr << "error: " << *outcome.error << '\n';
            return exit_for_run_error(*outcome.error);
        }
        return kExitOk;
    }

    if (collect->parsed()) {
        keymeter::CollectorOptions options;
        options.port = control_port(listen_port, port_opt->count() > 0);
        options.out_dir = out_dir;
        options.idle_timeout_s = idle_timeout;
        options.session_limit = sessions;

        keymeter::MeterFactory factory;
        if (backend == "sim") {
            keymeter::SimProfile profile = keymeter::SimProfile::constant(2.5);
            if (!sim_profile_path.empty()) {
                auto parsed = keymeter::parse_sim_profile(
                    read_file_or_exit(sim_profile_path));
                if (!parsed.ok()) {
                    std::cerr << "error: " << sim_profile_path << ": "
                              << parsed.error() << '\n';
                    return kExitConfig;
                }
                profile = parsed.value();
            }
            options.meter_note = "simulated meter";
            factory = [profile, &clock] {
                return std::make_unique<keymeter::SimMeter>(profile, clock);
            };
        } else {
            std::optional<std::string> forced;
            if (!com_port.empty())
                forced = com_port;
            auto device =
                keymeter::select_port(keymeter::discover_serial_ports(), forced,
                                      keymeter::stdin_prompt(10.0), std::cout);
            if (!device.ok()) {
                std::cerr << "error: " << device.error() << '\n';
                return kExitConfig;
            }
            const std::string chosen = device.value();
            options.meter_note = chosen;
            factory = [chosen, &clock] {
                return std::make_unique<keymeter::Tc66SerialBackend>(chosen,
                                                                     clock);
            };
        }

        keymeter::CollectorStatus status;
        g_serving = &status;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        auto served = keymeter::serve_collector(clock, factory, options, status,
                                                std::cout);
        g_serving = nullptr;
        if (!served.ok()) {
            std::cerr << "error: " << served.error() << '\n';
            return kExitRuntime;
        }
        return kExitOk;
    }

    // analyze
    keymeter::SecurityLevelMap levels = keymeter::SecurityLevelMap::builtin();
    if (!levels_path.empty()) {
        auto loaded = keymeter::SecurityLevelMap::load_csv(levels_path);
        if (!loaded.ok()) {
            std::cerr << "error: " << loaded.error() << '\n';
            return kExitConfig;
        }
        levels = loaded.value();
    }
    std::optional<keymeter::FleetScenario> fleet;
    if (!fleet_path.empty()) {
        auto parsed =
            keymeter::parse_fleet_scenario(read_file_or_exit(fleet_path));
        if (!parsed.ok()) {
            std::cerr << "error: " << parsed.error() << '\n';
            return kExitConfig;
        }
        fleet = parsed.value();
    }

    auto report = keymeter::aggregate(all_results);
    if (!report.ok()) {
        std::cerr << "error: " << report.error() << '\n';
        return kExitRuntime;
    }
    const auto& r = report.value();
    if (r.uncorrected)
        std::cout << "Warning: no NULL rows found; rates are uncorrected "
                     "(zero baseline)\n";
    else
        std::cout << "Baseline: "
                  << keymeter::format_fixed(r.baseline.background_watts, 4)
                  << " W from " << r.baseline.source_runs << " NULL run(s), "
                  << keymeter::format_fixed(r.baseline.total_null_seconds, 1)
                  << " s\n";
    if (r.skipped_rows > 0)
        std::cout << "Skipped " << r.skipped_rows
                  << " non-ok row(s) (truncated or no-data)\n";

    std::string level_csv;
    auto written = keymeter::write_analysis_outputs(r, levels, analyze_out,
                                                    fleet, &level_csv);
    if (!written.ok()) {
        std::cerr << "error: " << written.error() << '\n';
        return kExitRuntime;
    }
    std::cout << level_csv;
    std::cout << "Wrote level_table.csv, chart_energy.svg, chart_time.svg";
    if (fleet)
        std::cout << ", fleet_report.txt";
    std::cout << " to " << analyze_out << '\n';
    return kExitOk;
}
