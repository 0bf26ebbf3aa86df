#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "keymeter/clock.hpp"
#include "keymeter/control.hpp"
#include "keymeter/meter.hpp"
#include "keymeter/result.hpp"
#include "keymeter/results_log.hpp"

namespace keymeter {

/// Filesystem-safe rendering of an algorithm label or experiment id: keeps
/// [A-Za-z0-9._-], everything else (spaces, path separators, ...) becomes '_'.
std::string sanitize_label(const std::string& label);

/// `<experiment_id>-<algorithm>-<iterations>_data.csv`
std::string data_file_name(const ExperimentParams& params);

/// First sample of a session; deltas are measured against it.
struct SessionOrigin {
    double t0 = 0;
    std::uint64_t energy0_mwh = 0;
};

std::string data_file_header();

/// `iso8601,elapsed_s,voltage_v,current_a,power_w,energy_mwh,energy_j` with
/// fixed decimal places (4 fractional digits on the timestamp, then
/// 3,4,5,4,0,1). energy_j is the session delta in joules; energy_mwh stays
/// the device's raw cumulative counter.
std::string sample_row(const MeterReading& reading, std::int64_t wall_ns,
                       const SessionOrigin& origin);

/// Session totals for AllResults.csv. Wall time defaults to the sample span;
/// a DUT-reported duration can override it when available out-of-band.
SummaryRow make_summary(const ExperimentParams& params,
                        const MeterReading& first, const MeterReading& last,
                        std::optional<double> dut_wall_seconds,
                        std::string status, std::int64_t finalize_wall_ns);

using MeterFactory = std::function<std::unique_ptr<MeterBackend>()>;

struct CollectorOptions {
    std::string bind_host = "0.0.0.0";
    std::uint16_t port = kDefaultControlPort;
    std::filesystem::path out_dir = ".";
    /// Auto-finalize as "truncated" when the energy counter has not moved for
    /// this long during acquisition and no STOP arrived (lost-datagram guard).
    double idle_timeout_s = 120.0;
    /// Return after this many summary rows; 0 means serve until
    /// stop_requested.
    int session_limit = 0;
    std::string meter_note = "meter"; // console text for the chosen device
};

/// Cross-thread observability: tests and signal handlers watch these while
/// serve_collector runs.
struct CollectorStatus {
    std::atomic<bool> listening{false};
    std::atomic<std::uint16_t> port{0};
    std::atomic<int> sessions_completed{0};
    std::atomic<std::uint64_t> samples_taken{0};
    std::atomic<bool> stop_requested{false};
};

/// Runs the acquisition service until the session limit is reached or
/// stop_requested is set. Three roles cooperate: a network listener thread,
/// an acquisition thread spawned per measured window (sole owner of the
/// meter and the data file), and the coordinating caller thread that owns
/// the state machine; they exchange only message values over a queue.
Status serve_collector(Clock& clock, const MeterFactory& factory,
                       const CollectorOptions& options, CollectorStatus& status,
                       std::ostream& console);

/// Picks the meter port: `forced` wins outright, otherwise an interactive
/// menu over `candidates` that defaults to the first entry when `prompt`
/// yields nothing (timeout).
Result<std::string>
select_port(const std::vector<std::string>& candidates,
            const std::optional<std::string>& forced,
            const std::function<std::optional<std::string>()>& prompt,
            std::ostream& console);

/// Prompt reader over stdin with a timeout, for interactive use.
std::function<std::optional<std::string>()> stdin_prompt(double timeout_s);

} // namespace keymeter
