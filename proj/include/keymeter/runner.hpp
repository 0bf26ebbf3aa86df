#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "keymeter/clock.hpp"
#include "keymeter/control.hpp"
#include "keymeter/result.hpp"
#include "keymeter/udp.hpp"

namespace keymeter {

struct ExperimentSpec {
    std::string algorithm_label; // "NULL" or a key-generation descriptor
    std::uint64_t iterations = 0;
    double settle_seconds = 5.0; // environment settling before START
    double poll_hz = kMaxPollHz;
};

struct BatchLine {
    std::string algorithm_label;
    std::uint64_t iterations = 0;

    bool operator==(const BatchLine&) const = default;
};

/// One BatchLine per non-empty, non-comment line. The split is at the LAST
/// comma: algorithm descriptors contain spaces and colons but never commas.
Result<std::vector<BatchLine>> parse_batch_file(std::string_view text);

std::string render_batch_line(const BatchLine& line);

/// Shell fragment run via `/bin/sh -c`; empty means "not configured" and is
/// a no-op.
struct HookCommand {
    std::string shell;

    bool configured() const { return !shell.empty(); }
};

/// Platform pinning around a run. `restore` is attempted on every exit path.
struct PlatformHooks {
    HookCommand set_fan_max;
    HookCommand pin_cpu_clock;
    HookCommand restore;
    HookCommand read_temp; // stdout's first number is taken as degrees C
};

struct DutRunReport {
    std::string experiment_id;
    std::string algorithm_label;
    std::uint64_t iterations = 0;
    std::uint64_t iterations_completed = 0;
    double wall_seconds = 0;
    std::optional<double> start_temp_c;
    std::optional<double> stop_temp_c;
    bool unpinned = false; // fan/clock hooks missing or failed
};

/// Subprocess boundary, injectable so tests can fake key generation.
class CommandRunner {
public:
    virtual ~CommandRunner() = default;

    /// Spawn argv[0] with argv, stdout/stderr discarded; returns the exit
    /// code, or failure when the process cannot be spawned at all.
    virtual Result<int> run(const std::vector<std::string>& argv) = 0;

    /// Run a shell fragment, capturing stdout. Failure on nonzero exit.
    virtual Result<std::string> shell(const std::string& command) = 0;
};

class SystemCommandRunner final : public CommandRunner {
public:
    Result<int> run(const std::vector<std::string>& argv) override;
    Result<std::string> shell(const std::string& command) override;
};

/// The 5 ms no-work iteration used for baseline runs.
void null_iteration(Clock& clock);

struct KeygenConfig {
    std::string binary = "openssl";
    std::vector<std::string> leading_args = {"genpkey", "-algorithm"};
};

/// argv for one key generation: the label's first token is the -algorithm
/// value, remaining tokens pass through (e.g. "-pkeyopt curve:P-521").
Result<std::vector<std::string>> keygen_argv(const KeygenConfig& config,
                                             const std::string& algorithm_label);

/// One key generation, output discarded. Missing binary is an environment
/// error ("environment: ..."); a nonzero exit is an iteration failure.
Status keygen_invoke(CommandRunner& commands, const KeygenConfig& config,
                     const std::string& algorithm_label);

struct RunnerOptions {
    Endpoint collector{"127.0.0.1", kDefaultControlPort};
    KeygenConfig keygen;
    PlatformHooks hooks;
    /// Test seam: when set, replaces the NULL/keygen dispatch. Called once
    /// per iteration with the zero-based index.
    std::function<Status(std::uint64_t)> workload_override;
};

/// Drives one measured experiment: GETREADY, pin environment, settle, record
/// temperature, START, N workload calls, STOP, record temperature, restore.
class ExperimentRunner {
public:
    ExperimentRunner(Clock& clock, CommandRunner& commands,
                     RunnerOptions options, std::ostream& console);

    Result<DutRunReport> run(const ExperimentSpec& spec);

    struct BatchOutcome {
        std::vector<DutRunReport> reports; // completed runs, file order
        std::optional<std::string> error;  // first failure, if any
    };

    BatchOutcome run_batch(const std::vector<BatchLine>& lines,
                           std::optional<std::uint64_t> iteration_override,
                           double settle_seconds, double poll_hz);

private:
    Status send(const ControlMessage& msg);
    std::optional<double> read_temperature();

    Clock& clock_;
    CommandRunner& commands_;
    RunnerOptions options_;
    std::ostream& console_;
};

} // namespace keymeter
