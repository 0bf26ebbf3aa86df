#include "keymeter/runner.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <sstream>

#include "keymeter/text.hpp"

extern char** environ;

namespace keymeter {

Result<std::vector<BatchLine>> parse_batch_file(std::string_view text)
{
    using R = Result<std::vector<BatchLine>>;
    std::vector<BatchLine> lines;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#')
            continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            return R::failure("line " + std::to_string(line_no) +
                              ": missing comma (expected <algorithm>,<iterations>)");
        BatchLine entry;
        entry.algorithm_label = trim(line.substr(0, comma));
        if (entry.algorithm_label.empty())
            return R::failure("line " + std::to_string(line_no) +
                              ": empty algorithm");
        const std::string count = trim(line.substr(comma + 1));
        const auto [ptr, ec] = std::from_chars(count.data(),
                                               count.data() + count.size(),
                                               entry.iterations);
        if (ec != std::errc() || ptr != count.data() + count.size() ||
            entry.iterations == 0)
            return R::failure("line " + std::to_string(line_no) +
                              ": iterations must be a positive integer, got '" +
                              count + "'");
        lines.push_back(std::move(entry));
    }
    return lines;
}

std::string render_batch_line(const BatchLine& line)
{
    return line.algorithm_label + "," + std::to_string(line.iterations);
}

Result<int> SystemCommandRunner::run(const std::vector<std::string>& argv)
{
    using R = Result<int>;
    if (argv.empty())
        return R::failure("empty argv");

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& arg : argv)
        cargv.push_back(const_cast<char*>(arg.c_str()));
    cargv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
    posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);

    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(),
                                environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        return R::failure(std::string("spawn ") + argv[0] + ": " +
                          std::strerror(rc));

    int status = 0;
    if (waitpid(pid, &status, 0) < 0)
        return R::failure(std::string("waitpid: ") + std::strerror(errno));
    if (WIFSIGNALED(status))
        return R::failure(std::string(argv[0]) + " killed by signal " +
                          std::to_string(WTERMSIG(status)));
    return WEXITSTATUS(status);
}

Result<std::string> SystemCommandRunner::shell(const std::string& command)
{
    using R = Result<std::string>;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe)
        return R::failure("popen failed: " + command);
    std::string output;
    char buf[256];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
        output.append(buf, n);
    const int status = pclose(pipe);
    if (status != 0)
        return R::failure("command failed (" + std::to_string(status) +
                          "): " + command);
    return output;
}

void null_iteration(Clock& clock)
{
    clock.sleep_for(0.005);
}

Result<std::vector<std::string>> keygen_argv(const KeygenConfig& config,
                                             const std::string& algorithm_label)
{
    using R = Result<std::vector<std::string>>;
    const auto tokens = split_whitespace(algorithm_label);
    if (tokens.empty())
        return R::failure("empty algorithm label");

    std::vector<std::string> argv;
    argv.push_back(config.binary);
    argv.insert(argv.end(), config.leading_args.begin(),
                config.leading_args.end());
    argv.insert(argv.end(), tokens.begin(), tokens.end());
    return argv;
}

Status keygen_invoke(CommandRunner& commands, const KeygenConfig& config,
                     const std::string& algorithm_label)
{
    auto argv = keygen_argv(config, algorithm_label);
    if (!argv.ok())
        return Status::failure(argv.error());
    auto exit_code = commands.run(argv.value());
    if (!exit_code.ok())
        return Status::failure("environment: " + exit_code.error());
    if (exit_code.value() != 0)
        return Status::failure("key generation exited with status " +
                               std::to_string(exit_code.value()));
    return Status();
}

ExperimentRunner::ExperimentRunner(Clock& clock, CommandRunner& commands,
                                   RunnerOptions options, std::ostream& console)
    : clock_(clock), commands_(commands), options_(std::move(options)),
      console_(console)
{
}

Status ExperimentRunner::send(const ControlMessage& msg)
{
    const std::string wire = encode_control(msg);
    auto sock = UdpSocket::client();
    if (!sock.ok())
        return Status::failure(sock.error());
    auto sent = sock.value().send_to(options_.collector, wire);
    if (!sent.ok())
        return sent;
    console_ << "UDP: Sent '" << wire << "' to " << options_.collector.host
             << ':' << options_.collector.port << '\n';
    return Status();
}

std::optional<double> ExperimentRunner::read_temperature()
{
    if (!options_.hooks.read_temp.configured())
        return std::nullopt;
    auto output = commands_.shell(options_.hooks.read_temp.shell);
    if (!output.ok()) {
        console_ << "Warning: temperature hook failed: " << output.error()
                 << '\n';
        return std::nullopt;
    }
    return parse_first_double(output.value());
}

Result<DutRunReport> ExperimentRunner::run(const ExperimentSpec& spec)
{
    using R = Result<DutRunReport>;

    ExperimentParams params;
    params.experiment_id = format_timestamp_id(clock_.wall_unix_ns());
    params.algorithm_label = spec.algorithm_label;
    params.iterations = spec.iterations;
    params.poll_hz = spec.poll_hz;
    if (auto valid = validate_params(params); !valid.ok())
        return R::failure(valid.error());

    DutRunReport report;
    report.experiment_id = params.experiment_id;
    report.algorithm_label = spec.algorithm_label;
    report.iterations = spec.iterations;

    if (auto sent = send(ControlMessage::get_ready(params)); !sent.ok())
        return R::failure(sent.error());
    console_ << "Starting experiment " << params.experiment_id << ": "
             << spec.iterations << " x " << spec.algorithm_label << '\n';

    // Pin the platform. A missing or failing hook downgrades the run to
    // "unpinned" but never stops it.
    console_ << "Setting up environment (fan max, CPU clock pinned)\n";
    bool fan_ok = false;
    bool cpu_ok = false;
    if (options_.hooks.set_fan_max.configured()) {
        auto r = commands_.shell(options_.hooks.set_fan_max.shell);
        fan_ok = r.ok();
        if (!r.ok())
            console_ << "Warning: fan hook failed: " << r.error() << '\n';
    }
    if (options_.hooks.pin_cpu_clock.configured()) {
        auto r = commands_.shell(options_.hooks.pin_cpu_clock.shell);
        cpu_ok = r.ok();
        if (!r.ok())
            console_ << "Warning: CPU clock hook failed: " << r.error() << '\n';
    }
    report.unpinned = !(fan_ok && cpu_ok);
    if (report.unpinned)
        console_ << "Warning: unpinned environment (fan/CPU hooks inactive)\n";

    // The experiment wall clock starts here: the settle window is part of the
    // measured span, mirroring how the collector sees the session.
    const double t_begin = clock_.now();
    if (spec.settle_seconds > 0)
        clock_.sleep_for(spec.settle_seconds);

    report.start_temp_c = read_temperature();
    if (report.start_temp_c)
        console_ << "Start Temperature: " << format_fixed(*report.start_temp_c, 1)
                 << " C\n";

    auto restore_environment = [&] {
        if (options_.hooks.restore.configured()) {
            auto r = commands_.shell(options_.hooks.restore.shell);
            if (!r.ok())
                console_ << "Warning: restore hook failed: " << r.error() << '\n';
        }
        console_ << "Environment restored\n";
    };

    auto run_iteration = [&](std::uint64_t index) -> Status {
        if (options_.workload_override)
            return options_.workload_override(index);
        if (spec.algorithm_label == "NULL") {
            null_iteration(clock_);
            return Status();
        }
        return keygen_invoke(commands_, options_.keygen, spec.algorithm_label);
    };

    if (auto sent = send(ControlMessage::start()); !sent.ok()) {
        restore_environment();
        return R::failure(sent.error());
    }
    console_ << "STARTing experiment: " << spec.iterations << " x "
             << spec.algorithm_label << '\n';

    for (std::uint64_t i = 0; i < spec.iterations; ++i) {
        auto status = run_iteration(i);
        if (!status.ok()) {
            // Close the measurement window before surfacing the failure so
            // the collector is never left acquiring.
            send(ControlMessage::stop());
            restore_environment();
            return R::failure("iteration " + std::to_string(i) + ": " +
                              status.error());
        }
        ++report.iterations_completed;
    }
    console_ << "Experiment finished\n";

    if (auto sent = send(ControlMessage::stop()); !sent.ok()) {
        restore_environment();
        return R::failure(sent.error());
    }
    report.wall_seconds = clock_.now() - t_begin;
    console_ << "Time to run experiment: " << format_fixed(report.wall_seconds, 3)
             << " s\n";

    report.stop_temp_c = read_temperature();
    if (report.start_temp_c)
        console_ << "Start Temperature: " << format_fixed(*report.start_temp_c, 1)
                 << " C\n";
    if (report.stop_temp_c)
        console_ << "Stop Temperature: " << format_fixed(*report.stop_temp_c, 1)
                 << " C\n";

    restore_environment();
    return report;
}

ExperimentRunner::BatchOutcome
ExperimentRunner::run_batch(const std::vector<BatchLine>& lines,
                            std::optional<std::uint64_t> iteration_override,
                            double settle_seconds, double poll_hz)
{
    BatchOutcome outcome;
    for (const auto& line : lines) {
        ExperimentSpec spec;
        spec.algorithm_label = line.algorithm_label;
        spec.iterations = iteration_override.value_or(line.iterations);
        spec.settle_seconds = settle_seconds;
        spec.poll_hz = poll_hz;

        auto report = run(spec);
        if (!report.ok()) {
            outcome.error = line.algorithm_label + ": " + report.error();
            return outcome;
        }
        outcome.reports.push_back(std::move(report).value());
    }
    return outcome;
}

} // namespace keymeter
