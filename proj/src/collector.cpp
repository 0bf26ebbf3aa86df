#include "keymeter/collector.hpp"

#include <poll.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "keymeter/text.hpp"
#include "keymeter/udp.hpp"
#include "keymeter/units.hpp"

namespace keymeter {

std::string sanitize_label(const std::string& label)
{
    std::string out;
    out.reserve(label.size());
    for (char c : label) {
        const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                          (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                          c == '-';
        out += keep ? c : '_';
    }
    return out;
}

std::string data_file_name(const ExperimentParams& params)
{
    return sanitize_label(params.experiment_id) + "-" +
           sanitize_label(params.algorithm_label) + "-" +
           std::to_string(params.iterations) + "_data.csv";
}

std::string data_file_header()
{
    return "# data-schema v1\n"
           "timestamp,elapsed_s,voltage_v,current_a,power_w,energy_mwh,"
           "energy_j\n";
}

std::string sample_row(const MeterReading& reading, std::int64_t wall_ns,
                       const SessionOrigin& origin)
{
    const double elapsed = reading.t - origin.t0;
    const double energy_j = mwh_to_joules(
        static_cast<double>(reading.energy_mwh - origin.energy0_mwh));
    std::ostringstream out;
    out << format_iso8601(wall_ns) << ',' << format_fixed(elapsed, 3) << ','
        << format_fixed(reading.voltage, 4) << ','
        << format_fixed(reading.current, 5) << ','
        << format_fixed(reading.power, 4) << ',' << reading.energy_mwh << ','
        << format_fixed(energy_j, 1);
    return out.str();
}

SummaryRow make_summary(const ExperimentParams& params,
                        const MeterReading& first, const MeterReading& last,
                        std::optional<double> dut_wall_seconds,
                        std::string status, std::int64_t finalize_wall_ns)
{
    SummaryRow row;
    row.timestamp = format_iso8601(finalize_wall_ns);
    row.algorithm_label = params.algorithm_label;
    row.iterations = params.iterations;
    row.gross_joules =
        mwh_to_joules(static_cast<double>(last.energy_mwh - first.energy_mwh));
    row.wall_seconds = dut_wall_seconds.value_or(last.t - first.t);
    const double per_1000 = 1000.0 / static_cast<double>(params.iterations);
    row.joules_per_1000 = row.gross_joules * per_1000;
    row.seconds_per_1000 = row.wall_seconds * per_1000;
    row.status = std::move(status);
    return row;
}

namespace {

std::string printable(const std::string& raw, std::size_t cap = 96)
{
    std::string out;
    for (char c : raw) {
        if (out.size() >= cap) {
            out += "...";
            break;
        }
        out += (c >= 0x20 && c <= 0x7e) ? c : '.';
    }
    return out;
}

struct Event {
    enum class Kind { Datagram, Reading, MeterDown };
    Kind kind = Kind::Datagram;
    std::string text;       // datagram bytes or failure message
    MeterReading reading{}; // Kind::Reading
    std::int64_t wall_ns = 0;
};

class EventQueue {
public:
    void push(Event event)
    {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(event));
        }
        cv_.notify_one();
    }

    std::optional<Event> pop(std::chrono::milliseconds timeout)
    {
        std::unique_lock lock(mutex_);
        if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); }))
            return std::nullopt;
        Event event = std::move(queue_.front());
        queue_.pop_front();
        return event;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Event> queue_;
};

/// Owns the meter and the per-sample file for one measured window. Samples
/// immediately on launch, then on a fixed grid; when cancelled it takes one
/// closing sample so the session always ends on a fresh reading.
class AcquisitionWorker {
public:
    struct Stats {
        MeterReading first{};
        MeterReading last{};
        std::uint64_t rows = 0;
        bool meter_failed = false;
        std::string failure;
    };

    AcquisitionWorker(Clock& clock, std::unique_ptr<MeterBackend> meter,
                      std::ofstream file, double poll_hz, EventQueue& events)
        : clock_(clock), meter_(std::move(meter)), file_(std::move(file)),
          period_s_(1.0 / poll_hz), events_(events)
    {
    }

    ~AcquisitionWorker() { finish(); }

    void launch()
    {
        thread_ = std::thread([this] { run(); });
    }

    Stats finish()
    {
        cancel_ = true;
        if (thread_.joinable())
            thread_.join();
        return stats_;
    }

private:
    void run()
    {
        double next_tick = clock_.now();
        for (;;) {
            if (!sample_once())
                break;
            if (cancel_.load())
                break;
            next_tick += period_s_;
            if (!clock_.wait_until(next_tick, cancel_)) {
                sample_once(); // closing sample at the stop instant
                break;
            }
        }
        file_.flush();
    }

    // False when the meter is given up on (3 consecutive transient failures
    // or one hard failure).
    bool sample_once()
    {
        auto polled = meter_->poll();
        if (!polled.ok()) {
            if (is_transient(polled.error()) && ++consecutive_failures_ < 3)
                return true; // skip this tick, try again on the next
            stats_.meter_failed = true;
            stats_.failure = polled.error().message;
            Event event;
            event.kind = Event::Kind::MeterDown;
            event.text = stats_.failure;
            events_.push(event);
            return false;
        }
        consecutive_failures_ = 0;

        const MeterReading reading = polled.value();
        if (stats_.rows > 0 && reading.t <= stats_.last.t)
            return true; // same instant (frozen virtual clock); nothing new
        if (stats_.rows == 0) {
            stats_.first = reading;
            origin_ = {reading.t, reading.energy_mwh};
        }
        stats_.last = reading;
        ++stats_.rows;

        Event event;
        event.kind = Event::Kind::Reading;
        event.reading = reading;
        event.wall_ns = clock_.wall_unix_ns();
        file_ << sample_row(reading, event.wall_ns, origin_) << '\n';
        file_.flush(); // crash safety: lose at most one sample
        events_.push(event);
        return true;
    }

    Clock& clock_;
    std::unique_ptr<MeterBackend> meter_;
    std::ofstream file_;
    double period_s_;
    EventQueue& events_;
    std::thread thread_;
    std::atomic<bool> cancel_{false};
    Stats stats_;
    SessionOrigin origin_;
    int consecutive_failures_ = 0;
};

struct LiveSession {
    ExperimentParams params;
    std::filesystem::path data_path;
    std::ofstream file;                  // handed to the worker at START
    std::unique_ptr<MeterBackend> meter; // likewise
    std::unique_ptr<AcquisitionWorker> worker;
    std::optional<MeterReading> first_seen; // coordinator-side copy for status
    std::uint64_t last_energy = 0;
    double last_energy_change_t = 0;
    double ready_t = 0;
};

} // namespace

Result<std::string>
select_port(const std::vector<std::string>& candidates,
            const std::optional<std::string>& forced,
            const std::function<std::optional<std::string>()>& prompt,
            std::ostream& console)
{
    using R = Result<std::string>;
    if (forced) {
        console << "Selected COM port: " << *forced << " (forced)\n";
        return *forced;
    }
    if (candidates.empty())
        return R::failure("no serial ports detected; use --com to name one");

    console << "Please select the meter serial port\n";
    for (std::size_t i = 0; i < candidates.size(); ++i)
        console << i + 1 << ": " << candidates[i] << '\n';
    console << "Enter line# (default 1): " << std::flush;

    std::string chosen = candidates.front();
    const auto reply = prompt ? prompt() : std::nullopt;
    if (!reply) {
        console << "No user response; defaulting to " << chosen << '\n';
    } else {
        const std::string text = trim(*reply);
        std::size_t index = 0;
        const auto [p, ec] =
            std::from_chars(text.data(), text.data() + text.size(), index);
        if (ec == std::errc() && p == text.data() + text.size() && index >= 1 &&
            index <= candidates.size()) {
            chosen = candidates[index - 1];
        } else {
            console << "Unrecognised selection '" << text
                    << "'; defaulting to " << chosen << '\n';
        }
    }
    console << "Selected COM port: " << chosen << '\n';
    return chosen;
}

std::function<std::optional<std::string>()> stdin_prompt(double timeout_s)
{
    return [timeout_s]() -> std::optional<std::string> {
        pollfd pfd{0, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_s * 1000));
        if (rc <= 0)
            return std::nullopt;
        std::string line;
        if (!std::getline(std::cin, line))
            return std::nullopt;
        return line;
    };
}

Status serve_collector(Clock& clock, const MeterFactory& factory,
                       const CollectorOptions& options, CollectorStatus& status,
                       std::ostream& console)
{
    auto bound = UdpSocket::bind(options.port, options.bind_host);
    if (!bound.ok())
        return Status::failure("collector startup: " + bound.error());
    UdpSocket socket = std::move(bound).value();
    status.port = socket.local_port();

    console << "Network Listener starting (UDP)\n";
    console << "Main thread started; waiting for GETREADY\n";
    console << "Listening for control messages on " << options.bind_host << ':'
            << socket.local_port() << '\n';

    EventQueue events;
    std::atomic<bool> listener_stop{false};
    std::thread listener([&] {
        while (!listener_stop.load()) {
            auto got = socket.recv(0.05);
            if (!got.ok())
                break; // socket died; coordinator keeps draining the queue
            if (!got.value())
                continue;
            Event event;
            event.kind = Event::Kind::Datagram;
            event.text = *got.value();
            events.push(event);
        }
    });
    status.listening = true;

    CollectorState state = CollectorState::Idle;
    std::optional<LiveSession> session;
    std::optional<ExperimentParams> completed_params; // duplicate detection
    int completed = 0;
    bool live_line_open = false;
    Status outcome;

    auto end_live_line = [&] {
        if (live_line_open) {
            console << '\n';
            live_line_open = false;
        }
    };

    auto finalize = [&](const std::string& status_label) {
        end_live_line();
        AcquisitionWorker::Stats stats;
        if (session && session->worker)
            stats = session->worker->finish();
        console << "Data logging file flushed and saved\n";
        console << "Data Acquisition stopped; meter closed\n";
        console << "Cleanup complete\n";

        SummaryRow row;
        if (stats.rows == 0) {
            console << "Warning: no samples recorded for "
                    << session->params.experiment_id << '\n';
            row = make_summary(session->params, MeterReading{}, MeterReading{},
                               0.0, "no-data", clock.wall_unix_ns());
        } else {
            row = make_summary(session->params, stats.first, stats.last,
                               std::nullopt,
                               stats.meter_failed ? "truncated" : status_label,
                               clock.wall_unix_ns());
        }
        if (auto appended =
                append_summary_row(options.out_dir / "AllResults.csv", row);
            !appended.ok())
            console << "Error: " << appended.error() << '\n';

        console << "*Total Energy: " << format_fixed(row.gross_joules, 1)
                << " J over " << format_fixed(row.wall_seconds, 1) << " s\n";
        console << "*Energy Rate: " << format_fixed(row.joules_per_1000, 2)
                << " J/1,000 keygens\n";
        console << "Master: AllResults.csv appended (" << row.status << ")\n";
        console << "STOP message processed; session complete\n";

        completed_params = session->params;
        session.reset();
        state = CollectorState::Idle;
        ++completed;
        status.sessions_completed = completed;
    };

    auto on_get_ready = [&](const ExperimentParams& params) {
        if (completed_params && params == *completed_params) {
            console << "Duplicate GETREADY for finished experiment "
                    << params.experiment_id << " ignored\n";
            return;
        }
        console << "Experiment parameters: id=" << params.experiment_id
                << " algorithm=" << params.algorithm_label
                << " iterations=" << params.iterations
                << " poll_hz=" << format_compact(params.poll_hz) << '\n';

        LiveSession next;
        next.params = params;
        next.data_path = options.out_dir / data_file_name(params);
        next.file.open(next.data_path, std::ios::trunc);
        if (!next.file) {
            console << "Error: cannot open " << next.data_path.string()
                    << "; staying idle\n";
            return;
        }
        next.file << data_file_header();
        next.file.flush();
        console << "Output file opened: " << data_file_name(params) << '\n';
        console << "GETREADY received; acquiring via " << options.meter_note
                << '\n';

        next.meter = factory ? factory() : nullptr;
        if (!next.meter) {
            console << "Error: no meter backend available; staying idle\n";
            return;
        }
        if (auto opened = next.meter->open(); !opened.ok()) {
            console << "Error: meter open failed: " << opened.error().message
                    << "; staying idle\n";
            return;
        }
        console << "Meter initialised (" << next.meter->describe() << ")\n";
        next.ready_t = clock.now();
        session.emplace(std::move(next));
        completed_params.reset();
        state = CollectorState::Ready;
    };

    auto on_start = [&] {
        console << "START signal received\n";
        console << "Data Acquisition starting; counters baseline at first "
                   "sample\n";
        session->worker = std::make_unique<AcquisitionWorker>(
            clock, std::move(session->meter), std::move(session->file),
            session->params.poll_hz, events);
        session->last_energy_change_t = clock.now();
        session->worker->launch();
        state = CollectorState::Acquiring;
    };

    auto handle_datagram = [&](const std::string& raw) {
        end_live_line();
        console << "Received: '" << printable(raw) << "'\n";
        auto decoded = decode_control(raw);
        if (!decoded.ok()) {
            console << "Warning: ignoring datagram: " << decoded.error() << '\n';
            return;
        }
        const ControlMessage& msg = decoded.value();
        auto next = advance_state(state, msg);
        if (!next.ok()) {
            // UDP can duplicate datagrams; the two benign repeats are silent.
            if (state == CollectorState::Ready &&
                msg.kind == MessageKind::GetReady && session &&
                msg.params == session->params) {
                console << "Duplicate GETREADY ignored\n";
                return;
            }
            if (state == CollectorState::Idle &&
                msg.kind == MessageKind::Stop && completed_params) {
                console << "Duplicate STOP ignored\n";
                return;
            }
            console << "Warning: " << next.error() << "; no files touched\n";
            return;
        }
        switch (msg.kind) {
        case MessageKind::GetReady:
            on_get_ready(*msg.params);
            break;
        case MessageKind::Start:
            on_start();
            break;
        case MessageKind::Stop:
            console << "STOP signal received; totals are known\n";
            finalize("ok");
            break;
        }
    };

    auto handle_reading = [&](const MeterReading& reading) {
        if (state != CollectorState::Acquiring || !session)
            return; // stale event from a finalized session
        ++status.samples_taken;
        if (!session->first_seen) {
            session->first_seen = reading;
            session->last_energy = reading.energy_mwh;
            session->last_energy_change_t = clock.now();
        } else if (reading.energy_mwh != session->last_energy) {
            session->last_energy = reading.energy_mwh;
            session->last_energy_change_t = clock.now();
        }
        const double joules = mwh_to_joules(static_cast<double>(
            reading.energy_mwh - session->first_seen->energy_mwh));
        const double elapsed = reading.t - session->first_seen->t;
        console << "\rJoules thus far: " << format_fixed(joules, 1)
                << " J, elapsed " << format_fixed(elapsed, 1) << " s   "
                << std::flush;
        live_line_open = true;
    };

    auto check_timeouts = [&] {
        if (!session)
            return;
        if (state == CollectorState::Acquiring &&
            clock.now() - session->last_energy_change_t >=
                options.idle_timeout_s) {
            end_live_line();
            console << "Idle timeout: energy static for "
                    << format_fixed(options.idle_timeout_s, 0)
                    << " s with no STOP; finalizing as truncated\n";
            finalize("truncated");
        } else if (state == CollectorState::Ready &&
                   clock.now() - session->ready_t >= options.idle_timeout_s) {
            console << "Idle timeout: no START after GETREADY; discarding "
                       "prepared session\n";
            session.reset();
            state = CollectorState::Idle;
        }
    };

    for (;;) {
        if (status.stop_requested.load()) {
            if (state == CollectorState::Acquiring)
                finalize("truncated");
            break;
        }
        if (options.session_limit > 0 && completed >= options.session_limit)
            break;

        auto event = events.pop(std::chrono::milliseconds(50));
        if (!event) {
            check_timeouts();
            continue;
        }
        switch (event->kind) {
        case Event::Kind::Datagram:
            handle_datagram(event->text);
            break;
        case Event::Kind::Reading:
            handle_reading(event->reading);
            break;
        case Event::Kind::MeterDown:
            if (state == CollectorState::Acquiring) {
                end_live_line();
                console << "Meter failure: " << event->text
                        << "; finalizing as truncated\n";
                finalize("truncated");
            }
            break;
        }
        check_timeouts();
    }

    listener_stop = true;
    listener.join();
    status.listening = false;
    end_live_line();
    console << "Network Listener stopped\n";
    return outcome;
}

} // namespace keymeter
