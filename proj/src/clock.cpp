#include "keymeter/clock.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <thread>

namespace keymeter {

namespace {

std::int64_t to_ns(double seconds)
{
    return static_cast<std::int64_t>(std::llround(seconds * 1e9));
}

std::int64_t steady_ns()
{
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

SystemClock::SystemClock() : origin_ns_(steady_ns()) {}

double SystemClock::now() const
{
    return static_cast<double>(steady_ns() - origin_ns_) * 1e-9;
}

std::int64_t SystemClock::wall_unix_ns() const
{
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_for(double seconds)
{
    if (seconds > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

bool SystemClock::wait_until(double deadline, const std::atomic<bool>& cancel)
{
    // Cancellation is polled; 5 ms granularity is well below any poll period.
    constexpr double kSlice = 0.005;
    while (true) {
        if (cancel.load(std::memory_order_relaxed))
            return false;
        const double remaining = deadline - now();
        if (remaining <= 0)
            return true;
        sleep_for(remaining < kSlice ? remaining : kSlice);
    }
}

VirtualClock::VirtualClock(std::int64_t wall_base_unix_ns)
    : wall_base_ns_(wall_base_unix_ns)
{
}

double VirtualClock::now() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<double>(now_ns_) * 1e-9;
}

std::int64_t VirtualClock::wall_unix_ns() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return wall_base_ns_ + now_ns_;
}

void VirtualClock::sleep_for(double seconds)
{
    advance(seconds);
}

void VirtualClock::advance(double seconds)
{
    if (seconds <= 0)
        return;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        now_ns_ += to_ns(seconds);
    }
    cv_.notify_all();
}

bool VirtualClock::wait_until(double deadline, const std::atomic<bool>& cancel)
{
    const std::int64_t deadline_ns = to_ns(deadline);
    std::unique_lock<std::mutex> lock(mutex_);
    while (true) {
        if (now_ns_ >= deadline_ns)
            return true;
        if (cancel.load(std::memory_order_relaxed))
            return false;
        // Cancellation comes from threads that do not touch the clock, so
        // wake periodically instead of relying on notifications alone.
        cv_.wait_for(lock, std::chrono::milliseconds(1));
    }
}

std::string format_iso8601(std::int64_t unix_ns)
{
    const std::time_t secs = static_cast<std::time_t>(unix_ns / 1000000000LL);
    const std::int64_t frac_ns = unix_ns % 1000000000LL;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%04lldZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec,
                  static_cast<long long>(frac_ns / 100000LL));
    return buf;
}

std::string format_timestamp_id(std::int64_t unix_ns)
{
    const std::time_t secs = static_cast<std::time_t>(unix_ns / 1000000000LL);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[72];
    std::snprintf(buf, sizeof buf, "%04d%02d%02d%02d%02d%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

} // namespace keymeter
