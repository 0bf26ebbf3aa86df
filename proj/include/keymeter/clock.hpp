#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>

namespace keymeter {

/// Injectable time source. All components that sleep, poll or timestamp go
/// through this interface so tests can run acquisition flows in virtual time.
///
/// `now()` is monotonic and only comparable against the same instance.
/// `wall_unix_ns()` feeds human-facing timestamps (CSV rows, experiment ids).
class Clock {
public:
    virtual ~Clock() = default;

    /// Monotonic time in seconds since an arbitrary per-instance origin.
    virtual double now() const = 0;

    /// Wall-clock time, nanoseconds since the Unix epoch.
    virtual std::int64_t wall_unix_ns() const = 0;

    /// Delay on the caller's own timeline (workload pacing, settle periods).
    virtual void sleep_for(double seconds) = 0;

    /// Block until `now() >= deadline` or `cancel` becomes true.
    /// Returns true when the deadline was reached, false when cancelled.
    virtual bool wait_until(double deadline, const std::atomic<bool>& cancel) = 0;
};

/// Real time: steady_clock for the monotonic axis, system_clock for wall time.
class SystemClock final : public Clock {
public:
    SystemClock();

    double now() const override;
    std::int64_t wall_unix_ns() const override;
    void sleep_for(double seconds) override;
    bool wait_until(double deadline, const std::atomic<bool>& cancel) override;

private:
    std::int64_t origin_ns_; // steady_clock reading at construction
};

/// Deterministic time for tests. Time moves only when a driver calls
/// `advance()` (or `sleep_for`, which is the driver-side delay). Followers
/// blocked in `wait_until` are released as the clock passes their deadline.
///
/// Backed by integer nanoseconds so repeated small steps accumulate exactly
/// (200 x 5 ms is exactly 1 s).
class VirtualClock final : public Clock {
public:
    /// `wall_base_unix_ns` anchors wall-clock output; virtual elapsed time is
    /// added on top of it.
    explicit VirtualClock(std::int64_t wall_base_unix_ns = kDefaultWallBaseNs);

    double now() const override;
    std::int64_t wall_unix_ns() const override;
    void sleep_for(double seconds) override;
    bool wait_until(double deadline, const std::atomic<bool>& cancel) override;

    void advance(double seconds);

    // 2025-05-07 13:32:28 UTC
    static constexpr std::int64_t kDefaultWallBaseNs = 1746624748000000000LL;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::int64_t now_ns_ = 0;
    std::int64_t wall_base_ns_;
};

/// `YYYY-MM-DDThh:mm:ss.ffffZ` (UTC, four fractional digits).
std::string format_iso8601(std::int64_t unix_ns);

/// Sortable 14-digit experiment id, `YYYYMMDDhhmmss` (UTC).
std::string format_timestamp_id(std::int64_t unix_ns);

} // namespace keymeter
