#pragma once

#include <cstdint>
#include <string>

#include "keymeter/result.hpp"

namespace keymeter {

/// One electrical sample from a meter backend. `energy_mwh` is the device's
/// cumulative group counter since its last reset; it never decreases within a
/// session, and session energy is always computed as a delta of two readings.
struct MeterReading {
    double t = 0;          // monotonic seconds (backend clock)
    double voltage = 0;    // V
    double current = 0;    // A
    double power = 0;      // W
    std::uint64_t energy_mwh = 0;
};

enum class SampleErrorKind {
    Timeout,   // transient: no reply within the read timeout
    ShortRead, // transient: truncated frame
    Integrity, // transient: frame failed tag/checksum validation
    NotOpen,   // usage error: poll before open
    Io,        // device or port level failure
};

struct SampleError {
    SampleErrorKind kind = SampleErrorKind::Io;
    std::string message;
};

inline bool is_transient(const SampleError& e)
{
    return e.kind == SampleErrorKind::Timeout ||
           e.kind == SampleErrorKind::ShortRead ||
           e.kind == SampleErrorKind::Integrity;
}

/// Uniform sampling interface over the real TC66C and the simulator.
/// A backend instance is owned by exactly one acquisition loop; it may be
/// created on one thread and handed to another before use.
class MeterBackend {
public:
    virtual ~MeterBackend() = default;

    virtual Result<void, SampleError> open() = 0;

    /// One fresh reading with a monotonic timestamp. Blocking, bounded by the
    /// backend's read timeout.
    virtual Result<MeterReading, SampleError> poll() = 0;

    /// Short human-readable identity for console output.
    virtual std::string describe() const = 0;
};

} // namespace keymeter
