#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "keymeter/clock.hpp"
#include "keymeter/meter.hpp"
#include "keymeter/result.hpp"

namespace keymeter {

/// Deterministic load shape for the simulated meter: piecewise-constant power
/// over consecutive segments. Past the final segment the last power level
/// holds, so a constant profile is a single segment of any length.
struct SimProfile {
    struct Segment {
        double duration_s = 0; // > 0
        double power_w = 0;    // >= 0
    };

    std::vector<Segment> segments;
    double supply_voltage = 5.1; // V; current is derived as power / voltage
    double sample_jitter = 0;    // fraction of the nominal period, [0, 0.9]
    std::uint64_t seed = 0;      // rng seed for jittered sampling

    /// Exact integral of power over [0, t], in joules.
    double energy_joules_at(double t) const;

    /// Power at profile time t.
    double power_at(double t) const;

    static SimProfile constant(double power_w, double supply_voltage = 5.1);
};

Status validate_profile(const SimProfile& profile);

/// Text form, one directive per line (`#` comments allowed):
///   voltage 5.1
///   jitter 0.05
///   seed 42
///   segment <duration_s> <power_w>
Result<SimProfile> parse_sim_profile(std::string_view text);

/// Bit-faithful stand-in for the hardware meter: readings are derived from an
/// injected clock, and the cumulative energy counter is the exact profile
/// integral floored to whole mWh, so quantization behaves like the device's.
class SimMeter final : public MeterBackend {
public:
    SimMeter(SimProfile profile, Clock& clock);

    Result<void, SampleError> open() override;
    Result<MeterReading, SampleError> poll() override;
    std::string describe() const override;

    const SimProfile& profile() const { return profile_; }

    /// Reading at an explicit profile time (seconds since open).
    MeterReading reading_at(double profile_t, double monotonic_t) const;

private:
    SimProfile profile_;
    Clock& clock_;
    bool opened_ = false;
    double open_t_ = 0;
};

/// Self-clocking sample stream for desk-scale experiments without the
/// collector: each call advances the virtual clock by one nominal period
/// (optionally jittered per the profile) and polls the meter.
class SimSampler {
public:
    SimSampler(SimMeter& meter, VirtualClock& clock, double poll_hz);

    Result<MeterReading, SampleError> next();

private:
    SimMeter& meter_;
    VirtualClock& clock_;
    double period_s_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> jitter_dist_{-1.0, 1.0};
};

} // namespace keymeter
