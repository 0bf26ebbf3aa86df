#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace keymeter {

/// 1 mWh = 3.6 J (3600 s/h over 1000 mWh/Wh).
inline constexpr double kJoulesPerMilliwattHour = 3.6;

inline double mwh_to_joules(double mwh)
{
    if (mwh < 0)
        throw std::domain_error("mwh_to_joules: negative input");
    return mwh * kJoulesPerMilliwattHour;
}

inline double joules_to_mwh(double joules)
{
    return joules / kJoulesPerMilliwattHour;
}

/// How the cumulative energy counter quantizes to whole mWh. The device is
/// assumed to floor; this is the single place to change if a hardware capture
/// shows rounding instead.
inline std::uint64_t quantize_energy_mwh(double joules)
{
    if (joules <= 0)
        return 0;
    return static_cast<std::uint64_t>(std::floor(joules / kJoulesPerMilliwattHour));
}

/// Worst-case error introduced by mWh quantization, in joules.
inline constexpr double kEnergyQuantumJoules = kJoulesPerMilliwattHour;

} // namespace keymeter
