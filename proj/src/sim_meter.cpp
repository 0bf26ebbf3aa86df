#include "keymeter/sim_meter.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "keymeter/units.hpp"

namespace keymeter {

double SimProfile::energy_joules_at(double t) const
{
    if (t <= 0)
        return 0;
    double joules = 0;
    double consumed = 0;
    for (const Segment& seg : segments) {
        const double take = std::min(seg.duration_s, t - consumed);
        if (take <= 0)
            return joules;
        joules += seg.power_w * take;
        consumed += take;
    }
    // Last power level holds beyond the profile end.
    if (t > consumed && !segments.empty())
        joules += segments.back().power_w * (t - consumed);
    return joules;
}

double SimProfile::power_at(double t) const
{
    if (segments.empty())
        return 0;
    double consumed = 0;
    for (const Segment& seg : segments) {
        consumed += seg.duration_s;
        if (t < consumed)
            return seg.power_w;
    }
    return segments.back().power_w;
}

SimProfile SimProfile::constant(double power_w, double supply_voltage)
{
    SimProfile p;
    p.segments.push_back({1.0, power_w});
    p.supply_voltage = supply_voltage;
    return p;
}

Status validate_profile(const SimProfile& profile)
{
    if (profile.segments.empty())
        return Status::failure("profile: needs at least one segment");
    for (const auto& seg : profile.segments) {
        if (!(seg.duration_s > 0))
            return Status::failure("segment: duration must be > 0");
        if (seg.power_w < 0)
            return Status::failure("segment: power must be >= 0");
    }
    if (!(profile.supply_voltage > 0))
        return Status::failure("profile: supply voltage must be > 0");
    if (profile.sample_jitter < 0 || profile.sample_jitter > 0.9)
        return Status::failure("profile: jitter must be within [0, 0.9]");
    return Status();
}

Result<SimProfile> parse_sim_profile(std::string_view text)
{
    using R = Result<SimProfile>;
    SimProfile profile;
    profile.segments.clear();

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#')
            continue;
        if (word == "voltage") {
            if (!(ls >> profile.supply_voltage))
                return R::failure("line " + std::to_string(line_no) +
                                  ": voltage needs a number");
        } else if (word == "jitter") {
            if (!(ls >> profile.sample_jitter))
                return R::failure("line " + std::to_string(line_no) +
                                  ": jitter needs a number");
        } else if (word == "seed") {
            if (!(ls >> profile.seed))
                return R::failure("line " + std::to_string(line_no) +
                                  ": seed needs an integer");
        } else if (word == "segment") {
            SimProfile::Segment seg;
            if (!(ls >> seg.duration_s >> seg.power_w))
                return R::failure("line " + std::to_string(line_no) +
                                  ": segment needs <duration_s> <power_w>");
            profile.segments.push_back(seg);
        } else {
            return R::failure("line " + std::to_string(line_no) +
                              ": unknown directive '" + word + "'");
        }
    }

    if (auto s = validate_profile(profile); !s)
        return R::failure(s.error());
    return profile;
}

SimMeter::SimMeter(SimProfile profile, Clock& clock)
    : profile_(std::move(profile)), clock_(clock)
{
}

Result<void, SampleError> SimMeter::open()
{
    if (auto s = validate_profile(profile_); !s)
        return Result<void, SampleError>::failure(
            {SampleErrorKind::Io, s.error()});
    opened_ = true;
    open_t_ = clock_.now();
    return {};
}

MeterReading SimMeter::reading_at(double profile_t, double monotonic_t) const
{
    MeterReading r;
    r.t = monotonic_t;
    r.power = profile_.power_at(profile_t);
    r.voltage = profile_.supply_voltage;
    r.current = r.power / profile_.supply_voltage;
    r.energy_mwh = quantize_energy_mwh(profile_.energy_joules_at(profile_t));
    return r;
}

Result<MeterReading, SampleError> SimMeter::poll()
{
    if (!opened_)
        return Result<MeterReading, SampleError>::failure(
            {SampleErrorKind::NotOpen, "simulated meter polled before open"});
    const double now = clock_.now();
    return reading_at(now - open_t_, now);
}

std::string SimMeter::describe() const
{
    std::ostringstream out;
    out << "simulated meter (" << profile_.segments.size() << " segment";
    if (profile_.segments.size() != 1)
        out << "s";
    out << ", " << profile_.supply_voltage << " V supply)";
    return out.str();
}

SimSampler::SimSampler(SimMeter& meter, VirtualClock& clock, double poll_hz)
    : meter_(meter), clock_(clock), period_s_(1.0 / poll_hz),
      rng_(meter.profile().seed)
{
}

Result<MeterReading, SampleError> SimSampler::next()
{
    double step = period_s_;
    const double jitter = meter_.profile().sample_jitter;
    if (jitter > 0)
        step *= 1.0 + jitter * jitter_dist_(rng_);
    clock_.advance(step);
    return meter_.poll();
}

} // namespace keymeter
