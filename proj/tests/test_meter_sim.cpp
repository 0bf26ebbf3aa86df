#include <doctest.h>

#include <cmath>
#include <random>

#include "keymeter/clock.hpp"
#include "keymeter/sim_meter.hpp"
#include "keymeter/units.hpp"
#include "support/support.hpp"

using namespace keymeter;

TEST_CASE("unit conversion: mWh to joules")
{
    CHECK(mwh_to_joules(0) == 0.0);
    CHECK(mwh_to_joules(100) == 360.0);
    CHECK(mwh_to_joules(1) == 3.6);
    CHECK_THROWS_AS(mwh_to_joules(-1), std::domain_error);

    // 3.082 GJ is the published annual figure behind the 856.11 kWh estimate.
    CHECK(joules_to_mwh(3.082e9) == doctest::Approx(856.111e6).epsilon(1e-6));
}

TEST_CASE("energy counter quantization floors to whole mWh")
{
    CHECK(quantize_energy_mwh(0.0) == 0);
    CHECK(quantize_energy_mwh(3.599999) == 0);
    CHECK(quantize_energy_mwh(3.6) == 1);
    CHECK(quantize_energy_mwh(7.199) == 1);
    CHECK(quantize_energy_mwh(-5.0) == 0);
    // 5 W for 10 s = 50 J = 13.888 mWh -> 13
    CHECK(quantize_energy_mwh(50.0) == 13);
}

TEST_CASE("constant profile integrates linearly")
{
    const auto profile = SimProfile::constant(5.0);
    CHECK(profile.energy_joules_at(0.0) == 0.0);
    CHECK(profile.energy_joules_at(10.0) == doctest::Approx(50.0));
    // The last power level holds beyond the declared segment.
    CHECK(profile.energy_joules_at(1000.0) == doctest::Approx(5000.0));
    CHECK(profile.power_at(0.5) == 5.0);
    CHECK(profile.power_at(500.0) == 5.0);
}

TEST_CASE("piecewise profile integrates per segment")
{
    SimProfile profile;
    profile.segments = {{1.0, 2.0}, {1.0, 4.0}};
    CHECK(profile.energy_joules_at(1.0) == doctest::Approx(2.0));
    CHECK(profile.energy_joules_at(2.0) == doctest::Approx(6.0));
    CHECK(profile.energy_joules_at(2.5) == doctest::Approx(8.0));
    CHECK(profile.power_at(0.5) == 2.0);
    CHECK(profile.power_at(1.5) == 4.0);

    SimProfile single;
    single.segments = {{2.0, 3.0}};
    // 6 J at t=2 is 1.666 mWh -> quantized counter reads 1.
    CHECK(quantize_energy_mwh(single.energy_joules_at(2.0)) == 1);

    // 2 J + 4 J = 6 J at t=2 likewise.
    CHECK(quantize_energy_mwh(profile.energy_joules_at(2.0)) == 1);
}

TEST_CASE("zero-power profile never accumulates energy")
{
    const auto profile = SimProfile::constant(0.0);
    VirtualClock clock;
    SimMeter meter(profile, clock);
    REQUIRE(meter.open().ok());
    for (int i = 0; i < 20; ++i) {
        clock.advance(1.0);
        auto reading = meter.poll();
        REQUIRE(reading.ok());
        CHECK(reading.value().energy_mwh == 0);
        CHECK(reading.value().power == 0.0);
    }
}

TEST_CASE("simulated meter: 5 W for 10 s reads 13 mWh")
{
    VirtualClock clock;
    SimMeter meter(SimProfile::constant(5.0), clock);
    REQUIRE(meter.open().ok());
    clock.advance(10.0);
    auto reading = meter.poll();
    REQUIRE(reading.ok());
    CHECK(reading.value().energy_mwh == 13);
    CHECK(reading.value().power == doctest::Approx(5.0));
    CHECK(reading.value().voltage == doctest::Approx(5.1));
    CHECK(reading.value().current == doctest::Approx(5.0 / 5.1));
}

TEST_CASE("poll before open is a NotOpen error")
{
    VirtualClock clock;
    SimMeter meter(SimProfile::constant(5.0), clock);
    auto reading = meter.poll();
    REQUIRE_FALSE(reading.ok());
    CHECK(reading.error().kind == SampleErrorKind::NotOpen);
    CHECK_FALSE(is_transient(reading.error()));
}

TEST_CASE("profile validation rejects malformed shapes")
{
    SimProfile empty;
    empty.segments.clear();
    CHECK_FALSE(validate_profile(empty).ok());

    SimProfile bad_duration;
    bad_duration.segments = {{0.0, 5.0}};
    CHECK_FALSE(validate_profile(bad_duration).ok());

    SimProfile negative_power;
    negative_power.segments = {{1.0, -1.0}};
    CHECK_FALSE(validate_profile(negative_power).ok());

    SimProfile bad_jitter = SimProfile::constant(5.0);
    bad_jitter.sample_jitter = 0.95;
    CHECK_FALSE(validate_profile(bad_jitter).ok());

    SimProfile bad_voltage = SimProfile::constant(5.0);
    bad_voltage.supply_voltage = 0.0;
    CHECK_FALSE(validate_profile(bad_voltage).ok());

    CHECK(validate_profile(SimProfile::constant(5.0)).ok());
}

TEST_CASE("profile text format parses directives and comments")
{
    auto parsed = parse_sim_profile("# a two-phase load\n"
                                    "voltage 5.0\n"
                                    "jitter 0.05\n"
                                    "seed 42\n"
                                    "segment 2 3.5\n"
                                    "segment 10 0.5\n");
    REQUIRE(parsed.ok());
    const SimProfile& p = parsed.value();
    CHECK(p.supply_voltage == 5.0);
    CHECK(p.sample_jitter == 0.05);
    CHECK(p.seed == 42);
    REQUIRE(p.segments.size() == 2);
    CHECK(p.segments[0].duration_s == 2.0);
    CHECK(p.segments[0].power_w == 3.5);
    CHECK(p.segments[1].power_w == 0.5);

    auto no_segments = parse_sim_profile("voltage 5.0\n");
    CHECK_FALSE(no_segments.ok());

    auto bad_directive = parse_sim_profile("segment 1 5\nwattage 3\n");
    REQUIRE_FALSE(bad_directive.ok());
    CHECK(bad_directive.error().find("line 2") != std::string::npos);

    auto bad_number = parse_sim_profile("segment one 5\n");
    CHECK_FALSE(bad_number.ok());
}

TEST_CASE("quantization stays within one quantum of the analytic integral")
{
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
        const SimProfile profile = testsupport::random_profile(rng);
        VirtualClock clock;
        SimMeter meter(profile, clock);
        REQUIRE(meter.open().ok());

        std::uint64_t previous = 0;
        std::uniform_real_distribution<double> step(0.01, 1.5);
        double t = 0;
        for (int i = 0; i < 60; ++i) {
            const double dt = step(rng);
            clock.advance(dt);
            t += dt;
            auto reading = meter.poll();
            REQUIRE(reading.ok());

            const double oracle =
                testsupport::oracle_profile_energy_j(profile, t);
            const double reported =
                static_cast<double>(reading.value().energy_mwh) *
                kJoulesPerMilliwattHour;
            CHECK_MESSAGE(std::abs(reported - oracle) < kEnergyQuantumJoules,
                          "round ", round, " t=", t, " reported ", reported,
                          " oracle ", oracle);
            CHECK(reported <= oracle + 1e-6); // flooring never over-reports

            CHECK(reading.value().energy_mwh >= previous);
            previous = reading.value().energy_mwh;
        }
    }
}

TEST_CASE("self-clocking sampler advances the virtual clock per poll")
{
    SimProfile profile = SimProfile::constant(7.2); // 1 mWh every 0.5 s
    VirtualClock clock;
    SimMeter meter(profile, clock);
    REQUIRE(meter.open().ok());
    SimSampler sampler(meter, clock, 10.0);

    const double start = clock.now();
    MeterReading last{};
    for (int i = 0; i < 100; ++i) {
        auto reading = sampler.next();
        REQUIRE(reading.ok());
        CHECK(reading.value().t > last.t);
        last = reading.value();
    }
    // No jitter: exactly 100 nominal periods.
    CHECK(clock.now() - start == doctest::Approx(10.0));
    CHECK(last.energy_mwh == 20); // 72 J over 10 s
}

TEST_CASE("jittered sampling keeps the mean cadence near nominal")
{
    SimProfile profile = SimProfile::constant(5.0);
    profile.sample_jitter = 0.2;
    profile.seed = 99;
    VirtualClock clock;
    SimMeter meter(profile, clock);
    REQUIRE(meter.open().ok());
    SimSampler sampler(meter, clock, 10.0);

    const double start = clock.now();
    const int samples = 2000;
    for (int i = 0; i < samples; ++i)
        REQUIRE(sampler.next().ok());
    const double mean_period = (clock.now() - start) / samples;
    // Symmetric jitter: the mean period converges on the nominal 100 ms.
    CHECK(mean_period == doctest::Approx(0.1).epsilon(0.02));
}
