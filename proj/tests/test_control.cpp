#include <doctest.h>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "keymeter/control.hpp"

using namespace keymeter;

namespace {

ExperimentParams params_of(std::string id, std::string algo, std::uint64_t iters,
                           double hz)
{
    ExperimentParams p;
    p.experiment_id = std::move(id);
    p.algorithm_label = std::move(algo);
    p.iterations = iters;
    p.poll_hz = hz;
    return p;
}

} // namespace

TEST_CASE("control wire format matches the documented examples")
{
    const auto msg = ControlMessage::get_ready(
        params_of("20250507133228", "ML-KEM-1024", 3200, 10.0));
    CHECK(encode_control(msg) == "GETREADY|20250507133228|ML-KEM-1024|3200|10");

    CHECK(encode_control(ControlMessage::start()) == "START");
    CHECK(encode_control(ControlMessage::stop()) == "STOP");

    const auto null_run =
        ControlMessage::get_ready(params_of("x", "NULL", 100000, 10.0));
    CHECK(encode_control(null_run) == "GETREADY|x|NULL|100000|10");
}

TEST_CASE("decode recovers the documented examples")
{
    auto decoded = decode_control("GETREADY|20250507133228|ML-KEM-1024|3200|10");
    REQUIRE(decoded.ok());
    REQUIRE(decoded.value().kind == MessageKind::GetReady);
    const auto& p = *decoded.value().params;
    CHECK(p.experiment_id == "20250507133228");
    CHECK(p.algorithm_label == "ML-KEM-1024");
    CHECK(p.iterations == 3200);
    CHECK(p.poll_hz == 10.0);

    auto start = decode_control("START");
    REQUIRE(start.ok());
    CHECK(start.value().kind == MessageKind::Start);
    CHECK(!start.value().params.has_value());

    auto stop = decode_control("STOP");
    REQUIRE(stop.ok());
    CHECK(stop.value().kind == MessageKind::Stop);
}

TEST_CASE("decode errors name the offending field")
{
    auto check_error = [](std::string_view wire, std::string_view needle) {
        auto decoded = decode_control(wire);
        REQUIRE_FALSE(decoded.ok());
        CHECK_MESSAGE(decoded.error().find(needle) != std::string::npos,
                      "error '", decoded.error(), "' should mention '", needle,
                      "'");
    };

    check_error("START|extra", "field count");
    check_error("STOP|", "field count");
    check_error("GETREADY|id|NULL|100", "field count");
    check_error("GETREADY|id|NULL|100|10|surplus", "field count");
    check_error("HELLO", "verb");
    check_error("GETREADY|id|NULL|ten|10", "iterations");
    check_error("GETREADY|id|NULL|-5|10", "iterations");
    check_error("GETREADY|id|NULL|0|10", "iterations");
    check_error("GETREADY|id|NULL|100|fast", "poll_hz");
    check_error("GETREADY|id|NULL|100|11", "poll_hz");
    check_error("GETREADY|id|NULL|100|0", "poll_hz");
    check_error("GETREADY||NULL|100|10", "experiment_id");
    check_error("GETREADY|id||100|10", "algorithm_label");
    check_error("", "empty");
    check_error(std::string(1, '\x07') + "START", "non-printable");
    check_error("GETREADY|id|NULL|100|10" + std::string(600, 'x'), "exceeds");
}

TEST_CASE("encode rejects parameters that cannot travel on the wire")
{
    CHECK_THROWS_AS(
        encode_control(ControlMessage::get_ready(
            params_of("id|with|separators", "NULL", 10, 10.0))),
        std::invalid_argument);
    CHECK_THROWS_AS(encode_control(ControlMessage::get_ready(
                        params_of("id", "NULL", 0, 10.0))),
                    std::invalid_argument);
    CHECK_THROWS_AS(encode_control(ControlMessage::get_ready(
                        params_of("id", "NULL", 10, 12.0))),
                    std::invalid_argument);
    CHECK_THROWS_AS(encode_control(ControlMessage::get_ready(params_of(
                        "id", std::string(600, 'a'), 10, 10.0))),
                    std::invalid_argument);
}

TEST_CASE("encoded datagrams stay within the size budget")
{
    // Worst realistic case: a long (but legal) algorithm descriptor and a
    // billion iterations still fit comfortably under the 512-byte cap.
    const std::string long_algo(200, 'a');
    const auto wire = encode_control(ControlMessage::get_ready(
        params_of("20250507133228", long_algo, 1000000000, 0.1)));
    CHECK(wire.size() <= kMaxDatagramBytes);
}

TEST_CASE("1000 randomized messages round-trip through the wire format")
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> kind_dist(0, 2);
    std::uniform_int_distribution<int> length(1, 24);
    std::uniform_int_distribution<std::uint64_t> iters(1, 2'000'000'000ULL);
    std::uniform_real_distribution<double> hz(0.001, 10.0);
    // Printable ASCII minus the separator.
    const std::string alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
        "0123456789 -_.:,()~";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    auto random_text = [&] {
        std::string out;
        const int n = length(rng);
        for (int i = 0; i < n; ++i)
            out += alphabet[pick(rng)];
        return out;
    };

    for (int i = 0; i < 1000; ++i) {
        ControlMessage msg;
        switch (kind_dist(rng)) {
        case 0:
            msg = ControlMessage::get_ready(
                params_of(random_text(), random_text(), iters(rng), hz(rng)));
            break;
        case 1:
            msg = ControlMessage::start();
            break;
        default:
            msg = ControlMessage::stop();
            break;
        }
        const std::string wire = encode_control(msg);
        CHECK(wire.size() <= kMaxDatagramBytes);
        auto decoded = decode_control(wire);
        REQUIRE(decoded.ok());
        CHECK(decoded.value() == msg);
    }
}

TEST_CASE("advance_state: exactly three of the twelve (state, kind) pairs are legal")
{
    const CollectorState states[] = {CollectorState::Idle, CollectorState::Ready,
                                     CollectorState::Acquiring,
                                     CollectorState::Done};
    const ControlMessage messages[] = {
        ControlMessage::get_ready(params_of("id", "NULL", 1, 10.0)),
        ControlMessage::start(), ControlMessage::stop()};

    int legal = 0;
    for (CollectorState state : states) {
        for (const ControlMessage& msg : messages) {
            auto next = advance_state(state, msg);
            const bool expect_legal =
                (state == CollectorState::Idle &&
                 msg.kind == MessageKind::GetReady) ||
                (state == CollectorState::Ready &&
                 msg.kind == MessageKind::Start) ||
                (state == CollectorState::Acquiring &&
                 msg.kind == MessageKind::Stop);
            CHECK_MESSAGE(next.ok() == expect_legal, to_string(msg.kind),
                          " while ", to_string(state));
            if (!next.ok()) {
                CHECK(next.error().find("protocol-order") != std::string::npos);
                continue;
            }
            ++legal;
            if (state == CollectorState::Idle)
                CHECK(next.value() == CollectorState::Ready);
            if (state == CollectorState::Ready)
                CHECK(next.value() == CollectorState::Acquiring);
            if (state == CollectorState::Acquiring)
                CHECK(next.value() == CollectorState::Done);
        }
    }
    CHECK(legal == 3);
}

TEST_CASE("validate_params flags each field separately")
{
    CHECK(validate_params(params_of("id", "NULL", 1, 10.0)).ok());
    CHECK_FALSE(validate_params(params_of("", "NULL", 1, 10.0)).ok());
    CHECK_FALSE(validate_params(params_of("id", "", 1, 10.0)).ok());
    CHECK_FALSE(validate_params(params_of("id", "NULL", 0, 10.0)).ok());
    CHECK_FALSE(validate_params(params_of("id", "NULL", 1, 0.0)).ok());
    CHECK_FALSE(validate_params(params_of("id", "NULL", 1, 10.5)).ok());
    CHECK_FALSE(validate_params(params_of("id", "NU|LL", 1, 10.0)).ok());
}
