#include "keymeter/control.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace keymeter {

namespace {

constexpr char kSeparator = '|';

bool is_printable(char c)
{
    return c >= 0x20 && c <= 0x7e;
}

/// Printable ASCII without the field separator.
Status check_field_text(std::string_view field_name, std::string_view text)
{
    if (text.empty())
        return Status::failure(std::string(field_name) + ": empty");
    for (char c : text) {
        if (c == kSeparator)
            return Status::failure(std::string(field_name) +
                                   ": contains separator '|'");
        if (!is_printable(c))
            return Status::failure(std::string(field_name) +
                                   ": non-printable character");
    }
    return Status();
}

std::string format_poll_hz(double hz)
{
    // Shortest representation that parses back to the same value, so the
    // encode/decode pair round-trips bit-exactly.
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, hz);
    return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(kSeparator, start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

Status validate_params(const ExperimentParams& params)
{
    if (auto s = check_field_text("experiment_id", params.experiment_id); !s)
        return s;
    if (auto s = check_field_text("algorithm_label", params.algorithm_label); !s)
        return s;
    if (params.iterations < 1)
        return Status::failure("iterations: must be >= 1");
    if (!(params.poll_hz > 0) || !std::isfinite(params.poll_hz))
        return Status::failure("poll_hz: must be > 0");
    if (params.poll_hz > kMaxPollHz)
        return Status::failure("poll_hz: exceeds 10 Hz maximum");
    return Status();
}

const char* to_string(MessageKind kind)
{
    switch (kind) {
    case MessageKind::GetReady:
        return "GETREADY";
    case MessageKind::Start:
        return "START";
    case MessageKind::Stop:
        return "STOP";
    }
    return "?";
}

const char* to_string(CollectorState state)
{
    switch (state) {
    case CollectorState::Idle:
        return "Idle";
    case CollectorState::Ready:
        return "Ready";
    case CollectorState::Acquiring:
        return "Acquiring";
    case CollectorState::Done:
        return "Done";
    }
    return "?";
}

ControlMessage ControlMessage::get_ready(ExperimentParams params)
{
    return ControlMessage{MessageKind::GetReady, std::move(params)};
}

ControlMessage ControlMessage::start()
{
    return ControlMessage{MessageKind::Start, std::nullopt};
}

ControlMessage ControlMessage::stop()
{
    return ControlMessage{MessageKind::Stop, std::nullopt};
}

std::string encode_control(const ControlMessage& msg)
{
    switch (msg.kind) {
    case MessageKind::Start:
        return "START";
    case MessageKind::Stop:
        return "STOP";
    case MessageKind::GetReady:
        break;
    }

    if (!msg.params)
        throw std::invalid_argument("encode_control: GETREADY without parameters");
    if (auto s = validate_params(*msg.params); !s)
        throw std::invalid_argument("encode_control: " + s.error());

    const ExperimentParams& p = *msg.params;
    std::string out = "GETREADY";
    out += kSeparator;
    out += p.experiment_id;
    out += kSeparator;
    out += p.algorithm_label;
    out += kSeparator;
    out += std::to_string(p.iterations);
    out += kSeparator;
    out += format_poll_hz(p.poll_hz);

    if (out.size() > kMaxDatagramBytes)
        throw std::invalid_argument("encode_control: datagram exceeds " +
                                    std::to_string(kMaxDatagramBytes) + " bytes");
    return out;
}

Result<ControlMessage> decode_control(std::string_view datagram)
{
    using R = Result<ControlMessage>;

    if (datagram.empty())
        return R::failure("datagram: empty");
    if (datagram.size() > kMaxDatagramBytes)
        return R::failure("datagram: exceeds " +
                          std::to_string(kMaxDatagramBytes) + " bytes");
    for (char c : datagram) {
        if (c != kSeparator && !is_printable(c))
            return R::failure("datagram: non-printable character");
    }

    const auto fields = split_fields(datagram);
    const std::string_view verb = fields[0];

    if (verb == "START" || verb == "STOP") {
        if (fields.size() != 1)
            return R::failure("field count: " + std::string(verb) +
                              " takes no parameters");
        return verb == "START" ? ControlMessage::start() : ControlMessage::stop();
    }

    if (verb != "GETREADY")
        return R::failure("verb: unknown '" + std::string(verb) + "'");

    if (fields.size() != 5)
        return R::failure("field count: GETREADY expects 5 fields, got " +
                          std::to_string(fields.size()));

    ExperimentParams params;
    params.experiment_id = std::string(fields[1]);
    params.algorithm_label = std::string(fields[2]);

    const std::string_view iter_text = fields[3];
    auto [iter_end, iter_ec] =
        std::from_chars(iter_text.data(), iter_text.data() + iter_text.size(),
                        params.iterations);
    if (iter_ec != std::errc() || iter_end != iter_text.data() + iter_text.size())
        return R::failure("iterations: not a positive integer");

    const std::string_view hz_text = fields[4];
    auto [hz_end, hz_ec] = std::from_chars(
        hz_text.data(), hz_text.data() + hz_text.size(), params.poll_hz);
    if (hz_ec != std::errc() || hz_end != hz_text.data() + hz_text.size())
        return R::failure("poll_hz: not a number");

    if (auto s = validate_params(params); !s)
        return R::failure(s.error());

    return ControlMessage::get_ready(std::move(params));
}

Result<CollectorState> advance_state(CollectorState state, const ControlMessage& msg)
{
    using R = Result<CollectorState>;

    switch (msg.kind) {
    case MessageKind::GetReady:
        if (state == CollectorState::Idle)
            return CollectorState::Ready;
        break;
    case MessageKind::Start:
        if (state == CollectorState::Ready)
            return CollectorState::Acquiring;
        break;
    case MessageKind::Stop:
        if (state == CollectorState::Acquiring)
            return CollectorState::Done;
        break;
    }
    return R::failure(std::string("protocol-order error: ") +
                      to_string(msg.kind) + " while " + to_string(state));
}

} // namespace keymeter
