#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "keymeter/result.hpp"

namespace keymeter {

/// Default UDP port for the trigger channel. Overridable via CLI flag or the
/// KEYMETER_PORT environment variable.
inline constexpr std::uint16_t kDefaultControlPort = 55555;

/// Upper bound on any encoded control datagram.
inline constexpr std::size_t kMaxDatagramBytes = 512;

/// Highest sample rate the meter is polled at.
inline constexpr double kMaxPollHz = 10.0;

/// Parameters announced by the runner ahead of a measured window.
struct ExperimentParams {
    std::string experiment_id;   // timestamp-derived, sortable
    std::string algorithm_label; // e.g. "ML-KEM-1024" or "NULL"
    std::uint64_t iterations = 0;
    double poll_hz = kMaxPollHz; // collector sample rate, 0 < hz <= 10

    bool operator==(const ExperimentParams&) const = default;
};

/// Field-level validation; error names the offending field.
Status validate_params(const ExperimentParams& params);

enum class MessageKind { GetReady, Start, Stop };

const char* to_string(MessageKind kind);

/// One trigger datagram. Only GetReady carries a payload.
struct ControlMessage {
    MessageKind kind = MessageKind::Start;
    std::optional<ExperimentParams> params; // engaged iff kind == GetReady

    static ControlMessage get_ready(ExperimentParams params);
    static ControlMessage start();
    static ControlMessage stop();

    bool operator==(const ControlMessage&) const = default;
};

/// Wire encoding, plain ASCII with '|' separators:
///   GETREADY|<id>|<algorithm>|<iterations>|<poll_hz>
///   START
///   STOP
/// Throws std::invalid_argument when a field violates its invariants
/// (separator or non-printable characters, zero iterations, poll_hz out of
/// range) or the datagram would exceed kMaxDatagramBytes.
std::string encode_control(const ControlMessage& msg);

/// Exact inverse of encode_control. Handles arbitrary bytes; errors name the
/// offending field.
Result<ControlMessage> decode_control(std::string_view datagram);

/// Collector-side acquisition lifecycle.
enum class CollectorState { Idle, Ready, Acquiring, Done };

const char* to_string(CollectorState state);

/// Pure transition function. Exactly three (state, kind) pairs are legal:
///   Idle + GetReady -> Ready
///   Ready + Start   -> Acquiring
///   Acquiring + Stop -> Done
/// Every other pair is a protocol-order error and leaves the state unchanged
/// (callers keep their current value).
Result<CollectorState> advance_state(CollectorState state, const ControlMessage& msg);

} // namespace keymeter
