#include "keymeter/tc66_backend.hpp"

#include <array>

#include "keymeter/tc66.hpp"

namespace keymeter {

Tc66SerialBackend::Tc66SerialBackend(std::string device, Clock& clock,
                                     double read_timeout_s)
    : device_(std::move(device)), read_timeout_s_(read_timeout_s),
      clock_(&clock)
{
}

Tc66SerialBackend::Tc66SerialBackend(SerialPort port, Clock& clock)
    : device_(port.device()), clock_(&clock), port_(std::move(port))
{
}

Tc66SerialBackend Tc66SerialBackend::from_port(SerialPort port, Clock& clock)
{
    return Tc66SerialBackend(std::move(port), clock);
}

Result<void, SampleError> Tc66SerialBackend::open()
{
    using R = Result<void, SampleError>;
    if (port_ && port_->is_open())
        return R();
    auto opened = SerialPort::open(device_, read_timeout_s_);
    if (!opened.ok())
        return R::failure({SampleErrorKind::Io, opened.error()});
    port_ = std::move(opened).value();
    return R();
}

Result<MeterReading, SampleError> Tc66SerialBackend::poll()
{
    using R = Result<MeterReading, SampleError>;
    if (!port_ || !port_->is_open())
        return R::failure({SampleErrorKind::NotOpen, "meter not open"});

    if (auto sent = port_->write_all(tc66::poll_command()); !sent.ok())
        return R::failure({SampleErrorKind::Io, sent.error()});

    std::array<std::uint8_t, tc66::kFrameBytes> raw{};
    auto got = port_->read_some(raw, raw.size());
    if (!got.ok())
        return R::failure({SampleErrorKind::Io, got.error()});
    if (got.value() == 0)
        return R::failure({SampleErrorKind::Timeout, "no reply to getva"});
    if (got.value() < raw.size())
        return R::failure({SampleErrorKind::ShortRead,
                           "got " + std::to_string(got.value()) + " of " +
                               std::to_string(raw.size()) + " bytes"});

    auto frame = tc66::decode_frame(raw);
    if (!frame.ok())
        return R::failure({SampleErrorKind::Integrity, frame.error().message});

    const auto& f = frame.value();
    MeterReading reading;
    reading.t = clock_->now();
    reading.voltage = f.voltage();
    reading.current = f.current();
    reading.power = f.power();
    reading.energy_mwh = f.group0_mwh;
    return reading;
}

std::string Tc66SerialBackend::describe() const
{
    return "tc66:" + device_;
}

} // namespace keymeter
