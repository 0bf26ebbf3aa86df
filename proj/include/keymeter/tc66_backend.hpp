#pragma once

#include <optional>
#include <string>

#include "keymeter/clock.hpp"
#include "keymeter/meter.hpp"
#include "keymeter/serial_port.hpp"

namespace keymeter {

// MeterBackend speaking the TC66C serial protocol: each poll writes the
// "getva" command and reads back one 192-byte encrypted frame.
class Tc66SerialBackend : public MeterBackend {
public:
    Tc66SerialBackend(std::string device, Clock& clock,
                      double read_timeout_s = 1.0);

    Result<void, SampleError> open() override;
    Result<MeterReading, SampleError> poll() override;
    std::string describe() const override;

    // Test hook: run against an already-open descriptor (e.g. a pty pair).
    static Tc66SerialBackend from_port(SerialPort port, Clock& clock);

private:
    Tc66SerialBackend(SerialPort port, Clock& clock);

    std::string device_;
    double read_timeout_s_ = 1.0;
    Clock* clock_;
    std::optional<SerialPort> port_;
};

} // namespace keymeter
