#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keymeter/result.hpp"

namespace keymeter {

/// Raw byte stream over a serial line (or anything that looks like one, such
/// as a pty in tests). 115200 8N1 with a bounded read timeout.
class SerialPort {
public:
    SerialPort() = default;
    ~SerialPort();
    SerialPort(SerialPort&& other) noexcept;
    SerialPort& operator=(SerialPort&& other) noexcept;
    SerialPort(const SerialPort&) = delete;
    SerialPort& operator=(const SerialPort&) = delete;

    static Result<SerialPort> open(const std::string& device,
                                   double read_timeout_s = 1.0);

    /// Adopt an already-open descriptor (tests hand over one pty end).
    static SerialPort adopt(int fd, double read_timeout_s = 1.0);

    bool is_open() const { return fd_ >= 0; }
    const std::string& device() const { return device_; }

    Status write_all(std::span<const std::uint8_t> data);
    Status write_all(std::string_view text);

    /// Read until `want` bytes arrive or the timeout elapses with no further
    /// progress. Returns the number of bytes read (possibly short).
    Result<std::size_t> read_some(std::span<std::uint8_t> out, std::size_t want);

    void close();

private:
    int fd_ = -1;
    std::string device_;
    double read_timeout_s_ = 1.0;
};

/// Plausible meter ports on this host, stable order; by-id links first since
/// they identify the adapter, then raw ttyUSB/ttyACM nodes.
std::vector<std::string> discover_serial_ports();

} // namespace keymeter
