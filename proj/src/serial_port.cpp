#include "keymeter/serial_port.hpp"

#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

namespace keymeter {

namespace fs = std::filesystem;

SerialPort::~SerialPort()
{
    close();
}

SerialPort::SerialPort(SerialPort&& other) noexcept
    : fd_(other.fd_), device_(std::move(other.device_)),
      read_timeout_s_(other.read_timeout_s_)
{
    other.fd_ = -1;
}

SerialPort& SerialPort::operator=(SerialPort&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.fd_;
        device_ = std::move(other.device_);
        read_timeout_s_ = other.read_timeout_s_;
        other.fd_ = -1;
    }
    return *this;
}

void SerialPort::close()
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Result<SerialPort> SerialPort::open(const std::string& device,
                                    double read_timeout_s)
{
    const int fd = ::open(device.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
    if (fd < 0)
        return Result<SerialPort>::failure("open " + device + ": " +
                                           std::strerror(errno));

    termios tio{};
    if (tcgetattr(fd, &tio) == 0) {
        cfmakeraw(&tio);
        cfsetispeed(&tio, B115200);
        cfsetospeed(&tio, B115200);
        tio.c_cflag &= ~static_cast<tcflag_t>(PARENB | CSTOPB); // 8N1
        tio.c_cflag |= CS8 | CLOCAL | CREAD;
        tio.c_cc[VMIN] = 0;
        tio.c_cc[VTIME] = 0; // timeouts handled via poll()
        if (tcsetattr(fd, TCSANOW, &tio) != 0) {
            ::close(fd);
            return Result<SerialPort>::failure("tcsetattr " + device + ": " +
                                               std::strerror(errno));
        }
        tcflush(fd, TCIOFLUSH);
    }
    // A pty in tests is not a tty with full termios support; proceed anyway.

    SerialPort port;
    port.fd_ = fd;
    port.device_ = device;
    port.read_timeout_s_ = read_timeout_s;
    return port;
}

SerialPort SerialPort::adopt(int fd, double read_timeout_s)
{
    SerialPort port;
    port.fd_ = fd;
    port.device_ = "<adopted>";
    port.read_timeout_s_ = read_timeout_s;
    return port;
}

Status SerialPort::write_all(std::span<const std::uint8_t> data)
{
    if (fd_ < 0)
        return Status::failure("port not open");
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd_, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            if (errno == EAGAIN) {
                pollfd pfd{fd_, POLLOUT, 0};
                ::poll(&pfd, 1, 100);
                continue;
            }
            return Status::failure(std::string("write: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    return Status();
}

Status SerialPort::write_all(std::string_view text)
{
    return write_all(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Result<std::size_t> SerialPort::read_some(std::span<std::uint8_t> out,
                                          std::size_t want)
{
    if (fd_ < 0)
        return Result<std::size_t>::failure("port not open");
    want = std::min(want, out.size());

    std::size_t got = 0;
    int remaining_ms = static_cast<int>(read_timeout_s_ * 1000);
    while (got < want) {
        pollfd pfd{fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, remaining_ms);
        if (rc < 0) {
            if (errno == EINTR)
                continue;
            return Result<std::size_t>::failure(std::string("poll: ") +
                                                std::strerror(errno));
        }
        if (rc == 0)
            break; // timed out with whatever we have
        const ssize_t n = ::read(fd_, out.data() + got, want - got);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN)
                continue;
            return Result<std::size_t>::failure(std::string("read: ") +
                                                std::strerror(errno));
        }
        if (n == 0)
            break; // peer closed
        got += static_cast<std::size_t>(n);
    }
    return got;
}

std::vector<std::string> discover_serial_ports()
{
    std::vector<std::string> found;

    std::error_code ec;
    for (const auto& entry : fs::directory_iterator("/dev/serial/by-id", ec))
        found.push_back(entry.path().string());
    std::sort(found.begin(), found.end());

    std::vector<std::string> raw;
    for (const auto& entry : fs::directory_iterator("/dev", ec)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("ttyUSB", 0) == 0 || name.rfind("ttyACM", 0) == 0)
            raw.push_back(entry.path().string());
    }
    std::sort(raw.begin(), raw.end());
    found.insert(found.end(), raw.begin(), raw.end());
    return found;
}

} // namespace keymeter
