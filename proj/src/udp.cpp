#include "keymeter/udp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <vector>

namespace keymeter {

Result<Endpoint> parse_endpoint(const std::string& text,
                                std::uint16_t default_port)
{
    using R = Result<Endpoint>;
    if (text.empty())
        return R::failure("endpoint is empty");

    Endpoint ep;
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        ep.host = text;
        ep.port = default_port;
        return ep;
    }
    ep.host = text.substr(0, colon);
    if (ep.host.empty())
        return R::failure("endpoint '" + text + "': missing host");
    const std::string port_text = text.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] =
        std::from_chars(port_text.data(), port_text.data() + port_text.size(),
                        value);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() ||
        value == 0 || value > 65535)
        return R::failure("endpoint '" + text + "': bad port");
    ep.port = static_cast<std::uint16_t>(value);
    return ep;
}

namespace {

Result<sockaddr_in> resolve(const Endpoint& ep)
{
    using R = Result<sockaddr_in>;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1)
        return addr;

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* info = nullptr;
    const int rc = getaddrinfo(ep.host.c_str(), nullptr, &hints, &info);
    if (rc != 0 || info == nullptr)
        return R::failure("resolve " + ep.host + ": " + gai_strerror(rc));
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(info->ai_addr)->sin_addr;
    freeaddrinfo(info);
    return addr;
}

} // namespace

UdpSocket::~UdpSocket()
{
    close();
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept
    : fd_(other.fd_), local_port_(other.local_port_)
{
    other.fd_ = -1;
    other.local_port_ = 0;
}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.fd_;
        local_port_ = other.local_port_;
        other.fd_ = -1;
        other.local_port_ = 0;
    }
    return *this;
}

void UdpSocket::close()
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
        local_port_ = 0;
    }
}

Result<UdpSocket> UdpSocket::bind(std::uint16_t port, const std::string& host)
{
    using R = Result<UdpSocket>;
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0)
        return R::failure(std::string("socket: ") + std::strerror(errno));

    const int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        return R::failure("bind: bad address " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        return R::failure("bind " + host + ":" + std::to_string(port) + ": " +
                          err);
    }

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);

    UdpSocket sock;
    sock.fd_ = fd;
    sock.local_port_ = ntohs(bound.sin_port);
    return sock;
}

Result<UdpSocket> UdpSocket::client()
{
    using R = Result<UdpSocket>;
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0)
        return R::failure(std::string("socket: ") + std::strerror(errno));
    UdpSocket sock;
    sock.fd_ = fd;
    return sock;
}

Status UdpSocket::send_to(const Endpoint& dest, const std::string& payload)
{
    if (fd_ < 0)
        return Status::failure("socket not open");
    auto addr = resolve(dest);
    if (!addr.ok())
        return Status::failure(addr.error());
    const ssize_t n = ::sendto(fd_, payload.data(), payload.size(), 0,
                               reinterpret_cast<sockaddr*>(&addr.value()),
                               sizeof(sockaddr_in));
    if (n < 0)
        return Status::failure(std::string("sendto: ") + std::strerror(errno));
    return Status();
}

Result<std::optional<std::string>> UdpSocket::recv(double timeout_s,
                                                   std::size_t max_bytes)
{
    using R = Result<std::optional<std::string>>;
    if (fd_ < 0)
        return R::failure("socket not open");

    pollfd pfd{fd_, POLLIN, 0};
    const int timeout_ms =
        timeout_s < 0 ? -1 : static_cast<int>(timeout_s * 1000);
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0)
        return R::failure(std::string("poll: ") + std::strerror(errno));
    if (rc == 0)
        return std::optional<std::string>{};

    std::vector<char> buf(max_bytes);
    const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, nullptr,
                                 nullptr);
    if (n < 0)
        return R::failure(std::string("recvfrom: ") + std::strerror(errno));
    return std::optional<std::string>(std::string(buf.data(),
                                                  static_cast<std::size_t>(n)));
}

} // namespace keymeter
