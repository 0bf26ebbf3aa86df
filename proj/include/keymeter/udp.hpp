#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "keymeter/result.hpp"

namespace keymeter {

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

// Accepts "host:port" or a bare "host" (falls back to default_port).
Result<Endpoint> parse_endpoint(const std::string& text,
                                std::uint16_t default_port);

// Thin RAII wrapper over an IPv4 UDP socket. Datagrams only; no framing.
class UdpSocket {
public:
    UdpSocket() = default;
    ~UdpSocket();
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;

    // Bind to a local port for receiving; port 0 picks an ephemeral port.
    static Result<UdpSocket> bind(std::uint16_t port,
                                  const std::string& host = "0.0.0.0");
    // Unbound sender socket.
    static Result<UdpSocket> client();

    bool is_open() const { return fd_ >= 0; }
    std::uint16_t local_port() const { return local_port_; }

    Status send_to(const Endpoint& dest, const std::string& payload);

    // Waits up to timeout_s for one datagram; empty optional on timeout.
    // Oversize datagrams are truncated to max_bytes by the kernel, which the
    // decoder then rejects; that is the desired outcome.
    Result<std::optional<std::string>> recv(double timeout_s,
                                            std::size_t max_bytes = 2048);

    void close();

private:
    int fd_ = -1;
    std::uint16_t local_port_ = 0;
};

} // namespace keymeter
