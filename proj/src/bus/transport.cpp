// SPDX-License-Identifier: Apache-2.0
#include "rr/bus/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace rr::bus {

namespace {

// ---------------------------------------------------------------- in-proc

struct LineQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> lines;
    bool closed = false;

    bool push(std::string line) {
        {
            std::lock_guard<std::mutex> lock(mu);
            if (closed)
                return false;
            lines.push_back(std::move(line));
        }
        cv.notify_one();
        return true;
    }

    RecvResult pop(const Deadline& deadline) {
        std::unique_lock<std::mutex> lock(mu);
        auto ready = [&] { return !lines.empty() || closed; };
        if (deadline) {
            if (!cv.wait_until(lock, *deadline, ready))
                return {RecvStatus::timed_out, {}};
        } else {
            cv.wait(lock, ready);
        }
        if (!lines.empty()) {
            RecvResult r{RecvStatus::got_line, std::move(lines.front())};
            lines.pop_front();
            return r;
        }
        return {RecvStatus::closed, {}};
    }

    void close() {
        {
            std::lock_guard<std::mutex> lock(mu);
            closed = true;
        }
        cv.notify_all();
    }
};

class InprocConn final : public LineConn {
public:
    InprocConn(std::shared_ptr<LineQueue> in, std::shared_ptr<LineQueue> out, std::string peer)
        : in_(std::move(in)), out_(std::move(out)), peer_(std::move(peer)) {}

    ~InprocConn() override { close(); }

    bool send_line(std::string_view line) override { return out_->push(std::string(line)); }

    RecvResult recv_line(const Deadline& deadline) override { return in_->pop(deadline); }

    void close() override {
        in_->close();
        out_->close();
    }

    std::string peer() const override { return peer_; }

private:
    std::shared_ptr<LineQueue> in_;
    std::shared_ptr<LineQueue> out_;
    std::string peer_;
};

// ------------------------------------------------------------------- tcp

class TcpConn final : public LineConn {
public:
    explicit TcpConn(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    ~TcpConn() override {
        close();
        ::close(fd_);
    }

    bool send_line(std::string_view line) override {
        std::lock_guard<std::mutex> lock(write_mu_);
        std::size_t sent = 0;
        while (sent < line.size()) {
            ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    RecvResult recv_line(const Deadline& deadline) override {
        while (true) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                RecvResult r{RecvStatus::got_line, buffer_.substr(0, nl + 1)};
                buffer_.erase(0, nl + 1);
                return r;
            }
            if (eof_)
                return {RecvStatus::closed, {}};
            if (deadline) {
                auto now = Clock::now();
                if (now >= *deadline)
                    return {RecvStatus::timed_out, {}};
                auto remaining =
                    std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - now);
                struct pollfd pfd{fd_, POLLIN, 0};
                int pr = ::poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
                if (pr == 0)
                    return {RecvStatus::timed_out, {}};
                if (pr < 0) {
                    if (errno == EINTR)
                        continue;
                    return {RecvStatus::closed, {}};
                }
            }
            char chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
            if (n > 0) {
                buffer_.append(chunk, static_cast<std::size_t>(n));
            } else if (n == 0) {
                eof_ = true;
            } else if (errno != EINTR) {
                eof_ = true;
            }
        }
    }

    void close() override { ::shutdown(fd_, SHUT_RDWR); }

    std::string peer() const override {
        sockaddr_in addr{};
        socklen_t len = sizeof(addr);
        if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
            char host[INET_ADDRSTRLEN] = {0};
            ::inet_ntop(AF_INET, &addr.sin_addr, host, sizeof(host));
            return std::string(host) + ":" + std::to_string(ntohs(addr.sin_port));
        }
        return "tcp:?";
    }

private:
    int fd_;
    std::mutex write_mu_;
    std::string buffer_;
    bool eof_ = false;
};

class TcpListenerImpl final : public TcpListener {
public:
    TcpListenerImpl(int fd, std::uint16_t port) : fd_(fd), port_(port) {}

    ~TcpListenerImpl() override {
        close();
        ::close(fd_);
    }

    std::uint16_t port() const override { return port_; }

    std::unique_ptr<LineConn> accept() override {
        while (true) {
            int client = ::accept(fd_, nullptr, nullptr);
            if (client >= 0)
                return std::make_unique<TcpConn>(client);
            if (errno == EINTR)
                continue;
            return nullptr; // listener closed
        }
    }

    void close() override { ::shutdown(fd_, SHUT_RDWR); }

private:
    int fd_;
    std::uint16_t port_;
};

in_addr resolve_ipv4(const std::string& host) {
    in_addr out{};
    const std::string name = host.empty() || host == "localhost" ? "127.0.0.1" : host;
    if (::inet_pton(AF_INET, name.c_str(), &out) != 1)
        throw TransportError("cannot parse IPv4 address: " + host);
    return out;
}

} // namespace

std::pair<std::unique_ptr<LineConn>, std::unique_ptr<LineConn>> make_inproc_pair() {
    auto a2b = std::make_shared<LineQueue>();
    auto b2a = std::make_shared<LineQueue>();
    auto a = std::make_unique<InprocConn>(b2a, a2b, "inproc:b");
    auto b = std::make_unique<InprocConn>(a2b, b2a, "inproc:a");
    return {std::move(a), std::move(b)};
}

std::unique_ptr<LineConn> tcp_connect(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        throw TransportError("socket: " + std::string(std::strerror(errno)));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr = resolve_ipv4(host);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int err = errno;
        ::close(fd);
        throw TransportError("connect to " + host + ":" + std::to_string(port) + ": " +
                             std::strerror(err));
    }
    return std::make_unique<TcpConn>(fd);
}

std::unique_ptr<TcpListener> TcpListener::bind(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        throw TransportError("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr = resolve_ipv4(host);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int err = errno;
        ::close(fd);
        if (err == EADDRINUSE)
            throw TransportError("address in use: " + host + ":" + std::to_string(port));
        throw TransportError("bind " + host + ":" + std::to_string(port) + ": " +
                             std::strerror(err));
    }
    if (::listen(fd, 64) != 0) {
        int err = errno;
        ::close(fd);
        throw TransportError("listen: " + std::string(std::strerror(err)));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    return std::make_unique<TcpListenerImpl>(fd, ntohs(bound.sin_port));
}

std::pair<std::string, std::uint16_t> parse_hostport(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= address.size())
        throw TransportError("expected host:port, got '" + address + "'");
    const std::string host = address.substr(0, colon);
    const std::string port_text = address.substr(colon + 1);
    unsigned long port = 0;
    for (char c : port_text) {
        if (c < '0' || c > '9')
            throw TransportError("bad port in '" + address + "'");
        port = port * 10 + static_cast<unsigned long>(c - '0');
        if (port > 65535)
            throw TransportError("port out of range in '" + address + "'");
    }
    return {host, static_cast<std::uint16_t>(port)};
}

} // namespace rr::bus
