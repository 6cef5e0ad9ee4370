#include "pls/protocol.hpp"

#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>

#include "pls/error.hpp"

namespace pls::protocol {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'C', 'R', '1'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    return static_cast<std::uint64_t>(get_u32(p)) | static_cast<std::uint64_t>(get_u32(p + 4)) << 32;
}

std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class FdTransport : public Transport {
public:
    FdTransport(int read_fd, int write_fd, bool owned) : read_fd_(read_fd), write_fd_(write_fd), owned_(owned) {}

    ~FdTransport() override { close_fds(); }

    void write_all(std::span<const std::uint8_t> bytes) override {
        std::size_t done = 0;
        while (done < bytes.size()) {
            const ssize_t n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError(errno_message("score transport write"));
            }
            done += static_cast<std::size_t>(n);
        }
    }

    void read_exact(std::span<std::uint8_t> bytes) override {
        std::size_t done = 0;
        while (done < bytes.size()) {
            const ssize_t n = ::read(read_fd_, bytes.data() + done, bytes.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError(errno_message("score transport read"));
            }
            if (n == 0) throw TransportError("score transport closed by peer");
            done += static_cast<std::size_t>(n);
        }
    }

protected:
    void close_fds() {
        if (!owned_) return;
        if (read_fd_ >= 0) ::close(read_fd_);
        if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
        read_fd_ = write_fd_ = -1;
    }

    int read_fd_;
    int write_fd_;
    bool owned_;
};

class SubprocessTransport : public FdTransport {
public:
    SubprocessTransport(int read_fd, int write_fd, pid_t pid) : FdTransport(read_fd, write_fd, true), pid_(pid) {}

    ~SubprocessTransport() override {
        close_fds();  // EOF on the child's stdin asks it to exit
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }

private:
    pid_t pid_;
};

}  // namespace

std::size_t Frame::payload_bytes() const noexcept {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (msg_type == kError) return n;
    return n * (is_complex() ? 2 : 1) * sizeof(float);
}

Frame make_request(std::uint32_t height, std::uint32_t width, double sigma, bool complex,
                   std::vector<float> values) {
    Frame f;
    f.msg_type = kRequest;
    f.flags = complex ? kFlagComplex : 0;
    f.height = height;
    f.width = width;
    f.sigma = sigma;
    f.values = std::move(values);
    return f;
}

Frame make_response(const Frame& request, std::vector<float> values) {
    Frame f = make_request(request.height, request.width, request.sigma, request.is_complex(), std::move(values));
    f.msg_type = kResponse;
    return f;
}

Frame make_error(const std::string& message) {
    Frame f;
    f.msg_type = kError;
    f.height = 1;
    f.width = static_cast<std::uint32_t>(message.size());
    f.message = message;
    return f;
}

std::vector<std::uint8_t> encode(const Frame& frame) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kHeaderSize + frame.payload_bytes());
    out.push_back(frame.msg_type);
    out.push_back(frame.flags);
    put_u16(out, 0);
    put_u32(out, frame.height);
    put_u32(out, frame.width);
    put_u64(out, std::bit_cast<std::uint64_t>(frame.sigma));
    if (frame.msg_type == kError) {
        if (frame.message.size() != frame.payload_bytes()) throw TransportError("error frame length mismatch");
        out.insert(out.end(), frame.message.begin(), frame.message.end());
    } else {
        if (frame.values.size() * sizeof(float) != frame.payload_bytes()) {
            throw TransportError("frame payload does not match its header dimensions");
        }
        for (float v : frame.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

Frame decode_header(std::span<const std::uint8_t> header) {
    if (header.size() < kHeaderSize) throw TransportError("truncated frame header");
    if (std::memcmp(header.data(), kMagic, 4) != 0) throw TransportError("bad frame magic");
    Frame f;
    f.msg_type = header[4];
    if (f.msg_type != kRequest && f.msg_type != kResponse && f.msg_type != kError) {
        throw TransportError("unknown frame type " + std::to_string(f.msg_type));
    }
    if (header[6] != 0 || header[7] != 0) throw TransportError("reserved header bytes must be zero");
    f.flags = header[5];
    f.height = get_u32(header.data() + 8);
    f.width = get_u32(header.data() + 12);
    f.sigma = std::bit_cast<double>(get_u64(header.data() + 16));
    if (f.payload_bytes() > kMaxPayloadBytes) throw TransportError("frame payload exceeds the size limit");
    return f;
}

void decode_payload(Frame& frame, std::span<const std::uint8_t> payload) {
    if (payload.size() != frame.payload_bytes()) throw TransportError("frame payload length mismatch");
    if (frame.msg_type == kError) {
        frame.message.assign(payload.begin(), payload.end());
        return;
    }
    frame.values.resize(payload.size() / sizeof(float));
    for (std::size_t i = 0; i < frame.values.size(); ++i) {
        frame.values[i] = std::bit_cast<float>(get_u32(payload.data() + 4 * i));
    }
}

Frame decode(std::span<const std::uint8_t> bytes) {
    Frame f = decode_header(bytes);
    decode_payload(f, bytes.subspan(kHeaderSize));
    return f;
}

void write_frame(Transport& t, const Frame& frame) {
    const auto bytes = encode(frame);
    t.write_all(bytes);
}

Frame read_frame(Transport& t) {
    std::uint8_t header[kHeaderSize];
    t.read_exact(header);
    Frame f = decode_header(header);
    std::vector<std::uint8_t> payload(f.payload_bytes());
    t.read_exact(payload);
    decode_payload(f, payload);
    return f;
}

std::unique_ptr<Transport> spawn_subprocess(const std::string& command) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw TransportError(errno_message("pipe"));
    if (::pipe(from_child) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw TransportError(errno_message("pipe"));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError(errno_message("fork"));
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<SubprocessTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port) {
    ::signal(SIGPIPE, SIG_IGN);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw TransportError("cannot connect to " + host + ":" + service);
    return std::make_unique<FdTransport>(fd, fd, true);
}

std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd) {
    return std::make_unique<FdTransport>(read_fd, write_fd, false);
}

ScoreClient::ScoreClient(std::unique_ptr<Transport> transport, std::string endpoint)
    : transport_(std::move(transport)), endpoint_(std::move(endpoint)) {}

std::shared_ptr<ScoreClient> ScoreClient::open(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon != std::string::npos && endpoint.find(' ') == std::string::npos) {
        const std::string port = endpoint.substr(colon + 1);
        if (!port.empty() && port.find_first_not_of("0123456789") == std::string::npos) {
            const unsigned long p = std::stoul(port);
            if (p == 0 || p > 65535) throw TransportError("invalid port in '" + endpoint + "'");
            return std::make_shared<ScoreClient>(
                connect_tcp(endpoint.substr(0, colon), static_cast<std::uint16_t>(p)), endpoint);
        }
    }
    return std::make_shared<ScoreClient>(spawn_subprocess(endpoint), endpoint);
}

std::vector<float> ScoreClient::request(std::uint32_t height, std::uint32_t width, double sigma, bool complex,
                                        std::vector<float> values) {
    std::lock_guard<std::mutex> lock(mutex_);
    write_frame(*transport_, make_request(height, width, sigma, complex, std::move(values)));
    Frame reply = read_frame(*transport_);
    if (reply.msg_type == kError) throw TransportError("score server error: " + reply.message);
    if (reply.msg_type != kResponse) throw TransportError("score server replied with a non-response frame");
    if (reply.height != height || reply.width != width || reply.is_complex() != complex) {
        throw TransportError("score server response does not echo the request dimensions");
    }
    return std::move(reply.values);
}

}  // namespace pls::protocol
