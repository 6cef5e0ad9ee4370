#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace pls::protocol {

// Score wire protocol. Every frame is a 24-byte little-endian header
//
//   0  magic "SCR1"        4 bytes
//   4  msg_type            u8   0x01 request, 0x81 response, 0xFF error
//   5  flags               u8   bit0 = complex payload
//   6  reserved            u16  zero
//   8  height              u32
//   12 width               u32
//   16 sigma               f64
//
// followed by height*width f32 values (interleaved re, im when complex),
// row-major. An error frame has height 1, width = message length in bytes,
// and carries the UTF-8 message as its payload.

inline constexpr std::uint8_t kRequest = 0x01;
inline constexpr std::uint8_t kResponse = 0x81;
inline constexpr std::uint8_t kError = 0xFF;
inline constexpr std::uint8_t kFlagComplex = 0x01;
inline constexpr std::size_t kHeaderSize = 24;
/// Frames announcing a larger payload are rejected before allocation.
inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 30;

struct Frame {
    std::uint8_t msg_type = kRequest;
    std::uint8_t flags = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    double sigma = 0.0;
    std::vector<float> values;  // request/response payload
    std::string message;        // error payload

    bool is_complex() const noexcept { return (flags & kFlagComplex) != 0; }
    std::size_t payload_bytes() const noexcept;
};

Frame make_request(std::uint32_t height, std::uint32_t width, double sigma, bool complex,
                   std::vector<float> values);
Frame make_response(const Frame& request, std::vector<float> values);
Frame make_error(const std::string& message);

std::vector<std::uint8_t> encode(const Frame& frame);

/// Parses a header; throws TransportError on a bad magic or message type.
Frame decode_header(std::span<const std::uint8_t> header);
/// Fills the payload of a frame whose header was decoded.
void decode_payload(Frame& frame, std::span<const std::uint8_t> payload);
/// Whole-buffer decode, mostly for tests.
Frame decode(std::span<const std::uint8_t> bytes);

/// Bidirectional byte stream.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
    virtual void read_exact(std::span<std::uint8_t> bytes) = 0;
};

/// Spawns `/bin/sh -c command` and talks over its stdin/stdout.
std::unique_ptr<Transport> spawn_subprocess(const std::string& command);
/// Connects to host:port over TCP.
std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port);
/// Wraps a pair of already-open file descriptors (not owned).
std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd);

void write_frame(Transport& t, const Frame& frame);
Frame read_frame(Transport& t);

/// Client end of a score connection. One request is in flight at a time;
/// concurrent callers are serialized.
class ScoreClient {
public:
    explicit ScoreClient(std::unique_ptr<Transport> transport, std::string endpoint = {});

    /// Opens `host:port` as TCP, anything else as a subprocess command.
    static std::shared_ptr<ScoreClient> open(const std::string& endpoint);

    std::vector<float> request(std::uint32_t height, std::uint32_t width, double sigma, bool complex,
                               std::vector<float> values);
    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    std::unique_ptr<Transport> transport_;
    std::string endpoint_;
    std::mutex mutex_;
};

}  // namespace pls::protocol
