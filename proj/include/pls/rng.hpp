#pragma once

#include <cstdint>
#include <random>

namespace pls {

/// Seeded random stream. Equal (seed, stream_id) pairs replay the same
/// sequence; distinct stream ids give independent engines.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [0, 1).
    double uniform();
    /// Standard normal.
    double normal();
    std::uint64_t next_u64() { return engine_(); }

    /// Independent child stream derived from this stream's identity.
    RngStream substream(std::uint64_t index) const;

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace pls
