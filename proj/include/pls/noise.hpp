#pragma once

#include <cmath>

#include "pls/error.hpp"

namespace pls {

/// Camera noise parameters. sigma0 is always derived from the full well
/// capacity so the two can never disagree.
class NoiseParams {
public:
    NoiseParams(double fwc, int quant_bits = 0) : fwc_(fwc), quant_bits_(quant_bits) {
        if (!(fwc > 0.0) || !std::isfinite(fwc)) throw DomainError("full well capacity must be positive");
        if (quant_bits < 0 || quant_bits > 16) throw DomainError("quant_bits must be in [0, 16]");
    }

    static NoiseParams from_sigma0(double sigma0, int quant_bits = 0) {
        if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
        return NoiseParams(1.0 / (sigma0 * sigma0), quant_bits);
    }

    double fwc() const noexcept { return fwc_; }
    double sigma0() const noexcept { return 1.0 / std::sqrt(fwc_); }
    int quant_bits() const noexcept { return quant_bits_; }

private:
    double fwc_;
    int quant_bits_;
};

}  // namespace pls

namespace pls {

template <typename T>
class Grid;
using RealImage = Grid<double>;

/// Electron counts to normalized intensity (counts / fwc).
RealImage normalize(const RealImage& counts, const NoiseParams& noise);

}  // namespace pls
