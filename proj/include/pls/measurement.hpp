#pragma once

#include <vector>

#include "pls/image.hpp"
#include "pls/noise.hpp"

namespace pls {

/// M noisy intensity images together with the noise parameters and the
/// irradiance that produced them.
struct MeasurementStack {
    std::vector<RealImage> images;
    NoiseParams noise;
    double rho = 1.0;

    MeasurementStack(std::vector<RealImage> imgs, NoiseParams params, double irradiance = 1.0);

    std::size_t m() const noexcept { return images.size(); }
    std::size_t height() const noexcept { return images.front().height(); }
    std::size_t width() const noexcept { return images.front().width(); }
};

}  // namespace pls
