#include "pls/noise_sim.hpp"

#include <cmath>
#include <string>

namespace pls {

namespace {

constexpr double kPtrsThreshold = 30.0;

long poisson_inversion(double lambda, RngStream& rng) {
    const double p0 = std::exp(-lambda);
    for (;;) {
        const double u = rng.uniform();
        double p = p0;
        double cdf = p0;
        long k = 0;
        while (u > cdf) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
            if (k > 1000) break;  // u landed in the rounding gap of the tail; redraw
        }
        if (k <= 1000) return k;
    }
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
long poisson_ptrs(double lambda, RngStream& rng) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -lambda + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<long>(k);
        }
    }
}

}  // namespace

long poisson_draw(double lambda, RngStream& rng) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson rate must be finite and >= 0");
    if (lambda == 0.0) return 0;
    return lambda < kPtrsThreshold ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

RealImage poisson_sample(const RealImage& lambda_grid, RngStream& rng) {
    for (double l : lambda_grid) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("poisson_sample: negative or non-finite rate");
    }
    RealImage out(lambda_grid.height(), lambda_grid.width());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(poisson_draw(lambda_grid[i], rng));
    return out;
}

RealImage quantize_normalized(const RealImage& counts, const NoiseParams& noise) {
    const int bits = noise.quant_bits();
    if (bits == 0) return normalize(counts, noise);
    const double top = std::ldexp(1.0, bits) - 1.0;
    const double step = noise.fwc() / top;
    RealImage out(counts.height(), counts.width());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(counts[i] >= 0.0)) throw DomainError("quantize: negative electron count");
        const double k = std::min(top, std::round(counts[i] / step));
        out[i] = k / top;
    }
    return out;
}

RealImage simulate_measurement(const RealImage& clean, const NoiseParams& noise, RngStream& rng) {
    RealImage lambda(clean.height(), clean.width());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (!(clean[i] >= 0.0 && clean[i] <= 1.0)) {
            throw DomainError("simulate_measurement: clean value " + std::to_string(clean[i]) +
                              " outside [0, 1]");
        }
        lambda[i] = clean[i] * noise.fwc();
    }
    return quantize_normalized(poisson_sample(lambda, rng), noise);
}

MeasurementStack simulate_intensity_measurements(const ComplexImage& object, const ForwardModel& model,
                                                 const NoiseParams& noise, RngStream& rng) {
    auto expected = intensity(model, object);
    for (auto& img : expected) {
        for (double& v : img) {
            // FFT rounding can lift an exactly saturated pixel by a few ulps
            if (v > 1.0 + 1e-9) {
                throw SaturationError("expected intensity " + std::to_string(v) +
                                      " exceeds the full-well level 1; lower rho");
            }
            v = std::min(v, 1.0);
        }
    }
    std::vector<RealImage> images;
    images.reserve(expected.size());
    for (const auto& img : expected) images.push_back(simulate_measurement(img, noise, rng));
    return MeasurementStack(std::move(images), noise, model.rho());
}

}  // namespace pls
