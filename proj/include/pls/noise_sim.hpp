#pragma once

#include "pls/forward.hpp"
#include "pls/image.hpp"
#include "pls/measurement.hpp"
#include "pls/noise.hpp"
#include "pls/rng.hpp"

namespace pls {

/// One exact Poisson draw. Inverse transform below lambda = 30, transformed
/// rejection with squeeze (PTRS) from 30 up.
long poisson_draw(double lambda, RngStream& rng);

/// Independent per-pixel Poisson draws of expected electron counts.
RealImage poisson_sample(const RealImage& lambda_grid, RngStream& rng);

/// Round electron counts to the nearest of 2^bits levels spanning [0, fwc]
/// and return the normalized level values k / (2^bits - 1).
RealImage quantize_normalized(const RealImage& counts, const NoiseParams& noise);

/// Poisson photon noise plus optional quantization on a normalized clean
/// image in [0, 1]; returns the normalized measurement.
RealImage simulate_measurement(const RealImage& clean, const NoiseParams& noise, RngStream& rng);

/// y_m = N(|H_m o|^2) for every measurement of the model.
MeasurementStack simulate_intensity_measurements(const ComplexImage& object, const ForwardModel& model,
                                                 const NoiseParams& noise, RngStream& rng);

}  // namespace pls
