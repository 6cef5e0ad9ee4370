#pragma once

#include "pls/image.hpp"

namespace pls {

/// Value reported when the error is exactly zero (and the ceiling for any
/// larger result).
inline constexpr double kPsnrCap = 200.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const RealImage& est, const RealImage& truth, double peak = 1.0);

/// Phase PSNR with the global offset removed:
/// 10 log10((2 pi)^2 / min_theta mean(wrap(truth - est - theta)^2)).
double phase_psnr(const RealImage& est_phase, const RealImage& truth_phase);

/// Offset-minimized wrapped phase MSE used by phase_psnr.
double phase_mse(const RealImage& est_phase, const RealImage& truth_phase);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over fully contained windows.
double ssim(const RealImage& est, const RealImage& truth);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle) noexcept;

}  // namespace pls
