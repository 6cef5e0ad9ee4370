#pragma once

#include <cstddef>

#include "pls/forward.hpp"
#include "pls/image.hpp"
#include "pls/measurement.hpp"

namespace pls {

/// Lower bound applied to the annealed real iterate before the Poisson
/// likelihood score divides by it.
inline constexpr double kIntensityFloor = 1e-4;

/// Annealed Poisson likelihood score, element-wise:
///
///   d/dx log p(y|x) = (y^2/x^2 - 1) / (2 (s0^2 - st^2)) - 1/(2x)
///
/// which is the derivative of log N(y; x, (s0^2 - st^2) x). Entries of
/// x_tilde below `floor` are clamped first; the number clamped is written
/// to `clamped` when given.
RealImage poisson_score(const RealImage& y, const RealImage& x_tilde, double sigma0, double sigma_t,
                        double floor = kIntensityFloor, std::size_t* clamped = nullptr);

/// I1(z)/I0(z) for z >= 0 without forming I0 or I1 themselves.
double bessel_ratio(double z);

/// Annealed likelihood score for y = |o|^2 + noise with H = I:
///
///   o/(2 s^2) * [ I1(z)/I0(z) * sqrt(y)/|o| - 1 ],  z = |o| sqrt(y) / s^2,
///
/// s^2 = sigma0^2 - sigma_t^2, defined as 0 at o = 0. This is one half of
/// the (Re, Im) gradient of log p; the factor is folded into the step size.
ComplexImage complex_score_identity(const RealImage& y, const ComplexImage& o_tilde, double sigma0,
                                    double sigma_t);

/// Same score through a general linear model: the element-wise score is
/// formed for each measurement field u_m = H_m o against y_m, then mapped
/// back with H^H.
ComplexImage complex_score_general(const MeasurementStack& stack, const ComplexImage& o_tilde,
                                   const ForwardModel& model, double sigma0, double sigma_t);

}  // namespace pls
