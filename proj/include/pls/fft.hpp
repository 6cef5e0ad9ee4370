#pragma once

#include "pls/image.hpp"

namespace pls {

/// Unitary 2D DFT (1/sqrt(HW) on both directions), so Parseval holds exactly
/// and ifft2_unitary(fft2_unitary(x)) == x up to rounding.
ComplexImage fft2_unitary(const ComplexImage& img);
ComplexImage ifft2_unitary(const ComplexImage& img);

/// Signed frequency index for FFT bin i of an n-point transform
/// (0, 1, ..., ceil(n/2)-1, -floor(n/2), ..., -1).
long signed_frequency(std::size_t i, std::size_t n) noexcept;

}  // namespace pls
