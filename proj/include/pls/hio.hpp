#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pls/image.hpp"
#include "pls/rng.hpp"

namespace pls {

struct HioConfig {
    double beta = 0.9;
    std::size_t iters = 600;
    std::size_t restarts = 50;
    bool real_nonneg = false;
};

struct HioResult {
    ComplexImage best;  // on the magnitude grid, zero outside the support
    double residual = 0.0;
    std::size_t best_restart = 0;
    std::vector<double> restart_residuals;
};

/// Fienup hybrid input-output from Fourier magnitudes (sqrt of intensity on
/// the oversampled grid). `support` has the magnitude grid's shape with
/// entries in {0, 1}. Each restart starts from sqrt(y) with uniformly random
/// phases and the candidate with the smallest magnitude residual
/// ||sqrt(y) - |F x||| / ||sqrt(y)|| wins.
HioResult hio_solve(const RealImage& magnitudes, const RealImage& support, const HioConfig& cfg, RngStream& rng);

/// Replace the Fourier modulus of x by `magnitudes`, keeping the phase
/// (phase 0 where the transform vanishes). Returns the object-domain result.
ComplexImage fourier_magnitude_projection(const ComplexImage& x, const RealImage& magnitudes);

/// Box support of the unpadded object in the top-left corner of the grid.
RealImage box_support(std::size_t grid_height, std::size_t grid_width, std::size_t height, std::size_t width);

struct Alignment {
    ComplexImage aligned;
    double correlation = 0.0;  // |<aligned, reference>| / (||aligned|| ||reference||)
    std::size_t shift_row = 0;
    std::size_t shift_col = 0;
    bool conjugate_flip = false;
    double global_phase = 0.0;
};

/// Removes the trivial phase-retrieval ambiguities (cyclic translation,
/// conjugate flip, global phase) from `candidate` relative to `reference`.
Alignment align_ambiguities(const ComplexImage& candidate, const ComplexImage& reference);

/// |<a, b>| / (||a|| ||b||); 1 when both are zero.
double normalized_correlation(const ComplexImage& a, const ComplexImage& b);

}  // namespace pls
