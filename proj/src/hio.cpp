#include "pls/hio.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pls/fft.hpp"

namespace pls {

namespace {

double magnitude_residual(const ComplexImage& x, const RealImage& magnitudes, double norm_y) {
    if (norm_y == 0.0) return 0.0;
    const ComplexImage spec = fft2_unitary(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double d = magnitudes[i] - std::abs(spec[i]);
        acc += d * d;
    }
    return std::sqrt(acc) / norm_y;
}

// Object-domain constraint set: support, and optionally a real non-negative
// object.
ComplexImage project_object(const ComplexImage& x, const RealImage& support, bool real_nonneg) {
    ComplexImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (support[i] == 0.0) continue;
        out[i] = real_nonneg ? Complex(std::max(0.0, x[i].real()), 0.0) : x[i];
    }
    return out;
}

}  // namespace

ComplexImage fourier_magnitude_projection(const ComplexImage& x, const RealImage& magnitudes) {
    require_same_shape(x, magnitudes, "fourier_magnitude_projection");
    ComplexImage spec = fft2_unitary(x);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double a = std::abs(spec[i]);
        spec[i] = a > 0.0 ? spec[i] * (magnitudes[i] / a) : Complex(magnitudes[i], 0.0);
    }
    return ifft2_unitary(spec);
}

RealImage box_support(std::size_t grid_height, std::size_t grid_width, std::size_t height, std::size_t width) {
    if (height > grid_height || width > grid_width) throw DimensionError("support box larger than grid");
    RealImage s(grid_height, grid_width, 0.0);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) s(r, c) = 1.0;
    return s;
}

HioResult hio_solve(const RealImage& magnitudes, const RealImage& support, const HioConfig& cfg, RngStream& rng) {
    require_same_shape(magnitudes, support, "hio_solve");
    bool any_support = false;
    for (double s : support) {
        if (s != 0.0 && s != 1.0) throw DomainError("hio_solve: support entries must be 0 or 1");
        any_support = any_support || s == 1.0;
    }
    if (!any_support) throw DomainError("hio_solve: empty support");
    double norm_y = 0.0;
    for (double m : magnitudes) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("hio_solve: magnitudes must be finite and >= 0");
        norm_y += m * m;
    }
    norm_y = std::sqrt(norm_y);
    if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw ConfigError("hio beta must lie in (0, 1]");
    if (cfg.iters < 1 || cfg.restarts < 1) throw ConfigError("hio needs iters >= 1 and restarts >= 1");

    HioResult result;
    result.best = ComplexImage(magnitudes.height(), magnitudes.width());
    result.residual = std::numeric_limits<double>::infinity();
    if (norm_y == 0.0) {
        result.residual = 0.0;
        result.restart_residuals.assign(cfg.restarts, 0.0);
        return result;
    }

    for (std::size_t l = 0; l < cfg.restarts; ++l) {
        RngStream stream = rng.substream(l);
        ComplexImage spec(magnitudes.height(), magnitudes.width());
        for (std::size_t i = 0; i < spec.size(); ++i) {
            spec[i] = std::polar(magnitudes[i], 2.0 * std::numbers::pi * stream.uniform());
        }
        ComplexImage x = ifft2_unitary(spec);
        // a real object keeps a real iterate; imaginary parts outside the
        // support would otherwise never be fed back
        if (cfg.real_nonneg) {
            for (auto& v : x) v = Complex(v.real(), 0.0);
        }
        for (std::size_t it = 0; it < cfg.iters; ++it) {
            const ComplexImage candidate = fourier_magnitude_projection(x, magnitudes);
            for (std::size_t i = 0; i < x.size(); ++i) {
                Complex c = candidate[i];
                if (cfg.real_nonneg) c = Complex(c.real(), 0.0);
                const bool keep = support[i] == 1.0 && (!cfg.real_nonneg || c.real() >= 0.0);
                x[i] = keep ? c : x[i] - cfg.beta * c;
            }
        }
        ComplexImage estimate = project_object(x, support, cfg.real_nonneg);
        const double r = magnitude_residual(estimate, magnitudes, norm_y);
        result.restart_residuals.push_back(r);
        if (r < result.residual) {
            result.residual = r;
            result.best = std::move(estimate);
            result.best_restart = l;
        }
    }
    return result;
}

double normalized_correlation(const ComplexImage& a, const ComplexImage& b) {
    require_same_shape(a, b, "normalized_correlation");
    Complex inner(0.0, 0.0);
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inner += a[i] * std::conj(b[i]);
        na += std::norm(a[i]);
        nb += std::norm(b[i]);
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(inner) / std::sqrt(na * nb);
}

Alignment align_ambiguities(const ComplexImage& candidate, const ComplexImage& reference) {
    require_same_shape(candidate, reference, "align_ambiguities");
    const std::size_t h = candidate.height();
    const std::size_t w = candidate.width();

    ComplexImage flipped(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) flipped(r, c) = std::conj(candidate((h - r) % h, (w - c) % w));

    const ComplexImage ref_spec = fft2_unitary(reference);
    Alignment best;
    double best_mag = -1.0;
    Complex best_value;
    for (int flip = 0; flip < 2; ++flip) {
        const ComplexImage& src = flip ? flipped : candidate;
        ComplexImage prod = fft2_unitary(src);
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= std::conj(ref_spec[i]);
        // xcorr(s) = sum_r src(r + s) conj(ref(r)), up to the unitary scale
        const ComplexImage xcorr = ifft2_unitary(prod);
        for (std::size_t i = 0; i < xcorr.size(); ++i) {
            // strict improvement keeps the identity transform on ties
            if (std::abs(xcorr[i]) > best_mag * (1.0 + 1e-12)) {
                best_mag = std::abs(xcorr[i]);
                best_value = xcorr[i];
                best.shift_row = i / w;
                best.shift_col = i % w;
                best.conjugate_flip = flip == 1;
            }
        }
    }
    best.global_phase = best_mag > 0.0 ? -std::arg(best_value) : 0.0;
    const ComplexImage& src = best.conjugate_flip ? flipped : candidate;
    const Complex rot = std::polar(1.0, best.global_phase);
    best.aligned = ComplexImage(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            best.aligned(r, c) = src((r + best.shift_row) % h, (c + best.shift_col) % w) * rot;
    best.correlation = normalized_correlation(best.aligned, reference);
    return best;
}

}  // namespace pls
