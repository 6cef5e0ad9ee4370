#include "pls/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace pls {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double to_db(double ratio) {
    if (!(ratio > 0.0)) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(ratio));
}

double wrapped_mse(const std::vector<double>& d, double theta) {
    double acc = 0.0;
    for (double v : d) {
        const double e = wrap_phase(v - theta);
        acc += e * e;
    }
    return acc / static_cast<double>(d.size());
}

}  // namespace

double wrap_phase(double angle) noexcept {
    double a = std::remainder(angle, kTwoPi);
    if (a <= -std::numbers::pi) a += kTwoPi;
    return a;
}

double psnr(const RealImage& est, const RealImage& truth, double peak) {
    require_same_shape(est, truth, "psnr");
    if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double d = est[i] - truth[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(est.size());
    return mse == 0.0 ? kPsnrCap : to_db(peak * peak / mse);
}

double phase_mse(const RealImage& est_phase, const RealImage& truth_phase) {
    require_same_shape(est_phase, truth_phase, "phase_psnr");
    std::vector<double> d(est_phase.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = wrap_phase(truth_phase[i] - est_phase[i]);

    // coarse scan
    constexpr int kGrid = 720;
    const double step = kTwoPi / kGrid;
    double best_theta = -std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
        const double theta = -std::numbers::pi + k * step;
        const double f = wrapped_mse(d, theta);
        if (f < best) {
            best = f;
            best_theta = theta;
        }
    }

    // golden-section refinement inside the neighbouring grid cells
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = best_theta - step;
    double hi = best_theta + step;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = wrapped_mse(d, x1);
    double f2 = wrapped_mse(d, x2);
    while (hi - lo > 1e-6) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = wrapped_mse(d, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = wrapped_mse(d, x2);
        }
    }
    double theta = 0.5 * (lo + hi);

    // With the wrap branches fixed the objective is quadratic in theta, so
    // its exact minimizer is the mean unwrapped residual. Iterate until the
    // branch assignment stops moving.
    for (int pass = 0; pass < 4; ++pass) {
        double shift = 0.0;
        for (double v : d) shift += wrap_phase(v - theta);
        const double next = theta + shift / static_cast<double>(d.size());
        if (next == theta) break;
        if (wrapped_mse(d, next) > wrapped_mse(d, theta)) break;
        theta = next;
    }
    return std::min(best, wrapped_mse(d, theta));
}

double phase_psnr(const RealImage& est_phase, const RealImage& truth_phase) {
    const double mse = phase_mse(est_phase, truth_phase);
    return mse == 0.0 ? kPsnrCap : to_db(kTwoPi * kTwoPi / mse);
}

double ssim(const RealImage& est, const RealImage& truth) {
    require_same_shape(est, truth, "ssim");
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    const std::size_t h = est.height();
    const std::size_t w = est.width();
    if (h < kWin || w < kWin) throw DimensionError("ssim: image smaller than the 11x11 window");

    std::array<double, kWin * kWin> window{};
    double total = 0.0;
    for (int r = 0; r < kWin; ++r) {
        for (int c = 0; c < kWin; ++c) {
            const double dr = r - kWin / 2;
            const double dc = c - kWin / 2;
            window[r * kWin + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
            total += window[r * kWin + c];
        }
    }
    for (double& v : window) v /= total;

    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + kWin <= h; ++r0) {
        for (std::size_t c0 = 0; c0 + kWin <= w; ++c0) {
            double mx = 0.0, my = 0.0;
            for (int r = 0; r < kWin; ++r)
                for (int c = 0; c < kWin; ++c) {
                    const double g = window[r * kWin + c];
                    mx += g * est(r0 + r, c0 + c);
                    my += g * truth(r0 + r, c0 + c);
                }
            double vx = 0.0, vy = 0.0, cxy = 0.0;
            for (int r = 0; r < kWin; ++r)
                for (int c = 0; c < kWin; ++c) {
                    const double g = window[r * kWin + c];
                    const double dx = est(r0 + r, c0 + c) - mx;
                    const double dy = truth(r0 + r, c0 + c) - my;
                    vx += g * dx * dx;
                    vy += g * dy * dy;
                    cxy += g * dx * dy;
                }
            acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

}  // namespace pls
