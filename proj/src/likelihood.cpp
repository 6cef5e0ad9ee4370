#include "pls/likelihood.hpp"

#include <cmath>
#include <string>

namespace pls {

namespace {

double annealed_variance(double sigma0, double sigma_t) {
    const double s2 = sigma0 * sigma0 - sigma_t * sigma_t;
    if (!(sigma_t < sigma0) || !(s2 > 0.0)) {
        throw ScheduleError("annealing order violated: sigma_t (" + std::to_string(sigma_t) +
                            ") must be below sigma0 (" + std::to_string(sigma0) + ")");
    }
    return s2;
}

// Below this the power series is used; above it the scaled asymptotic
// expansions of I0 and I1, whose smallest term at z = 50 is far below 1e-16.
constexpr double kSeriesLimit = 50.0;

double bessel_ratio_series(double z) {
    // I_nu(z) = sum_k (z/2)^(2k+nu) / (k! (k+nu)!); both sums share the
    // common factor and only their ratio is formed.
    const double q = 0.25 * z * z;
    double t0 = 1.0;      // k-th term of I0
    double t1 = 0.5 * z;  // k-th term of I1
    double s0 = t0, s1 = t1;
    for (int k = 1; k < 500; ++k) {
        const double dk = static_cast<double>(k);
        t0 *= q / (dk * dk);
        t1 *= q / (dk * (dk + 1.0));
        s0 += t0;
        s1 += t1;
        if (t0 < 1e-18 * s0 && t1 <= 1e-18 * s1) break;
    }
    return s1 / s0;
}

double bessel_ratio_asymptotic(double z) {
    // e^-z sqrt(2 pi z) I_nu(z) ~ sum_k (-1)^k a_k(nu) / z^k,
    // a_k(nu) = prod_{j=1..k} (4nu^2 - (2j-1)^2) / (k! 8^k)
    double a0 = 1.0, a1 = 1.0;
    double s0 = 1.0, s1 = 1.0;
    for (int k = 1; k <= 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double denom = 8.0 * k * z;
        a0 *= -(0.0 - odd * odd) / denom;
        a1 *= -(4.0 - odd * odd) / denom;
        s0 += a0;
        s1 += a1;
        if (std::abs(a0) < 1e-18 && std::abs(a1) < 1e-18) break;
    }
    return s1 / s0;
}

}  // namespace

RealImage poisson_score(const RealImage& y, const RealImage& x_tilde, double sigma0, double sigma_t,
                        double floor, std::size_t* clamped) {
    require_same_shape(y, x_tilde, "poisson_score");
    const double s2 = annealed_variance(sigma0, sigma_t);
    const double inv = 1.0 / (2.0 * s2);
    std::size_t n_clamped = 0;
    RealImage out(y.height(), y.width());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double x = x_tilde[i];
        if (!(x >= floor)) {
            x = floor;
            ++n_clamped;
        }
        const double ratio = y[i] / x;
        out[i] = inv * (ratio * ratio - 1.0) - 0.5 / x;
    }
    if (clamped) *clamped = n_clamped;
    return out;
}

double bessel_ratio(double z) {
    if (!(z >= 0.0)) throw DomainError("bessel_ratio: argument must be >= 0");
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return 1.0;
    return z < kSeriesLimit ? bessel_ratio_series(z) : bessel_ratio_asymptotic(z);
}

ComplexImage complex_score_identity(const RealImage& y, const ComplexImage& o_tilde, double sigma0,
                                    double sigma_t) {
    require_same_shape(y, o_tilde, "complex_score_identity");
    const double s2 = annealed_variance(sigma0, sigma_t);
    ComplexImage out(y.height(), y.width());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0) throw DomainError("complex_score_identity: negative measurement");
        const Complex o = o_tilde[i];
        const double mag = std::abs(o);
        if (mag == 0.0) {
            out[i] = Complex(0.0, 0.0);
            continue;
        }
        const double sy = std::sqrt(y[i]);
        const double ratio = bessel_ratio(mag * sy / s2);
        out[i] = o * ((ratio * sy / mag - 1.0) / (2.0 * s2));
    }
    return out;
}

ComplexImage complex_score_general(const MeasurementStack& stack, const ComplexImage& o_tilde,
                                   const ForwardModel& model, double sigma0, double sigma_t) {
    if (stack.m() != model.measurement_count()) {
        throw DimensionError("complex_score_general: stack holds " + std::to_string(stack.m()) +
                             " images but the model produces " + std::to_string(model.measurement_count()));
    }
    if (model.is_identity()) return complex_score_identity(stack.images.front(), o_tilde, sigma0, sigma_t);
    auto fields = apply(model, o_tilde);
    for (std::size_t m = 0; m < fields.size(); ++m) {
        fields[m] = complex_score_identity(stack.images[m], fields[m], sigma0, sigma_t);
    }
    return adjoint(model, fields);
}

}  // namespace pls
