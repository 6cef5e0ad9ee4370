#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "pls/noise_sim.hpp"
#include "test_util.hpp"

using namespace pls;
using pls::oracle::tv_distance;

namespace {

// Two-sample Kolmogorov-Smirnov p-value (asymptotic distribution).
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double q = 0.0;
    for (int k = 1; k < 100; ++k) q += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(q, 0.0, 1.0);
}

}  // namespace

TEST_SUITE("noise-sim") {
TEST_CASE("poisson of zero rate is zero") {
    RngStream rng(1);
    RealImage lam(4, 4, 0.0);
    for (double v : poisson_sample(lam, rng)) CHECK(v == 0.0);
    RealImage bad(1, 1, -1.0);
    CHECK_THROWS_AS(poisson_sample(bad, rng), DomainError);
}

TEST_CASE("poisson moments at lambda = 1e4") {
    RngStream rng(2024);
    const long n = 1000000;
    double s = 0.0, ss = 0.0;
    for (long i = 0; i < n; ++i) {
        const double k = static_cast<double>(poisson_draw(1e4, rng));
        s += k;
        ss += k * k;
    }
    const double mean = s / n;
    const double var = (ss - n * mean * mean) / (n - 1);
    CHECK(std::abs(mean - 1e4) < 0.3);
    CHECK(var / mean >= 0.99);
    CHECK(var / mean <= 1.01);
}

TEST_CASE("poisson P(0) at lambda = 0.5") {
    RngStream rng(99);
    const long n = 1000000;
    long zeros = 0;
    for (long i = 0; i < n; ++i) zeros += poisson_draw(0.5, rng) == 0;
    const double p = std::exp(-0.5);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(zeros) / n - p) < 3.0 * se);
}

TEST_CASE("poisson pmf matches for lambda <= 30, across the method crossover") {
    for (double lambda : {0.5, 2.0, 10.0, 29.9, 30.0}) {
        CAPTURE(lambda);
        CHECK(tv_distance(lambda, 1000000, 17) < 0.005);
    }
}

TEST_CASE("simulate_measurement") {
    RngStream rng(5);
    NoiseParams n(10000.0);
    for (double v : simulate_measurement(RealImage(3, 3, 0.0), n, rng)) CHECK(v == 0.0);

    // photon-noise variance sigma0^2 x
    RealImage half(100, 1000, 0.5);
    const RealImage y = simulate_measurement(half, n, rng);
    double s = 0.0, ss = 0.0;
    for (double v : y) {
        s += v - 0.5;
        ss += (v - 0.5) * (v - 0.5);
    }
    const double m = s / y.size();
    const double sd = std::sqrt(ss / y.size() - m * m);
    const double expected = 0.01 * std::sqrt(0.5);
    CHECK(std::abs(sd - expected) < 0.05 * expected);

    NoiseParams n8(10000.0, 8);
    std::mt19937_64 gen(3);
    const RealImage q = simulate_measurement(testing::random_real(32, 32, gen), n8, rng);
    for (double v : q) {
        const double k = v * 255.0;
        CHECK(std::abs(k - std::round(k)) < 1e-9);
        CHECK(v <= 1.0);
    }

    RealImage bad(1, 1, 1.5);
    CHECK_THROWS_AS(simulate_measurement(bad, n, rng), DomainError);
}

TEST_CASE("simulate_measurement converges to the clean image as fwc grows") {
    std::mt19937_64 gen(11);
    const RealImage clean = testing::random_real(32, 32, gen, 0.1, 0.9);
    double prev = 1e9;
    for (double fwc : {1e2, 1e4, 1e6}) {
        RngStream rng(8);
        const RealImage y = simulate_measurement(clean, NoiseParams(fwc), rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - clean[i]) * (y[i] - clean[i]);
        const double rms = std::sqrt(acc / y.size());
        // rms error ~ fwc^(-1/2) sqrt(mean x)
        CHECK(rms < 1.3 * std::sqrt(0.5 / fwc));
        CHECK(rms < prev);
        prev = rms;
    }
}

TEST_CASE("simulate_intensity_measurements") {
    NoiseParams n(10000.0, 0);
    std::mt19937_64 gen(21);

    RngStream rng(1);
    const auto zero = simulate_intensity_measurements(ComplexImage(8, 8), ForwardModel(), n, rng);
    for (double v : zero.images.front()) CHECK(v == 0.0);

    // identity model composes to simulate_measurement
    const RealImage clean = testing::random_real(16, 16, gen);
    ComplexImage o(16, 16);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::polar(std::sqrt(clean[i]), 0.7 * i);
    RngStream r1(77), r2(77);
    const auto stack = simulate_intensity_measurements(o, ForwardModel(), n, r1);
    const RealImage direct = simulate_measurement(squared_magnitude(o), n, r2);
    CHECK(stack.images.front() == direct);

    // all-pass ptychography is statistically the identity model
    const RealImage flat = testing::random_real(100, 100, gen, 0.2, 0.8);
    const ComplexImage fo = to_complex([&] {
        RealImage a(100, 100);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sqrt(flat[i]);
        return a;
    }());
    PtychographyModel allpass{{PupilMask::all_pass(100, 100)}, 1.0};
    RngStream ra(1000), rb(2000);
    const auto pa = simulate_intensity_measurements(fo, ForwardModel(allpass), n, ra);
    const auto pb = simulate_intensity_measurements(fo, ForwardModel(), n, rb);
    std::vector<double> da, db;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        da.push_back(pa.images.front()[i] - flat[i]);
        db.push_back(pb.images.front()[i] - flat[i]);
    }
    CHECK(ks_pvalue(da, db) > 0.01);

    // saturation is rejected
    ComplexImage hot(4, 4, Complex(1.1, 0.0));
    RngStream rs(3);
    CHECK_THROWS_AS(simulate_intensity_measurements(hot, ForwardModel(), n, rs), SaturationError);

    // determinism
    RngStream d1(9), d2(9);
    auto m = make_ptychography(16, 16, 5, 2.0, 4.0, 0.5);
    ComplexImage small(16, 16, Complex(0.5, 0.5));
    CHECK(simulate_intensity_measurements(small, ForwardModel(m), n, d1).images ==
          simulate_intensity_measurements(small, ForwardModel(m), n, d2).images);
}
}
