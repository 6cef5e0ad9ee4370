#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pls/hio.hpp"
#include "pls/metrics.hpp"
#include "pls/noise_sim.hpp"
#include "pls/sampler.hpp"
#include "test_util.hpp"

using namespace pls;

namespace {

SigmaSchedule real_schedule(double sigma0, std::size_t t = 1000) {
    const auto s = default_schedule(sigma0, t);
    return s.with_eps(scaled_eps(s.last(), kRealStepScale));
}

SigmaSchedule complex_schedule(double sigma0, double scale = kComplexStepScale, std::size_t t = 1000) {
    const auto s = default_schedule(sigma0, t);
    return s.with_eps(scaled_eps(s.last(), scale));
}

double log_poisson(double k, double lambda) { return k * std::log(lambda) - lambda - std::lgamma(k + 1.0); }

}  // namespace

TEST_SUITE("sampler") {
TEST_CASE("zero step size returns the initialization") {
    std::mt19937_64 gen(41);
    const RealImage y = testing::random_real(5, 5, gen, 0.1, 1.0);
    SamplerConfig cfg(make_schedule(0.1, 0.05, 0.05, 1, ScheduleKind::geometric, 0.0));
    RngStream rng(1);
    CHECK(run_real(y, ScoreProvider(), cfg, rng) == y);

    const ComplexImage o = testing::random_complex(5, 5, gen);
    RealImage yi(5, 5);
    for (std::size_t i = 0; i < yi.size(); ++i) yi[i] = std::norm(o[i]);
    cfg.init = InitProvided{o};
    MeasurementStack stack({yi}, NoiseParams::from_sigma0(0.1));
    CHECK(run_complex(stack, ForwardModel(), ScoreProvider(), cfg, rng) == o);

    // the real initialization is clamped to the floor
    RealImage dark(2, 2, 0.0);
    cfg.init = InitFromMeasurement{};
    for (double v : run_real(dark, ScoreProvider(), cfg, rng)) CHECK(v == cfg.clamp_floor);
}

TEST_CASE("runs are deterministic per stream") {
    std::mt19937_64 gen(42);
    const RealImage x = testing::blob_image(8, 8, gen, 0.1, 0.9);
    RngStream noise(3);
    const RealImage y = simulate_measurement(x, NoiseParams::from_sigma0(0.1), noise);
    const ScoreProvider prior(DiscreteRealPrior{{x}, {}});
    SamplerConfig cfg(real_schedule(0.1, 200));
    RngStream a(9, 2), b(9, 2), c(9, 3);
    const RealImage ra = run_real(y, prior, cfg, a);
    CHECK(ra == run_real(y, prior, cfg, b));
    CHECK_FALSE(ra == run_real(y, prior, cfg, c));

    const ComplexImage o = testing::random_complex(6, 6, gen, 0.3);
    const ForwardModel model(FourierMagnitudeModel{2, 1.0});
    MeasurementStack stack(intensity(model, o), NoiseParams::from_sigma0(0.05));
    SamplerConfig ccfg(complex_schedule(0.05, kComplexStepScale, 100));
    ccfg.init = InitAdjoint{};
    RngStream d(4, 0), e(4, 0);
    CHECK(run_complex(stack, model, ScoreProvider(), ccfg, d) == run_complex(stack, model, ScoreProvider(), ccfg, e));
}

TEST_CASE("delta prior denoising gains 10 dB") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 gen(100 + seed);
        const RealImage x = testing::blob_image(16, 16, gen, 0.1, 0.9);
        RngStream noise(seed, 0);
        const RealImage y = simulate_measurement(x, NoiseParams::from_sigma0(0.1, 8), noise);
        SamplerConfig cfg(real_schedule(0.1));
        SamplerTrace<RealImage> trace;
        RngStream rng(seed, 1);
        const RealImage est = run_real(y, ScoreProvider(DiscreteRealPrior{{x}, {}}), cfg, rng, &trace);
        CAPTURE(seed);
        CHECK(psnr(est, x) >= psnr(y, x) + 10.0);
        REQUIRE(trace.update_norms.size() == 1000);
        // per-level update size shrinks over the last quarter (block means of 50 levels)
        double prev = INFINITY;
        for (std::size_t b = 750; b < 1000; b += 50) {
            double m = 0.0;
            for (std::size_t t = b; t < b + 50; ++t) m += trace.update_norms[t] / 50.0;
            CHECK(m <= prev);
            prev = m;
        }
    }
}

TEST_CASE("posterior atom frequency matches the exact posterior") {
    const RealImage a(2, 2, 0.2), b(2, 2, 0.8);
    const NoiseParams noise = NoiseParams::from_sigma0(0.2);
    RngStream draw(5);
    const RealImage y = simulate_measurement(a, noise, draw);
    double la = 0.0, lb = 0.0;
    for (double v : y) {
        la += log_poisson(v * noise.fwc(), a[0] * noise.fwc());
        lb += log_poisson(v * noise.fwc(), b[0] * noise.fwc());
    }
    const double exact = 1.0 / (1.0 + std::exp(lb - la));
    const ScoreProvider prior(DiscreteRealPrior{{a, b}, {}});
    SamplerConfig cfg(real_schedule(0.2));
    int hits = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        RngStream rng(17, k);
        const RealImage x = run_real(y, prior, cfg, rng);
        double da = 0.0, db = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            da += std::pow(x[i] - a[i], 2);
            db += std::pow(x[i] - b[i], 2);
        }
        hits += da < db;
    }
    CHECK(std::abs(hits / 200.0 - exact) <= 0.10);
}

TEST_CASE("identity model: amplitude is pinned, phase is not") {
    std::mt19937_64 gen(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ComplexImage o(4, 4);
    for (auto& v : o) v = std::polar(0.3 + 0.7 * u(gen), 6.0 * u(gen));
    o[0] = std::polar(0.15, 1.0);
    RealImage y(4, 4);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::norm(o[i]);
    MeasurementStack stack({y}, NoiseParams::from_sigma0(0.005));
    SamplerConfig cfg(complex_schedule(0.005, 0.5));
    cfg.steps_per_level = 20;
    const auto ens = ensemble_complex(
        8, [&](RngStream& rng) { return run_complex(stack, ForwardModel(), ScoreProvider(), cfg, rng); }, 50);
    double worst = 0.0;
    Complex resultant(0.0, 0.0);
    for (const auto& s : ens.samples) {
        for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(std::abs(s[i]) - std::sqrt(y[i])));
        resultant += std::polar(1.0, std::arg(s[0]));
    }
    CHECK(worst < 0.05);
    CHECK(std::abs(resultant) / 50.0 < 0.5);
}

TEST_CASE("Fourier model stays in the basin of the truth") {
    std::mt19937_64 gen(44);
    const RealImage amp = testing::blob_image(16, 16, gen, 0.2, 1.0);
    const ComplexImage truth = polar(amp, testing::blob_image(16, 16, gen, -1.0, 1.0));
    const ForwardModel model(FourierMagnitudeModel{2, 1.0});
    for (auto [sigma0, floor_db] : {std::pair{0.0025, 40.0}, std::pair{0.025, 20.0}}) {
        CAPTURE(sigma0);
        MeasurementStack stack(intensity(model, truth), NoiseParams::from_sigma0(sigma0));
        SamplerConfig cfg(complex_schedule(sigma0));
        cfg.init = InitProvided{truth};
        RngStream rng(6);
        const ComplexImage est = run_complex(stack, model, ScoreProvider(), cfg, rng);
        CHECK(psnr(amplitude(est), amp) >= floor_db);
        CHECK(align_ambiguities(est, truth).correlation > 0.99);
        CHECK_FALSE(align_ambiguities(est, truth).conjugate_flip);
    }
}

TEST_CASE("initialization") {
    std::mt19937_64 gen(45);
    RngStream rng(7);
    SamplerConfig cfg(complex_schedule(0.1, kComplexStepScale, 10));

    SUBCASE("measurement, y = 0") {
        MeasurementStack stack({RealImage(4, 4, 0.0)}, NoiseParams::from_sigma0(0.1));
        for (auto v : init_state(cfg, stack, ForwardModel(), rng).image) CHECK(v == Complex(0.0, 0.0));
        CHECK_THROWS_AS(init_state(cfg, MeasurementStack({RealImage(8, 8, 0.1)}, NoiseParams(100.0)),
                                   ForwardModel(FourierMagnitudeModel{2, 1.0}), rng),
                        ConfigError);
    }
    SUBCASE("measurement undoes the irradiance for ptychography") {
        const ForwardModel model(PtychographyModel{{PupilMask::all_pass(3, 3)}, 0.25});
        MeasurementStack stack({RealImage(3, 3, 0.04)}, NoiseParams(100.0), 0.25);
        for (auto v : init_state(cfg, stack, model, rng).image) CHECK(std::abs(v - Complex(0.4, 0.0)) < 1e-15);
    }
    SUBCASE("adjoint is normalized") {
        const RealImage y = testing::random_real(6, 6, gen, 0.0, 4.0);
        MeasurementStack stack({y}, NoiseParams(100.0));
        cfg.init = InitAdjoint{};
        const auto o = init_state(cfg, stack, ForwardModel(PtychographyModel{{PupilMask::all_pass(6, 6)}, 1.0}), rng);
        double peak = 0.0;
        for (auto v : o.image) peak = std::max(peak, std::abs(v));
        CHECK(peak == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("noisy HIO with zero noise is the HIO output") {
        const ComplexImage truth = testing::random_complex(6, 6, gen);
        const ForwardModel model(FourierMagnitudeModel{2, 1.0});
        MeasurementStack stack(intensity(model, truth), NoiseParams(100.0));
        HioConfig hc;
        hc.iters = 30;
        hc.restarts = 3;
        cfg.init = InitNoisyHio{0.0, hc, nullptr};
        RngStream r1(8);
        const InitState init = init_state(cfg, stack, model, r1);

        RealImage mags(12, 12);
        for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::sqrt(stack.images[0][i]);
        RngStream r2 = RngStream(8).substream(0x4849);
        const HioResult hio = hio_solve(mags, box_support(12, 12, 6, 6), hc, r2);
        CHECK(init.image == crop(hio.best, 6, 6));
        REQUIRE(init.hio_residual.has_value());
        CHECK(*init.hio_residual == hio.residual);

        // a shared solution replaces the per-run solve
        RngStream r4 = RngStream(8).substream(kHioStream);
        auto shared = std::make_shared<const HioResult>(hio_initializer(stack, model, hc, r4));
        cfg.init = InitNoisyHio{0.0, hc, shared};
        RngStream r5(123);
        CHECK(init_state(cfg, stack, model, r5).image == init.image);

        cfg.init = InitNoisyHio{1.0, hc, nullptr};
        RngStream r3(8);
        const InitState noisy = init_state(cfg, stack, model, r3);
        double d2 = 0.0;
        for (std::size_t i = 0; i < noisy.image.size(); ++i) d2 += std::norm(noisy.image[i] - init.image[i]);
        // E|n|^2 = 2 sigma_1^2 per pixel
        CHECK(d2 / 36.0 == doctest::Approx(2 * std::pow(cfg.schedule.sigma(1), 2)).epsilon(0.5));

        CHECK_THROWS_AS(init_state(cfg, MeasurementStack({RealImage(6, 6, 0.1)}, NoiseParams(100.0)),
                                   ForwardModel(), rng),
                        ConfigError);
    }
}

TEST_CASE("config and input errors") {
    SamplerConfig cfg(real_schedule(0.1, 10));
    RngStream rng(1);
    cfg.steps_per_level = 0;
    CHECK_THROWS_AS(run_real(RealImage(2, 2, 0.5), ScoreProvider(), cfg, rng), ConfigError);
    cfg.steps_per_level = 1;
    cfg.clamp_floor = 0.0;
    CHECK_THROWS_AS(run_real(RealImage(2, 2, 0.5), ScoreProvider(), cfg, rng), ConfigError);
    cfg.clamp_floor = 1e-4;
    CHECK_THROWS_AS(run_real(RealImage(2, 2, -0.5), ScoreProvider(), cfg, rng), DomainError);
    cfg.init = InitProvided{ComplexImage(2, 2)};
    CHECK_THROWS_AS(run_real(RealImage(2, 2, 0.5), ScoreProvider(), cfg, rng), ConfigError);
    cfg.init = InitProvided{ComplexImage(3, 3)};
    MeasurementStack stack({RealImage(2, 2, 0.5)}, NoiseParams(100.0));
    CHECK_THROWS_AS(run_complex(stack, ForwardModel(), ScoreProvider(), cfg, rng), DimensionError);
}

TEST_CASE("divergence is reported with its iteration") {
    SamplerConfig cfg(default_schedule(0.1, 50).with_eps(1e300));
    RngStream rng(2);
    try {
        run_real(RealImage(3, 3, 0.5), ScoreProvider(DiscreteRealPrior{{RealImage(3, 3, 0.2)}, {}}), cfg, rng);
        FAIL("expected a divergence error");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration() >= 1);
        CHECK(e.iteration() <= 50);
    }
}

TEST_CASE("trajectory and clamp diagnostics") {
    SamplerConfig cfg(real_schedule(0.1, 30));
    cfg.record_trajectory = true;
    cfg.steps_per_level = 2;
    SamplerTrace<RealImage> trace;
    RngStream rng(3);
    RealImage y(3, 3, 0.3);
    y[0] = 0.0;
    run_real(y, ScoreProvider(), cfg, rng, &trace);
    CHECK(trace.trajectory.size() == 30);
    CHECK(trace.update_norms.size() == 30);
    CHECK(trace.clamped >= 1);
}

TEST_CASE("ensembles") {
    SUBCASE("deterministic closure has zero variance") {
        const auto e = ensemble_real(1, [](RngStream&) { return RealImage(3, 3, 0.4); }, 5);
        for (double v : e.variance) CHECK(v == 0.0);
        for (double v : e.mean) CHECK(v == 0.4);
        const auto c = ensemble_complex(1, [](RngStream&) { return ComplexImage(3, 3, Complex(0.0, 2.0)); }, 4);
        for (double v : *c.phase_variance) CHECK(v == doctest::Approx(0.0));
        for (double v : *c.phase_mean) CHECK(v == doctest::Approx(std::numbers::pi / 2));
        for (double v : c.mean) CHECK(v == 2.0);
    }
    SUBCASE("a single run is rejected") {
        CHECK_THROWS_AS(ensemble_real(1, [](RngStream&) { return RealImage(1, 1); }, 1), ConfigError);
    }
    SUBCASE("streams are (seed, k) and results ignore the thread count") {
        auto run = [](RngStream& r) {
            RealImage x(2, 2);
            for (auto& v : x) v = r.normal();
            return x;
        };
        const auto one = ensemble_real(9, run, 7, 1);
        const auto many = ensemble_real(9, run, 7, 3);
        for (std::size_t k = 0; k < 7; ++k) {
            CHECK(one.samples[k] == many.samples[k]);
            RngStream r(9, k);
            CHECK(one.samples[k] == run(r));
        }
        CHECK(one.variance == many.variance);
        CHECK(one.mean == many.mean);
    }
    SUBCASE("errors inside a run propagate") {
        CHECK_THROWS_AS(ensemble_real(
                            1, [](RngStream& r) -> RealImage {
                                if (r.stream_id() == 2) throw DomainError("boom");
                                return RealImage(1, 1);
                            },
                            4, 2),
                        DomainError);
    }
    SUBCASE("variance concentrates where the atoms differ") {
        RealImage a(4, 4, 0.5), b(4, 4, 0.5);
        a(1, 1) = a(2, 2) = 0.3;
        b(1, 1) = b(2, 2) = 0.7;
        // measurement at the point where the two smoothed likelihoods balance
        auto gap = [](double v) {
            const double s2 = 0.01;
            return -0.5 * std::log(0.3) - (v - 0.3) * (v - 0.3) / (2 * s2 * 0.3) + 0.5 * std::log(0.7) +
                   (v - 0.7) * (v - 0.7) / (2 * s2 * 0.7);
        };
        double lo = 0.3, hi = 0.7;
        for (int i = 0; i < 60; ++i) ((gap(lo) * gap(0.5 * (lo + hi)) <= 0.0) ? hi : lo) = 0.5 * (lo + hi);
        RealImage y(4, 4, 0.5);
        y(1, 1) = y(2, 2) = lo;
        const ScoreProvider prior(DiscreteRealPrior{{a, b}, {}});
        SamplerConfig cfg(real_schedule(0.1));
        const auto e = ensemble_real(3, [&](RngStream& r) { return run_real(y, prior, cfg, r); }, 50);
        double diff = 0.0, same = 0.0;
        for (std::size_t i = 0; i < 16; ++i) (a[i] != b[i] ? diff : same) += e.variance[i];
        CHECK(diff / 2.0 > 10.0 * same / 14.0);
    }
}

TEST_CASE("moment accumulator merges in any grouping") {
    std::mt19937_64 gen(46);
    std::vector<RealImage> xs;
    for (int i = 0; i < 9; ++i) xs.push_back(testing::random_real(2, 3, gen));
    MomentAccumulator all;
    for (const auto& x : xs) all.add(x);
    MomentAccumulator left, right;
    for (int i = 0; i < 4; ++i) left.add(xs[i]);
    for (int i = 4; i < 9; ++i) right.add(xs[i]);
    right.merge(left);
    CHECK(right.count() == 9);
    CHECK(testing::max_abs_diff(right.mean(), all.mean()) < 1e-15);
    CHECK(testing::max_abs_diff(right.variance(), all.variance()) < 1e-15);
    for (std::size_t p = 0; p < 6; ++p) {
        double m = 0.0, v = 0.0;
        for (const auto& x : xs) m += x[p] / 9.0;
        for (const auto& x : xs) v += (x[p] - m) * (x[p] - m) / 8.0;
        CHECK(all.mean()[p] == doctest::Approx(m).epsilon(1e-14));
        CHECK(all.variance()[p] == doctest::Approx(v).epsilon(1e-12));
    }
}
}
