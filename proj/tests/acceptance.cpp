// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "cli_app.hpp"
#include "oracles.hpp"
#include "pls/fft.hpp"
#include "pls/forward.hpp"
#include "pls/hio.hpp"
#include "pls/io.hpp"
#include "pls/likelihood.hpp"
#include "pls/metrics.hpp"
#include "pls/noise_sim.hpp"
#include "pls/sampler.hpp"
#include "test_util.hpp"

using namespace pls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SigmaSchedule real_schedule(double sigma0) {
    const auto s = default_schedule(sigma0);
    return s.with_eps(scaled_eps(s.last(), kRealStepScale));
}

// ---------------------------------------------------------------------------

Outcome gradient_consistency() {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_real = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double s0 = 0.02 + 0.3 * u(gen);
        const double st = s0 * (0.05 + 0.9 * u(gen));
        const double x = 0.01 + u(gen), y = 0.01 + 1.2 * u(gen);
        const double s2 = s0 * s0 - st * st;
        const double h = 1e-5 * x;
        const double fd =
            (oracle::log_gauss_density(y, x + h, s2) - oracle::log_gauss_density(y, x - h, s2)) / (2 * h);
        const double an = poisson_score(RealImage(1, 1, y), RealImage(1, 1, x), s0, st)[0];
        worst_real = std::max(worst_real, std::abs(an - fd) / std::max(std::abs(fd), 1.0));
    }
    double worst_id = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double s0 = 0.05 + 0.3 * u(gen), st = s0 * (0.1 + 0.8 * u(gen));
        const double s2 = s0 * s0 - st * st;
        const RealImage y(1, 1, 0.02 + u(gen));
        const ComplexImage o(1, 1, std::polar(0.05 + u(gen), 6.0 * u(gen)));
        // the score is half the (Re, Im) gradient of the log density
        const auto s = oracle::doubled(complex_score_identity(y, o, s0, st));
        worst_id = std::max(worst_id, oracle::rel_err(s, oracle::fd_gradient({y}, o, ForwardModel(), s2)));
    }
    double worst_general = 0.0;
    const double s0 = 0.2, st = 0.12, s2 = s0 * s0 - st * st;
    const ForwardModel models[] = {ForwardModel(FourierMagnitudeModel{2, 1.0}),
                                   ForwardModel(make_ptychography(6, 6, 5, 1.0, 2.0, 0.8))};
    for (int trial = 0; trial < 5; ++trial) {
        for (const auto& model : models) {
            const ComplexImage truth = testing::random_complex(6, 6, gen, 0.3);
            auto ys = intensity(model, truth);
            for (auto& img : ys)
                for (auto& v : img) v = std::max(0.0, v * (0.9 + 0.2 * u(gen)));
            MeasurementStack stack(ys, NoiseParams::from_sigma0(s0), model.rho());
            const ComplexImage o = testing::random_complex(6, 6, gen, 0.3);
            const auto s = oracle::doubled(complex_score_general(stack, o, model, s0, st));
            worst_general = std::max(worst_general, oracle::rel_err(s, oracle::fd_gradient(ys, o, model, s2)));
        }
    }
    return {worst_real < 1e-5 && worst_id < 1e-4 && worst_general < 1e-4,
            fmt("poisson %.2e (<1e-5), identity %.2e (<1e-4), fourier+ptychography %.2e (<1e-4)", worst_real,
                worst_id, worst_general)};
}

Outcome bessel_accuracy() {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double z = std::pow(10.0, -6.0 + 14.0 * i / 199.0);
        const double ref = oracle::ratio_oracle(z);
        worst = std::max(worst, std::abs(bessel_ratio(z) - ref) / ref);
    }
    bool finite = true;
    for (double z : {0.0, 1e-300, 700.0, 710.0, 1e15, 1e300, std::numeric_limits<double>::max()}) {
        const double r = bessel_ratio(z);
        finite = finite && std::isfinite(r) && r >= 0.0 && r <= 1.0;
    }
    return {worst < 1e-8 && finite, fmt("max rel err %.2e over 200 points in [1e-6, 1e8] (<1e-8), finite %s", worst,
                                        finite ? "yes" : "no")};
}

Outcome poisson_generator() {
    std::string detail;
    bool pass = true;
    std::uint64_t seed = 2024;
    for (double lambda : {0.5, 10.0, 1e4}) {
        RngStream rng(seed++);
        const long n = 1000000;
        double s = 0.0, ss = 0.0;
        for (long i = 0; i < n; ++i) {
            const double k = static_cast<double>(poisson_draw(lambda, rng));
            s += k;
            ss += k * k;
        }
        const double mean = s / n, var = (ss - n * mean * mean) / (n - 1);
        const double em = std::abs(mean / lambda - 1.0), ev = std::abs(var / lambda - 1.0);
        pass = pass && em < 0.01 && ev < 0.01;
        detail += fmt("lambda %g: mean %.2e var %.2e", lambda, em, ev);
        if (lambda <= 30.0) {
            const double tv = oracle::tv_distance(lambda, n, seed++);
            pass = pass && tv < 0.005;
            detail += fmt(" tv %.4f", tv);
        }
        detail += "; ";
    }
    return {pass, detail + "(rel <1%, tv <0.005)"};
}

Outcome forward_model() {
    std::mt19937_64 gen(31);
    double adj = 0.0;
    const std::size_t h = 12, w = 10;
    const ForwardModel models[] = {ForwardModel(), ForwardModel(FourierMagnitudeModel{2, 1.0}),
                                   ForwardModel(FourierMagnitudeModel{3, 0.5}),
                                   ForwardModel(make_ptychography(h, w, 9, 1.5, 2.5, 1.0)),
                                   ForwardModel(make_ptychography(h, w, 21, 1.0, 3.0, 0.3))};
    for (const auto& model : models) {
        for (int trial = 0; trial < 20; ++trial) {
            const ComplexImage o = testing::random_complex(h, w, gen);
            const auto [mh, mw] = model.measurement_shape(h, w);
            std::vector<ComplexImage> v;
            for (std::size_t m = 0; m < model.measurement_count(); ++m) v.push_back(testing::random_complex(mh, mw, gen));
            const auto ho = pls::apply(model, o);
            Complex lhs(0.0, 0.0);
            for (std::size_t m = 0; m < v.size(); ++m) lhs += testing::inner(ho[m], v[m]);
            const Complex rhs = testing::inner(o, adjoint(model, v));
            adj = std::max(adj, std::abs(lhs - rhs) / std::abs(rhs));
        }
    }
    const ComplexImage o = testing::random_complex(h, w, gen);
    const auto passed = pls::apply(ForwardModel(PtychographyModel{{PupilMask::all_pass(h, w)}, 1.0}), o);
    const bool all_pass = passed.size() == 1 && testing::max_abs_diff(passed.front(), o) < 1e-12;
    const double parseval = std::abs(testing::norm2(fft2_unitary(o)) / testing::norm2(o) - 1.0);
    return {adj < 1e-10 && all_pass && parseval < 1e-12,
            fmt("adjoint %.2e (<1e-10), all-pass identity %s, Parseval %.2e (<1e-12)", adj, all_pass ? "yes" : "no",
                parseval)};
}

Outcome posterior_frequency() {
    const RealImage a(2, 2, 0.2), b(2, 2, 0.8);
    const NoiseParams noise = NoiseParams::from_sigma0(0.2);
    RngStream draw(5);
    const RealImage y = simulate_measurement(a, noise, draw);
    double la = 0.0, lb = 0.0;
    for (double v : y) {
        const double k = v * noise.fwc();
        la += k * std::log(a[0] * noise.fwc()) - a[0] * noise.fwc() - std::lgamma(k + 1.0);
        lb += k * std::log(b[0] * noise.fwc()) - b[0] * noise.fwc() - std::lgamma(k + 1.0);
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
    const double freq = hits / 200.0;
    return {std::abs(freq - exact) <= 0.10, fmt("empirical %.3f vs exact %.4f (|diff| <= 0.10)", freq, exact)};
}

Outcome delta_prior() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 gen(100 + seed);
        const RealImage x = testing::blob_image(16, 16, gen, 0.1, 0.9);
        RngStream noise(seed, 0);
        const RealImage y = simulate_measurement(x, NoiseParams::from_sigma0(0.1, 8), noise);
        SamplerConfig cfg(real_schedule(0.1));
        RngStream rng(seed, 1);
        const RealImage est = run_real(y, ScoreProvider(DiscreteRealPrior{{x}, {}}), cfg, rng);
        const double gain = psnr(est, x) - psnr(y, x);
        pass = pass && gain >= 10.0;
        detail += fmt("%s+%.1f", seed ? ", " : "", gain);
    }
    return {pass, "PSNR gain dB per seed " + detail + " (>= 10)"};
}

Outcome hio_baseline() {
    bool pass = true;
    std::string detail;
    for (int inst = 0; inst < 5; ++inst) {
        std::mt19937_64 gen(200 + inst);
        const RealImage x = testing::blob_image(32, 32, gen, 0.05, 1.0);
        const ComplexImage o = to_complex(x);
        const auto inten = intensity(ForwardModel(FourierMagnitudeModel{2, 1.0}), o);
        RealImage mags(64, 64);
        for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::sqrt(inten[0][i]);
        HioConfig cfg;
        cfg.real_nonneg = true;
        RngStream rng(inst);
        const HioResult r = hio_solve(mags, box_support(64, 64, 32, 32), cfg, rng);
        const double corr = align_ambiguities(crop(r.best, 32, 32), o).correlation;
        pass = pass && corr >= 0.95;
        detail += fmt("%s%.4f", inst ? ", " : "", corr);
    }
    return {pass, "aligned correlation " + detail + " (>= 0.95, 50 restarts x 600 iters)"};
}

Outcome ensemble_variance() {
    RealImage a(4, 4, 0.5), b(4, 4, 0.5);
    a(1, 1) = a(2, 2) = 0.3;
    b(1, 1) = b(2, 2) = 0.7;
    // measurement where the two noise-smoothed atom likelihoods balance
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
    const double ratio = (diff / 2.0) / (same / 14.0);
    return {ratio > 10.0, fmt("differing/identical pixel variance %.1f (> 10, 50 runs)", ratio)};
}

Outcome metric_invariances() {
    std::mt19937_64 gen(61);
    const RealImage p = testing::random_real(16, 16, gen, -3.0, 3.0);
    bool pass = phase_psnr(p, p) == kPsnrCap;
    for (double offset : {0.3, -2.0, 3.1}) {
        RealImage q = p;
        for (auto& v : q) v += offset;
        pass = pass && phase_psnr(q, p) == kPsnrCap;
    }
    RealImage shifted = p;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 2.0 * std::numbers::pi * static_cast<double>(i % 3);
    pass = pass && phase_psnr(shifted, p) == kPsnrCap;
    const RealImage x = testing::random_real(16, 16, gen);
    pass = pass && psnr(x, x) == kPsnrCap && ssim(x, x) == 1.0;
    return {pass, "phase offset / 2pi shifts / identity give the exact cap; ssim(x, x) = 1"};
}

// ---------------------------------------------------------------------------

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("pls_acceptance_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const fs::path other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || file_bytes(e.path()) != file_bytes(other)) return false;
        ++files;
    }
    return true;
}

Outcome cli_determinism() {
    TempDir dir;
    std::mt19937_64 gen(71);
    io::save_real(dir / "clean.cvl", {testing::blob_image(12, 12, gen, 0.1, 0.9)});
    ComplexImage obj = polar(testing::blob_image(12, 12, gen, 0.2, 0.5), testing::blob_image(12, 12, gen, -1.0, 1.0));
    io::save_complex(dir / "obj.cvl", {obj});
    using Args = std::vector<std::string>;
    const std::vector<std::pair<std::string, Args>> runs = {
        {"sim_real", {"simulate", dir / "clean.cvl", "--sigma0", "0.1"}},
        {"denoise", {"denoise", dir / "sim_real/measurements.cvl", "--sigma0", "0.1", "--prior",
                     "discrete:" + dir / "clean.cvl", "--levels", "100", "--n-runs", "6", "--jobs", "3",
                     "--trajectory", "true", "--truth", dir / "clean.cvl"}},
        {"sim_fourier", {"simulate", dir / "obj.cvl", "--model", "fourier", "--rho", "0.02", "--sigma0", "0.05"}},
        {"phase", {"phase-retrieval", dir / "sim_fourier/measurements.cvl", "--config",
                   dir / "sim_fourier/model.conf", "--hio-restarts", "5", "--hio-iters", "100", "--levels", "100",
                   "--n-runs", "4", "--jobs", "2", "--truth", dir / "obj.cvl"}},
        {"hio", {"hio", dir / "sim_fourier/measurements.cvl", "--rho", "0.02", "--hio-restarts", "5", "--truth",
                 dir / "obj.cvl"}},
        {"sim_ptycho", {"simulate", dir / "obj.cvl", "--model", "ptychography", "--leds", "25", "--pupil-radius", "3",
                        "--rho", "0.5", "--sigma0", "0.1"}},
        {"ptycho", {"ptychography", dir / "sim_ptycho/measurements.cvl", "--config", dir / "sim_ptycho/model.conf",
                    "--levels", "100", "--n-runs", "3", "--jobs", "2"}},
    };
    std::size_t files = 0;
    for (const auto& [name, base] : runs) {
        Args args = base;
        args.insert(args.end(), {"--out", dir / name, "--seed", "31"});
        std::ostringstream out, err;
        if (cli::run(args, out, err) != 0) return {false, name + " failed: " + err.str()};
        if (cli::run({"rerun", dir / name + "/manifest.json", "--out", dir / (name + "_rerun")}, out, err) != 0) {
            return {false, name + " rerun failed: " + err.str()};
        }
        if (!same_tree(dir / name, dir / (name + "_rerun"), files)) return {false, name + " rerun differs"};
    }
    return {true, fmt("%zu output files of 7 commands identical after rerun from manifest", files)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> check;
        double time_limit_s;  // 0 = none
    };
    const Criterion criteria[] = {
        {"gradient-density consistency", gradient_consistency, 30.0},
        {"bessel ratio accuracy", bessel_accuracy, 0.0},
        {"poisson generator", poisson_generator, 0.0},
        {"forward model adjoint / all-pass / Parseval", forward_model, 0.0},
        {"posterior frequency", posterior_frequency, 300.0},
        {"delta-prior denoising +10 dB", delta_prior, 0.0},
        {"HIO baseline 32x32", hio_baseline, 120.0},
        {"ensemble variance", ensemble_variance, 0.0},
        {"metric invariances", metric_invariances, 0.0},
        {"CLI determinism", cli_determinism, 0.0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = c.check();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
            r.pass = false;
            r.detail += fmt(" [over the %.0f s limit]", c.time_limit_s);
        }
        std::printf("%s  %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !r.pass;
    }
    return failed ? 1 : 0;
}
