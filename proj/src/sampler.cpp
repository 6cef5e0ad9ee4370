#include "pls/sampler.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "pls/likelihood.hpp"

namespace pls {

void SamplerConfig::validate() const {
    if (steps_per_level < 1) throw ConfigError("steps_per_level must be >= 1");
    if (!(clamp_floor > 0.0)) throw ConfigError("clamp_floor must be positive");
}

namespace {

template <typename Image>
double l2_norm(const Image& img) {
    double acc = 0.0;
    for (const auto& v : img) acc += std::norm(v);
    return std::sqrt(acc);
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

RealImage init_state_real(const SamplerConfig& cfg, const RealImage& y) {
    RealImage x = std::visit(
        [&](const auto& mode) -> RealImage {
            using M = std::decay_t<decltype(mode)>;
            if constexpr (std::is_same_v<M, InitFromMeasurement> || std::is_same_v<M, InitAdjoint>) {
                return y;
            } else if constexpr (std::is_same_v<M, InitProvided>) {
                const auto* img = std::get_if<RealImage>(&mode.image);
                if (!img) throw ConfigError("provided initialization must be a real image for the real sampler");
                require_same_shape(*img, y, "provided initialization");
                return *img;
            } else {
                throw ConfigError("noisy-HIO initialization applies to the Fourier-magnitude model only");
            }
        },
        cfg.init);
    for (double& v : x) v = std::max(v, cfg.clamp_floor);
    return x;
}

RealImage run_real(const RealImage& y, const ScoreProvider& provider, const SamplerConfig& cfg, RngStream& rng,
                   SamplerTrace<RealImage>* trace) {
    cfg.validate();
    for (double v : y) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("run_real: measurement must be finite and >= 0");
    }
    const SigmaSchedule& sched = cfg.schedule;
    RealImage x = init_state_real(cfg, y);
    std::size_t iteration = 0;
    for (std::size_t t = 1; t <= sched.size(); ++t) {
        const double alpha = step_size(sched, t);
        const double sigma_t = sched.sigma(t);
        const double noise_gain = std::sqrt(2.0 * alpha);
        double update_norm = 0.0;
        for (std::size_t s = 0; s < cfg.steps_per_level; ++s, ++iteration) {
            std::size_t clamped = 0;
            RealImage delta = poisson_score(y, x, sched.sigma0(), sigma_t, cfg.clamp_floor);
            const RealImage prior = score_real(provider, x, sigma_t);
            for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = alpha * (delta[i] + prior[i]);
            update_norm += l2_norm(delta);
            bool finite = true;
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] += delta[i] + noise_gain * rng.normal();
                finite = finite && std::isfinite(x[i]);
                if (x[i] < cfg.clamp_floor) {
                    x[i] = cfg.clamp_floor;
                    ++clamped;
                }
            }
            if (!finite) throw DivergenceError("real sampler produced a non-finite iterate", iteration + 1);
            if (trace) trace->clamped += clamped;
        }
        if (trace) {
            trace->update_norms.push_back(update_norm / static_cast<double>(cfg.steps_per_level));
            if (cfg.record_trajectory) trace->trajectory.push_back(x);
        }
    }
    return x;
}

InitState init_state(const SamplerConfig& cfg, const MeasurementStack& stack, const ForwardModel& model,
                     RngStream& rng) {
    if (stack.m() != model.measurement_count()) {
        throw DimensionError("init_state: stack size does not match the forward model");
    }
    const double rho = model.rho();
    return std::visit(
        [&](const auto& mode) -> InitState {
            using M = std::decay_t<decltype(mode)>;
            if constexpr (std::is_same_v<M, InitFromMeasurement>) {
                if (model.is_fourier()) {
                    throw ConfigError("measurement initialization is undefined for the Fourier model; use hio or adjoint");
                }
                // the first measurement is the on-axis one for ptychography
                const RealImage& y = stack.images.front();
                ComplexImage o(y.height(), y.width());
                const double gain = model.is_ptychography() ? 1.0 / rho : 1.0;
                for (std::size_t i = 0; i < y.size(); ++i) o[i] = Complex(std::sqrt(std::max(0.0, y[i] * gain)), 0.0);
                return {std::move(o), std::nullopt};
            } else if constexpr (std::is_same_v<M, InitAdjoint>) {
                std::vector<ComplexImage> fields;
                for (const auto& y : stack.images) {
                    ComplexImage f(y.height(), y.width());
                    for (std::size_t i = 0; i < y.size(); ++i) f[i] = Complex(std::sqrt(std::max(0.0, y[i])), 0.0);
                    fields.push_back(std::move(f));
                }
                ComplexImage o = adjoint(model, fields);
                double peak = 0.0;
                for (const auto& v : o) peak = std::max(peak, std::abs(v));
                if (peak > 0.0) {
                    for (auto& v : o) v /= peak;
                }
                return {std::move(o), std::nullopt};
            } else if constexpr (std::is_same_v<M, InitNoisyHio>) {
                const auto* fm = std::get_if<FourierMagnitudeModel>(&model.variant());
                if (!fm) throw ConfigError("noisy-HIO initialization applies to the Fourier-magnitude model only");
                const RealImage& y = stack.images.front();
                const std::size_t h = y.height() / fm->pad_factor;
                const std::size_t w = y.width() / fm->pad_factor;
                HioResult hio;
                if (mode.solved) {
                    require_same_shape(mode.solved->best, y, "precomputed HIO solution");
                    hio = *mode.solved;
                } else {
                    RngStream hio_rng = rng.substream(kHioStream);
                    hio = hio_initializer(stack, model, mode.hio, hio_rng);
                }
                ComplexImage o = crop(hio.best, h, w);
                const double sd = mode.noise_scale * cfg.schedule.sigma(1);
                if (sd > 0.0) {
                    for (auto& v : o) {
                        const double re = rng.normal();
                        const double im = rng.normal();
                        v += Complex(sd * re, sd * im);
                    }
                }
                return {std::move(o), hio.residual};
            } else {
                const auto* img = std::get_if<ComplexImage>(&mode.image);
                if (!img) throw ConfigError("provided initialization must be complex for the complex sampler");
                return {*img, std::nullopt};
            }
        },
        cfg.init);
}

HioResult hio_initializer(const MeasurementStack& stack, const ForwardModel& model, const HioConfig& hio,
                          RngStream& rng) {
    const auto* fm = std::get_if<FourierMagnitudeModel>(&model.variant());
    if (!fm) throw ConfigError("HIO applies to the Fourier-magnitude model only");
    const RealImage& y = stack.images.front();
    const double rho = model.rho();
    RealImage mags(y.height(), y.width());
    for (std::size_t i = 0; i < y.size(); ++i) mags[i] = std::sqrt(std::max(0.0, y[i]) / rho);
    return hio_solve(mags, box_support(y.height(), y.width(), y.height() / fm->pad_factor, y.width() / fm->pad_factor),
                     hio, rng);
}

ComplexImage run_complex(const MeasurementStack& stack, const ForwardModel& model, const ScoreProvider& provider,
                         const SamplerConfig& cfg, RngStream& rng, SamplerTrace<ComplexImage>* trace) {
    cfg.validate();
    const SigmaSchedule& sched = cfg.schedule;
    InitState init = init_state(cfg, stack, model, rng);
    ComplexImage o = std::move(init.image);
    if (trace) trace->hio_residual = init.hio_residual;
    const auto [mh, mw] = model.measurement_shape(o.height(), o.width());
    if (mh != stack.height() || mw != stack.width()) {
        throw DimensionError("run_complex: object shape does not map onto the measurement shape");
    }
    std::size_t iteration = 0;
    for (std::size_t t = 1; t <= sched.size(); ++t) {
        const double alpha = step_size(sched, t);
        const double sigma_t = sched.sigma(t);
        const double noise_gain = std::sqrt(2.0 * alpha);
        double update_norm = 0.0;
        for (std::size_t s = 0; s < cfg.steps_per_level; ++s, ++iteration) {
            ComplexImage delta = complex_score_general(stack, o, model, sched.sigma0(), sigma_t);
            const ComplexImage prior = score_complex(provider, o, sigma_t);
            for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = alpha * (delta[i] + prior[i]);
            update_norm += l2_norm(delta);
            bool finite = true;
            for (std::size_t i = 0; i < o.size(); ++i) {
                const double re = rng.normal();
                const double im = rng.normal();
                o[i] += delta[i] + noise_gain * Complex(re, im);
                finite = finite && std::isfinite(o[i].real()) && std::isfinite(o[i].imag());
            }
            if (!finite) throw DivergenceError("complex sampler produced a non-finite iterate", iteration + 1);
        }
        if (trace) {
            trace->update_norms.push_back(update_norm / static_cast<double>(cfg.steps_per_level));
            if (cfg.record_trajectory) trace->trajectory.push_back(o);
        }
    }
    return o;
}

// ---------------------------------------------------------------------------

MomentAccumulator::MomentAccumulator(std::size_t height, std::size_t width)
    : mean_(height, width, 0.0), m2_(height, width, 0.0) {}

void MomentAccumulator::add(const RealImage& sample) {
    MomentAccumulator single(sample.height(), sample.width());
    single.count_ = 1;
    single.mean_ = sample;
    merge(single);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    require_same_shape(mean_, other.mean_, "moment merge");
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        const double d = other.mean_[i] - mean_[i];
        mean_[i] += d * nb / n;
        m2_[i] += other.m2_[i] + d * d * na * nb / n;
    }
    count_ += other.count_;
}

RealImage MomentAccumulator::variance() const {
    RealImage v(mean_.height(), mean_.width(), 0.0);
    if (count_ < 2) return v;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2_[i] / static_cast<double>(count_ - 1);
    return v;
}

namespace {

template <typename Image>
std::vector<Image> run_all(std::uint64_t seed, const std::function<Image(RngStream&)>& run, std::size_t n_runs,
                           std::size_t jobs) {
    if (n_runs < 2) throw ConfigError("ensemble needs at least 2 runs");
    std::vector<std::optional<Image>> slots(n_runs);
    std::vector<std::exception_ptr> errors(n_runs);
    auto worker = [&](std::size_t first, std::size_t stride) {
        for (std::size_t k = first; k < n_runs; k += stride) {
            try {
                RngStream rng(seed, k);
                slots[k] = run(rng);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, n_runs));
    if (jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker, j, jobs);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Image> out;
    out.reserve(n_runs);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace

Ensemble<RealImage> ensemble_real(std::uint64_t seed, const std::function<RealImage(RngStream&)>& run,
                                  std::size_t n_runs, std::size_t jobs) {
    Ensemble<RealImage> e;
    e.samples = run_all(seed, run, n_runs, jobs);
    MomentAccumulator acc;
    for (const auto& s : e.samples) acc.add(s);
    e.mean = acc.mean();
    e.variance = acc.variance();
    return e;
}

Ensemble<ComplexImage> ensemble_complex(std::uint64_t seed, const std::function<ComplexImage(RngStream&)>& run,
                                        std::size_t n_runs, std::size_t jobs) {
    Ensemble<ComplexImage> e;
    e.samples = run_all(seed, run, n_runs, jobs);
    const std::size_t h = e.samples.front().height();
    const std::size_t w = e.samples.front().width();
    MomentAccumulator amp;
    ComplexImage resultant(h, w);
    for (const auto& s : e.samples) {
        amp.add(amplitude(s));
        for (std::size_t i = 0; i < s.size(); ++i) resultant[i] += std::polar(1.0, std::arg(s[i]));
    }
    e.mean = amp.mean();
    e.variance = amp.variance();
    RealImage circ_mean = phase(resultant);
    RealImage phase_var(h, w, 0.0);
    for (const auto& s : e.samples) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double d = wrap_angle(std::arg(s[i]) - circ_mean[i]);
            phase_var[i] += d * d;
        }
    }
    for (double& v : phase_var) v /= static_cast<double>(e.samples.size() - 1);
    e.phase_mean = std::move(circ_mean);
    e.phase_variance = std::move(phase_var);
    return e;
}

}  // namespace pls
