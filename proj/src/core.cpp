#include <algorithm>
#include <cmath>
#include <string>

#include "pls/image.hpp"
#include "pls/measurement.hpp"
#include "pls/noise.hpp"
#include "pls/rng.hpp"
#include "pls/schedule.hpp"

namespace pls {

RealImage amplitude(const ComplexImage& o) {
    RealImage out(o.height(), o.width());
    for (std::size_t i = 0; i < o.size(); ++i) out[i] = std::abs(o[i]);
    return out;
}

RealImage phase(const ComplexImage& o) {
    RealImage out(o.height(), o.width());
    for (std::size_t i = 0; i < o.size(); ++i) out[i] = std::arg(o[i]);
    return out;
}

RealImage squared_magnitude(const ComplexImage& o) {
    RealImage out(o.height(), o.width());
    for (std::size_t i = 0; i < o.size(); ++i) out[i] = std::norm(o[i]);
    return out;
}

ComplexImage to_complex(const RealImage& x) {
    ComplexImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = Complex(x[i], 0.0);
    return out;
}

ComplexImage polar(const RealImage& amp, const RealImage& ph) {
    require_same_shape(amp, ph, "polar");
    ComplexImage out(amp.height(), amp.width());
    for (std::size_t i = 0; i < amp.size(); ++i) out[i] = std::polar(amp[i], ph[i]);
    return out;
}

RealImage normalize(const RealImage& counts, const NoiseParams& noise) {
    RealImage out(counts.height(), counts.width());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(counts[i] >= 0.0)) throw DomainError("normalize: negative or NaN electron count");
        out[i] = counts[i] / noise.fwc();
    }
    return out;
}

// ---------------------------------------------------------------------------

SigmaSchedule::SigmaSchedule(double sigma0, std::vector<double> sigmas, double eps)
    : sigma0_(sigma0), sigmas_(std::move(sigmas)), eps_(eps) {
    if (sigmas_.empty()) throw ScheduleError("schedule needs at least one level");
    if (!(sigma0_ > sigmas_.front())) {
        throw ScheduleError("schedule requires sigma0 > sigma1 (got sigma0=" + std::to_string(sigma0_) +
                            ", sigma1=" + std::to_string(sigmas_.front()) + ")");
    }
    for (std::size_t i = 1; i < sigmas_.size(); ++i) {
        if (sigmas_[i] > sigmas_[i - 1]) throw ScheduleError("schedule levels must be non-increasing");
    }
    if (!(sigmas_.back() > 0.0)) throw ScheduleError("schedule requires sigma_T > 0");
    if (!(eps_ >= 0.0) || !std::isfinite(eps_)) throw ScheduleError("step-size scale must be finite and >= 0");
}

double SigmaSchedule::sigma(std::size_t t) const {
    if (t < 1 || t > sigmas_.size()) {
        throw ScheduleError("level index " + std::to_string(t) + " outside [1, " +
                            std::to_string(sigmas_.size()) + "]");
    }
    return sigmas_[t - 1];
}

SigmaSchedule make_schedule(double sigma0, double sigma1, double sigmaT, std::size_t t_count,
                            ScheduleKind kind, double eps) {
    if (t_count < 1) throw ScheduleError("schedule needs t_count >= 1");
    if (!(sigma0 > sigma1) || !(sigma1 >= sigmaT) || !(sigmaT > 0.0)) {
        throw ScheduleError("schedule requires sigma0 > sigma1 >= sigmaT > 0");
    }
    std::vector<double> levels(t_count);
    if (t_count == 1) {
        levels[0] = sigma1;
    } else {
        const double n = static_cast<double>(t_count - 1);
        for (std::size_t i = 0; i < t_count; ++i) {
            const double f = static_cast<double>(i) / n;
            levels[i] = kind == ScheduleKind::geometric ? sigma1 * std::pow(sigmaT / sigma1, f)
                                                        : sigma1 + (sigmaT - sigma1) * f;
        }
        // pin the endpoints exactly; pow() may be off by an ulp
        levels.front() = sigma1;
        levels.back() = sigmaT;
    }
    return SigmaSchedule(sigma0, std::move(levels), eps);
}

SigmaSchedule default_schedule(double sigma0, std::size_t t_count, double eps) {
    return make_schedule(sigma0, 0.9 * sigma0, 0.01 * sigma0, t_count, ScheduleKind::geometric, eps);
}

double step_size(const SigmaSchedule& schedule, std::size_t t) {
    const double s = schedule.sigma(t);
    const double last = schedule.last();
    return schedule.eps() * (s * s) / (last * last);
}

double scaled_eps(double sigma_t_last, double scale) {
    if (!(sigma_t_last > 0.0) || !(scale >= 0.0)) throw ScheduleError("scaled_eps needs sigma_T > 0 and scale >= 0");
    return scale * sigma_t_last * sigma_t_last;
}

ScheduleKind parse_schedule_kind(const std::string& name) {
    if (name == "geometric") return ScheduleKind::geometric;
    if (name == "linear") return ScheduleKind::linear;
    throw ConfigError("unknown schedule kind '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t state = seed ^ 0x5851f42d4c957f2dULL;
    const std::uint64_t a = splitmix64(state);
    state ^= stream_id * 0xd1342543de82ef95ULL;
    const std::uint64_t b = splitmix64(state);
    const std::uint64_t c = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::uniform() {
    // 53 random mantissa bits
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return gauss_(engine_); }

RngStream RngStream::substream(std::uint64_t index) const {
    std::uint64_t state = stream_id_ + 0x632be59bd9b4e019ULL;
    const std::uint64_t mixed = splitmix64(state) ^ (index * 0x9e3779b97f4a7c15ULL + 1);
    return RngStream(seed_ ^ 0xa0761d6478bd642fULL, mixed);
}

// ---------------------------------------------------------------------------

MeasurementStack::MeasurementStack(std::vector<RealImage> imgs, NoiseParams params, double irradiance)
    : images(std::move(imgs)), noise(params), rho(irradiance) {
    if (images.empty()) throw DimensionError("measurement stack must hold at least one image");
    for (const auto& img : images) require_same_shape(img, images.front(), "measurement stack");
    if (!(rho > 0.0)) throw DomainError("irradiance rho must be positive");
}

}  // namespace pls
