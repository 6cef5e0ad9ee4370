#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "pls/forward.hpp"
#include "pls/hio.hpp"
#include "pls/image.hpp"
#include "pls/measurement.hpp"
#include "pls/prior.hpp"
#include "pls/rng.hpp"
#include "pls/schedule.hpp"

namespace pls {

struct InitFromMeasurement {};
struct InitNoisyHio {
    double noise_scale = 1.0;
    HioConfig hio;
    /// Shared HIO result; when set only the noise is drawn per run, so an
    /// ensemble pays for HIO once.
    std::shared_ptr<const HioResult> solved;
};
struct InitAdjoint {};
struct InitProvided {
    std::variant<RealImage, ComplexImage> image;
};

using InitMode = std::variant<InitFromMeasurement, InitNoisyHio, InitAdjoint, InitProvided>;

struct SamplerConfig {
    SigmaSchedule schedule;
    std::size_t steps_per_level = 1;
    double clamp_floor = 1e-4;
    InitMode init = InitFromMeasurement{};
    bool record_trajectory = false;

    explicit SamplerConfig(SigmaSchedule s) : schedule(std::move(s)) {}
    void validate() const;
};

/// Optional side outputs of a run.
template <typename Image>
struct SamplerTrace {
    std::vector<Image> trajectory;     // one iterate per level when recording
    std::vector<double> update_norms;  // per level, mean of ||alpha_t Delta_t||_2
    std::size_t clamped = 0;           // real branch: pixels lifted to the floor
    std::optional<double> hio_residual;
};

/// Annealed Langevin sampling of p(x | y) for Poisson-noisy real intensities.
RealImage run_real(const RealImage& y, const ScoreProvider& provider, const SamplerConfig& cfg, RngStream& rng,
                   SamplerTrace<RealImage>* trace = nullptr);

/// Annealed Langevin sampling of p(o | y) for complex objects behind an
/// intensity-only forward model.
ComplexImage run_complex(const MeasurementStack& stack, const ForwardModel& model, const ScoreProvider& provider,
                         const SamplerConfig& cfg, RngStream& rng, SamplerTrace<ComplexImage>* trace = nullptr);

struct InitState {
    ComplexImage image;
    std::optional<double> hio_residual;
};

/// Starting point of the complex sampler.
InitState init_state(const SamplerConfig& cfg, const MeasurementStack& stack, const ForwardModel& model,
                     RngStream& rng);
/// Substream of a run's stream that feeds the HIO initializer.
inline constexpr std::uint64_t kHioStream = 0x4849;

/// HIO on sqrt(y_1 / rho) with the box support of the unpadded object.
HioResult hio_initializer(const MeasurementStack& stack, const ForwardModel& model, const HioConfig& hio,
                          RngStream& rng);
/// Starting point of the real sampler.
RealImage init_state_real(const SamplerConfig& cfg, const RealImage& y);

/// Per-pixel statistics over independent runs. For real runs the
/// amplitude is the value itself and phase fields stay empty.
template <typename Image>
struct Ensemble {
    RealImage mean;      // amplitude mean
    RealImage variance;  // amplitude variance, unbiased
    std::optional<RealImage> phase_mean;      // circular mean (complex only)
    std::optional<RealImage> phase_variance;  // wrapped deviation variance, unbiased
    std::vector<Image> samples;
};

/// Runs `run` with streams (seed, 0) ... (seed, n_runs - 1) on up to `jobs`
/// threads. Results do not depend on `jobs`.
Ensemble<RealImage> ensemble_real(std::uint64_t seed, const std::function<RealImage(RngStream&)>& run,
                                  std::size_t n_runs, std::size_t jobs = 1);
Ensemble<ComplexImage> ensemble_complex(std::uint64_t seed, const std::function<ComplexImage(RngStream&)>& run,
                                        std::size_t n_runs, std::size_t jobs = 1);

/// Streaming mean / M2 accumulator; merge() is the pairwise (Chan et al.)
/// combination, so partial results can be reduced in any grouping.
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    MomentAccumulator(std::size_t height, std::size_t width);

    void add(const RealImage& sample);
    void merge(const MomentAccumulator& other);

    std::size_t count() const noexcept { return count_; }
    const RealImage& mean() const noexcept { return mean_; }
    RealImage variance() const;

private:
    std::size_t count_ = 0;
    RealImage mean_;
    RealImage m2_;
};

}  // namespace pls
