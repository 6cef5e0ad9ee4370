#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pls {

enum class ScheduleKind { geometric, linear };

/// Annealing levels sigma_1 >= ... >= sigma_T below the measurement level
/// sigma_0, plus the step-size scale eps. Construction validates
/// sigma_0 > sigma_1 and sigma_T > 0, so sigma_0^2 - sigma_t^2 > 0 for
/// every level.
class SigmaSchedule {
public:
    SigmaSchedule(double sigma0, std::vector<double> sigmas, double eps);

    double sigma0() const noexcept { return sigma0_; }
    double eps() const noexcept { return eps_; }
    std::size_t size() const noexcept { return sigmas_.size(); }
    const std::vector<double>& sigmas() const noexcept { return sigmas_; }

    /// 1-based level access, matching the iteration index of the sampler.
    double sigma(std::size_t t) const;
    double last() const noexcept { return sigmas_.back(); }

    SigmaSchedule with_eps(double eps) const { return SigmaSchedule(sigma0_, sigmas_, eps); }

private:
    double sigma0_;
    std::vector<double> sigmas_;
    double eps_;
};

inline constexpr double kDefaultEps = 2e-5;

// kDefaultEps is tuned for sigma_T = 0.01 and unit-variance score curvature.
// The annealed scores here have curvature ~1/(sigma_T^2 x) (real) and
// ~4/sigma_T^2 (complex, quarter convention), so the stable step scales
// with sigma_T^2. These are the multipliers used when eps is not given.
inline constexpr double kRealStepScale = 2e-3;
inline constexpr double kComplexStepScale = 0.2;

/// eps = scale * sigma_T^2.
double scaled_eps(double sigma_t_last, double scale);

SigmaSchedule make_schedule(double sigma0, double sigma1, double sigmaT, std::size_t t_count,
                            ScheduleKind kind, double eps = kDefaultEps);

/// Geometric schedule with sigma_1 = 0.9 sigma_0, sigma_T = 0.01 sigma_0.
SigmaSchedule default_schedule(double sigma0, std::size_t t_count = 1000, double eps = kDefaultEps);

/// alpha_t = eps * sigma_t^2 / sigma_T^2 for 1 <= t <= T.
double step_size(const SigmaSchedule& schedule, std::size_t t);

ScheduleKind parse_schedule_kind(const std::string& name);

}  // namespace pls
