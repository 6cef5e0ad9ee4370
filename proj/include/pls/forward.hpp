#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "pls/image.hpp"

namespace pls {

/// Hard binary bandpass disk in FFT-native frequency order (DC at [0,0]).
/// mask[k] == 1 iff |k - center| <= radius, with k the signed frequency.
struct PupilMask {
    long center_kx = 0;
    long center_ky = 0;
    double radius = 0.0;
    RealImage mask;

    static PupilMask disk(std::size_t height, std::size_t width, long center_kx, long center_ky,
                          double radius);
    /// Every frequency passes.
    static PupilMask all_pass(std::size_t height, std::size_t width);
    /// Adopt an existing binary mask; center and radius are estimated from
    /// the mask's centroid and area.
    static PupilMask from_mask(RealImage mask);
};

struct IdentityModel {};

/// Oversampled Fourier magnitude: the object is zero-padded to
/// (pad_factor*H) x (pad_factor*W), anchored at the top-left corner, then
/// transformed. rho scales the measured intensity.
struct FourierMagnitudeModel {
    std::size_t pad_factor = 2;
    double rho = 1.0;
};

struct PtychographyModel {
    std::vector<PupilMask> pupils;
    double rho = 1.0;
};

/// The linear part H of the measurement y = N(|H o|^2).
class ForwardModel {
public:
    using Variant = std::variant<IdentityModel, FourierMagnitudeModel, PtychographyModel>;

    ForwardModel() : variant_(IdentityModel{}) {}
    ForwardModel(IdentityModel m) : variant_(m) {}
    ForwardModel(FourierMagnitudeModel m);
    ForwardModel(PtychographyModel m);

    const Variant& variant() const noexcept { return variant_; }
    bool is_identity() const noexcept { return std::holds_alternative<IdentityModel>(variant_); }
    bool is_fourier() const noexcept { return std::holds_alternative<FourierMagnitudeModel>(variant_); }
    bool is_ptychography() const noexcept {
        return std::holds_alternative<PtychographyModel>(variant_);
    }

    /// Number of measurement images M.
    std::size_t measurement_count() const noexcept;
    /// Shape of each measurement image for an object of the given shape.
    std::pair<std::size_t, std::size_t> measurement_shape(std::size_t height, std::size_t width) const;
    double rho() const noexcept;
    const char* name() const noexcept;

private:
    Variant variant_;
};

/// Fields u_m = H_m o.
std::vector<ComplexImage> apply(const ForwardModel& model, const ComplexImage& o);

/// H^H applied to a stack of measurement-domain fields. For the Fourier
/// model the object shape is the field shape divided by pad_factor.
ComplexImage adjoint(const ForwardModel& model, const std::vector<ComplexImage>& fields);

/// Noiseless intensities |u_m|^2.
std::vector<RealImage> intensity(const ForwardModel& model, const ComplexImage& o);

/// The m_count integer lattice points nearest the origin, scaled by
/// spacing. Ties are broken by angle in [0, 2pi), then lexicographically.
std::vector<std::pair<long, long>> build_led_grid(std::size_t m_count, double spacing);

/// Ptychography model with one disk pupil per LED grid point.
PtychographyModel make_ptychography(std::size_t height, std::size_t width, std::size_t m_count,
                                    double spacing, double pupil_radius, double rho);

ComplexImage zero_pad(const ComplexImage& o, std::size_t height, std::size_t width);
ComplexImage crop(const ComplexImage& o, std::size_t height, std::size_t width);

}  // namespace pls
