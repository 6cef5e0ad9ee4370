#include "pls/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "pls/fft.hpp"

namespace pls {

PupilMask PupilMask::disk(std::size_t height, std::size_t width, long center_kx, long center_ky,
                          double radius) {
    if (!(radius > 0.0)) throw DomainError("pupil radius must be positive");
    PupilMask p{center_kx, center_ky, radius, RealImage(height, width, 0.0)};
    bool any = false;
    for (std::size_t r = 0; r < height; ++r) {
        const double dy = static_cast<double>(signed_frequency(r, height) - center_ky);
        for (std::size_t c = 0; c < width; ++c) {
            const double dx = static_cast<double>(signed_frequency(c, width) - center_kx);
            if (dx * dx + dy * dy <= radius * radius) {
                p.mask(r, c) = 1.0;
                any = true;
            }
        }
    }
    if (!any) throw DomainError("pupil disk does not intersect the frequency grid");
    return p;
}

PupilMask PupilMask::all_pass(std::size_t height, std::size_t width) {
    const double diag = std::hypot(static_cast<double>(height), static_cast<double>(width));
    return PupilMask{0, 0, diag, RealImage(height, width, 1.0)};
}

PupilMask PupilMask::from_mask(RealImage mask) {
    double sx = 0.0, sy = 0.0, n = 0.0;
    for (std::size_t r = 0; r < mask.height(); ++r) {
        for (std::size_t c = 0; c < mask.width(); ++c) {
            const double v = mask(r, c);
            if (v != 0.0 && v != 1.0) throw DomainError("pupil mask entries must be 0 or 1");
            if (v == 1.0) {
                sx += static_cast<double>(signed_frequency(c, mask.width()));
                sy += static_cast<double>(signed_frequency(r, mask.height()));
                n += 1.0;
            }
        }
    }
    if (n == 0.0) throw DomainError("pupil mask has no passing frequency");
    return PupilMask{std::lround(sx / n), std::lround(sy / n), std::sqrt(n / std::numbers::pi),
                     std::move(mask)};
}

ForwardModel::ForwardModel(FourierMagnitudeModel m) : variant_(m) {
    if (m.pad_factor < 1) throw ConfigError("pad_factor must be >= 1");
    if (!(m.rho > 0.0)) throw ConfigError("rho must be positive");
}

ForwardModel::ForwardModel(PtychographyModel m) {
    if (m.pupils.empty()) throw ConfigError("ptychography needs at least one pupil");
    if (!(m.rho > 0.0)) throw ConfigError("rho must be positive");
    for (const auto& p : m.pupils) require_same_shape(p.mask, m.pupils.front().mask, "pupil set");
    variant_ = std::move(m);
}

std::size_t ForwardModel::measurement_count() const noexcept {
    if (const auto* p = std::get_if<PtychographyModel>(&variant_)) return p->pupils.size();
    return 1;
}

std::pair<std::size_t, std::size_t> ForwardModel::measurement_shape(std::size_t height,
                                                                    std::size_t width) const {
    if (const auto* f = std::get_if<FourierMagnitudeModel>(&variant_)) {
        return {height * f->pad_factor, width * f->pad_factor};
    }
    return {height, width};
}

double ForwardModel::rho() const noexcept {
    if (const auto* f = std::get_if<FourierMagnitudeModel>(&variant_)) return f->rho;
    if (const auto* p = std::get_if<PtychographyModel>(&variant_)) return p->rho;
    return 1.0;
}

const char* ForwardModel::name() const noexcept {
    if (is_fourier()) return "fourier";
    if (is_ptychography()) return "ptychography";
    return "identity";
}

ComplexImage zero_pad(const ComplexImage& o, std::size_t height, std::size_t width) {
    if (height < o.height() || width < o.width()) throw DimensionError("zero_pad: target smaller than input");
    ComplexImage out(height, width);
    for (std::size_t r = 0; r < o.height(); ++r) {
        std::copy_n(&o(r, 0), o.width(), &out(r, 0));
    }
    return out;
}

ComplexImage crop(const ComplexImage& o, std::size_t height, std::size_t width) {
    if (height > o.height() || width > o.width()) throw DimensionError("crop: target larger than input");
    ComplexImage out(height, width);
    for (std::size_t r = 0; r < height; ++r) {
        std::copy_n(&o(r, 0), width, &out(r, 0));
    }
    return out;
}

namespace {

void check_pupil_shape(const PtychographyModel& p, const ComplexImage& img) {
    require_same_shape(p.pupils.front().mask, img, "ptychography pupil vs object");
}

bool passes_everything(const RealImage& mask) {
    for (double v : mask) {
        if (v != 1.0) return false;
    }
    return true;
}

ComplexImage scaled(const ComplexImage& o, double gain) {
    ComplexImage out = o;
    if (gain != 1.0) {
        for (auto& v : out) v *= gain;
    }
    return out;
}

ComplexImage bandpass(const ComplexImage& spectrum, const RealImage& mask, double gain) {
    ComplexImage out(spectrum.height(), spectrum.width());
    for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i] * (mask[i] * gain);
    return out;
}

}  // namespace

std::vector<ComplexImage> apply(const ForwardModel& model, const ComplexImage& o) {
    return std::visit(
        [&](const auto& m) -> std::vector<ComplexImage> {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, IdentityModel>) {
                return {o};
            } else if constexpr (std::is_same_v<M, FourierMagnitudeModel>) {
                ComplexImage u = fft2_unitary(zero_pad(o, o.height() * m.pad_factor, o.width() * m.pad_factor));
                if (m.rho != 1.0) {
                    const double g = std::sqrt(m.rho);
                    for (auto& v : u) v *= g;
                }
                return {std::move(u)};
            } else {
                check_pupil_shape(m, o);
                const ComplexImage spectrum = fft2_unitary(o);
                const double g = std::sqrt(m.rho);
                std::vector<ComplexImage> fields;
                fields.reserve(m.pupils.size());
                for (const auto& pupil : m.pupils) {
                    // an all-pass pupil is the identity; skip the round trip
                    if (passes_everything(pupil.mask)) {
                        fields.push_back(scaled(o, g));
                    } else {
                        fields.push_back(ifft2_unitary(bandpass(spectrum, pupil.mask, g)));
                    }
                }
                return fields;
            }
        },
        model.variant());
}

ComplexImage adjoint(const ForwardModel& model, const std::vector<ComplexImage>& fields) {
    if (fields.size() != model.measurement_count()) {
        throw DimensionError("adjoint: expected " + std::to_string(model.measurement_count()) +
                             " fields, got " + std::to_string(fields.size()));
    }
    return std::visit(
        [&](const auto& m) -> ComplexImage {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, IdentityModel>) {
                return fields.front();
            } else if constexpr (std::is_same_v<M, FourierMagnitudeModel>) {
                const auto& f = fields.front();
                if (f.height() % m.pad_factor != 0 || f.width() % m.pad_factor != 0) {
                    throw DimensionError("adjoint: field shape not divisible by pad_factor");
                }
                ComplexImage o = crop(ifft2_unitary(f), f.height() / m.pad_factor, f.width() / m.pad_factor);
                if (m.rho != 1.0) {
                    const double g = std::sqrt(m.rho);
                    for (auto& v : o) v *= g;
                }
                return o;
            } else {
                const double g = std::sqrt(m.rho);
                // accumulate in the frequency domain: sum_m P_m . F u_m, one inverse FFT
                ComplexImage acc(fields.front().height(), fields.front().width());
                ComplexImage direct(fields.front().height(), fields.front().width());
                bool any_filtered = false;
                for (std::size_t k = 0; k < fields.size(); ++k) {
                    check_pupil_shape(m, fields[k]);
                    if (passes_everything(m.pupils[k].mask)) {
                        for (std::size_t i = 0; i < direct.size(); ++i) direct[i] += fields[k][i];
                        continue;
                    }
                    any_filtered = true;
                    const ComplexImage spec = fft2_unitary(fields[k]);
                    const RealImage& mask = m.pupils[k].mask;
                    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += spec[i] * mask[i];
                }
                ComplexImage o = any_filtered ? ifft2_unitary(acc) : ComplexImage(acc.height(), acc.width());
                for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] + direct[i]) * g;
                return o;
            }
        },
        model.variant());
}

std::vector<RealImage> intensity(const ForwardModel& model, const ComplexImage& o) {
    std::vector<RealImage> out;
    for (const auto& u : apply(model, o)) out.push_back(squared_magnitude(u));
    return out;
}

std::vector<std::pair<long, long>> build_led_grid(std::size_t m_count, double spacing) {
    if (m_count < 1) throw DomainError("LED count must be >= 1");
    if (!(spacing > 0.0)) throw DomainError("LED spacing must be positive");
    // every point of the result lies within this radius (lattice area bound)
    const long reach = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(m_count) / std::numbers::pi))) + 2;
    struct Point {
        long r2;
        double angle;
        long i, j;
    };
    std::vector<Point> pts;
    for (long i = -reach; i <= reach; ++i) {
        for (long j = -reach; j <= reach; ++j) {
            double a = std::atan2(static_cast<double>(j), static_cast<double>(i));
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            pts.push_back({i * i + j * j, a, i, j});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return std::tie(a.r2, a.angle, a.i, a.j) < std::tie(b.r2, b.angle, b.i, b.j);
    });
    std::vector<std::pair<long, long>> out;
    out.reserve(m_count);
    for (std::size_t k = 0; k < m_count; ++k) {
        out.emplace_back(std::lround(pts[k].i * spacing), std::lround(pts[k].j * spacing));
    }
    return out;
}

PtychographyModel make_ptychography(std::size_t height, std::size_t width, std::size_t m_count,
                                    double spacing, double pupil_radius, double rho) {
    PtychographyModel model;
    model.rho = rho;
    for (const auto& [kx, ky] : build_led_grid(m_count, spacing)) {
        model.pupils.push_back(PupilMask::disk(height, width, kx, ky, pupil_radius));
    }
    return model;
}

}  // namespace pls
