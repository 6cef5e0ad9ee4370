#include "pls/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pls {

namespace {

std::vector<double> normalized_weights(std::vector<double> w, std::size_t n) {
    if (n == 0) throw ConfigError("discrete prior needs at least one atom");
    if (n > kMaxAtoms) throw ConfigError("discrete prior supports at most 64 atoms");
    if (w.empty()) w.assign(n, 1.0);
    if (w.size() != n) throw ConfigError("discrete prior: weight count does not match atom count");
    double total = 0.0;
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("discrete prior weights must be positive");
        total += v;
    }
    for (double& v : w) v /= total;
    return w;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

double component_variance(ComplexNoiseConvention c, double sigma) {
    return c == ComplexNoiseConvention::quarter ? 0.25 * sigma * sigma : sigma * sigma;
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("prior score needs sigma > 0");
}

std::vector<float> to_floats(const RealImage& x) {
    std::vector<float> v(x.size());
    std::transform(x.begin(), x.end(), v.begin(), [](double d) { return static_cast<float>(d); });
    return v;
}

std::vector<float> to_floats(const ComplexImage& o) {
    std::vector<float> v(2 * o.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
        v[2 * i] = static_cast<float>(o[i].real());
        v[2 * i + 1] = static_cast<float>(o[i].imag());
    }
    return v;
}

}  // namespace

ScoreProvider::ScoreProvider(DiscreteRealPrior p) {
    p.weights = normalized_weights(std::move(p.weights), p.atoms.size());
    for (const auto& a : p.atoms) {
        require_same_shape(a, p.atoms.front(), "discrete prior atoms");
        for (double v : a) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("discrete real prior: atom pixel must be > 0 (degenerate variance sigma^2 x)");
            }
        }
    }
    variant_ = std::move(p);
}

ScoreProvider::ScoreProvider(DiscreteComplexPrior p) {
    p.weights = normalized_weights(std::move(p.weights), p.atoms.size());
    for (const auto& a : p.atoms) {
        require_same_shape(a, p.atoms.front(), "discrete prior atoms");
        if (!a.all_finite()) throw DomainError("discrete complex prior: non-finite atom");
    }
    variant_ = std::move(p);
}

ScoreProvider::ScoreProvider(ExternalPrior p) {
    if (!p.client) throw ConfigError("external prior needs a connected client");
    variant_ = std::move(p);
}

std::string ScoreProvider::describe() const {
    return std::visit(
        [](const auto& p) -> std::string {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroPrior>) {
                return "zero";
            } else if constexpr (std::is_same_v<P, ExternalPrior>) {
                return "external:" + p.client->endpoint();
            } else {
                return "discrete(" + std::to_string(p.atoms.size()) + " atoms)";
            }
        },
        variant_);
}

std::vector<double> atom_posterior(const DiscreteRealPrior& prior, const RealImage& x_tilde, double sigma) {
    check_sigma(sigma);
    const auto w = normalized_weights(prior.weights, prior.atoms.size());
    const double s2 = sigma * sigma;
    std::vector<double> logits(prior.atoms.size());
    for (std::size_t i = 0; i < prior.atoms.size(); ++i) {
        const RealImage& a = prior.atoms[i];
        require_same_shape(a, x_tilde, "score_real");
        double ll = std::log(w[i]);
        for (std::size_t p = 0; p < a.size(); ++p) {
            const double var = s2 * a[p];
            const double d = x_tilde[p] - a[p];
            ll -= 0.5 * std::log(2.0 * std::numbers::pi * var) + d * d / (2.0 * var);
        }
        logits[i] = ll;
    }
    return softmax(logits);
}

std::vector<double> atom_posterior(const DiscreteComplexPrior& prior, const ComplexImage& o_tilde,
                                   double sigma) {
    check_sigma(sigma);
    const auto w = normalized_weights(prior.weights, prior.atoms.size());
    const double var = component_variance(prior.convention, sigma);
    std::vector<double> logits(prior.atoms.size());
    for (std::size_t i = 0; i < prior.atoms.size(); ++i) {
        const ComplexImage& a = prior.atoms[i];
        require_same_shape(a, o_tilde, "score_complex");
        double ll = std::log(w[i]);
        // the per-pixel normalizer is common to all atoms and cancels
        for (std::size_t p = 0; p < a.size(); ++p) ll -= std::norm(o_tilde[p] - a[p]) / (2.0 * var);
        logits[i] = ll;
    }
    return softmax(logits);
}

RealImage score_real(const ScoreProvider& provider, const RealImage& x_tilde, double sigma) {
    check_sigma(sigma);
    return std::visit(
        [&](const auto& p) -> RealImage {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroPrior>) {
                return RealImage(x_tilde.height(), x_tilde.width(), 0.0);
            } else if constexpr (std::is_same_v<P, DiscreteRealPrior>) {
                const auto post = atom_posterior(p, x_tilde, sigma);
                const double s2 = sigma * sigma;
                RealImage out(x_tilde.height(), x_tilde.width(), 0.0);
                for (std::size_t i = 0; i < p.atoms.size(); ++i) {
                    if (post[i] == 0.0) continue;
                    const RealImage& a = p.atoms[i];
                    for (std::size_t q = 0; q < out.size(); ++q) out[q] += post[i] * (a[q] - x_tilde[q]) / (s2 * a[q]);
                }
                return out;
            } else if constexpr (std::is_same_v<P, ExternalPrior>) {
                auto v = p.client->request(static_cast<std::uint32_t>(x_tilde.height()),
                                           static_cast<std::uint32_t>(x_tilde.width()), sigma, false,
                                           to_floats(x_tilde));
                RealImage out(x_tilde.height(), x_tilde.width());
                std::copy(v.begin(), v.end(), out.begin());
                return out;
            } else {
                throw ConfigError("score_real: a complex prior cannot score a real image");
            }
        },
        provider.variant());
}

ComplexImage score_complex(const ScoreProvider& provider, const ComplexImage& o_tilde, double sigma) {
    check_sigma(sigma);
    return std::visit(
        [&](const auto& p) -> ComplexImage {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroPrior>) {
                return ComplexImage(o_tilde.height(), o_tilde.width());
            } else if constexpr (std::is_same_v<P, DiscreteComplexPrior>) {
                const auto post = atom_posterior(p, o_tilde, sigma);
                const double var = component_variance(p.convention, sigma);
                ComplexImage out(o_tilde.height(), o_tilde.width());
                for (std::size_t i = 0; i < p.atoms.size(); ++i) {
                    if (post[i] == 0.0) continue;
                    const ComplexImage& a = p.atoms[i];
                    for (std::size_t q = 0; q < out.size(); ++q) out[q] += post[i] * (a[q] - o_tilde[q]) / var;
                }
                return out;
            } else if constexpr (std::is_same_v<P, ExternalPrior>) {
                auto v = p.client->request(static_cast<std::uint32_t>(o_tilde.height()),
                                           static_cast<std::uint32_t>(o_tilde.width()), sigma, true,
                                           to_floats(o_tilde));
                ComplexImage out(o_tilde.height(), o_tilde.width());
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(v[2 * i], v[2 * i + 1]);
                return out;
            } else {
                throw ConfigError("score_complex: a real prior cannot score a complex image");
            }
        },
        provider.variant());
}

RealImage train_target_real(const RealImage& x, const RealImage& x_noisy, double sigma) {
    require_same_shape(x, x_noisy, "train_target_real");
    check_sigma(sigma);
    RealImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw DomainError("train_target_real: clean pixel must be > 0");
        out[i] = (x[i] - x_noisy[i]) / (sigma * sigma * x[i]);
    }
    return out;
}

ComplexImage train_target_complex(const ComplexImage& o, const ComplexImage& o_noisy, double sigma) {
    require_same_shape(o, o_noisy, "train_target_complex");
    check_sigma(sigma);
    ComplexImage out(o.height(), o.width());
    for (std::size_t i = 0; i < o.size(); ++i) out[i] = (o[i] - o_noisy[i]) / (sigma * sigma);
    return out;
}

}  // namespace pls
