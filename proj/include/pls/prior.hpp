#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pls/image.hpp"
#include "pls/protocol.hpp"

namespace pls {

struct ZeroPrior {};

/// Mixture of atoms smoothed by signal-dependent Gaussian noise:
/// p(x) = sum_i w_i prod_p N(x_p; a_ip, sigma^2 a_ip).
struct DiscreteRealPrior {
    std::vector<RealImage> atoms;
    std::vector<double> weights;
};

/// Per-component noise variance used to smooth a complex mixture.
enum class ComplexNoiseConvention {
    quarter,  // Re and Im each N(0, sigma^2 / 4)
    full      // Re and Im each N(0, sigma^2)
};

struct DiscreteComplexPrior {
    std::vector<ComplexImage> atoms;
    std::vector<double> weights;
    ComplexNoiseConvention convention = ComplexNoiseConvention::quarter;
};

struct ExternalPrior {
    std::shared_ptr<protocol::ScoreClient> client;
};

inline constexpr std::size_t kMaxAtoms = 64;

/// Prior score evaluator. Analytic variants are exact; the external
/// variant forwards to a score server.
class ScoreProvider {
public:
    using Variant = std::variant<ZeroPrior, DiscreteRealPrior, DiscreteComplexPrior, ExternalPrior>;

    ScoreProvider() : variant_(ZeroPrior{}) {}
    ScoreProvider(ZeroPrior z) : variant_(z) {}
    /// Weights are normalized; an empty weight list means uniform.
    ScoreProvider(DiscreteRealPrior p);
    ScoreProvider(DiscreteComplexPrior p);
    ScoreProvider(ExternalPrior p);

    const Variant& variant() const noexcept { return variant_; }
    std::string describe() const;

private:
    Variant variant_;
};

RealImage score_real(const ScoreProvider& provider, const RealImage& x_tilde, double sigma);
ComplexImage score_complex(const ScoreProvider& provider, const ComplexImage& o_tilde, double sigma);

/// Posterior atom weights p(i | x_tilde) of a discrete prior at level sigma.
std::vector<double> atom_posterior(const DiscreteRealPrior& prior, const RealImage& x_tilde, double sigma);
std::vector<double> atom_posterior(const DiscreteComplexPrior& prior, const ComplexImage& o_tilde,
                                   double sigma);

/// Regression target (x - x') / (sigma^2 x) for a real denoiser.
RealImage train_target_real(const RealImage& x, const RealImage& x_noisy, double sigma);
/// Regression target (o - o') / sigma^2 for a complex denoiser.
ComplexImage train_target_complex(const ComplexImage& o, const ComplexImage& o_noisy, double sigma);

}  // namespace pls
