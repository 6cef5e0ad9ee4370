#include "pls/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pls {

namespace {

// FFTW's planner is not thread-safe; plans are created once per shape under a
// lock and then executed through the new-array interface, which is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t h, std::size_t w, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(h, w, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        auto* in = fftw_alloc_complex(h * w);
        auto* out = fftw_alloc_complex(h * w);
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in, out, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

ComplexImage transform(const ComplexImage& img, int sign) {
    ComplexImage out(img.height(), img.width());
    fftw_plan plan = PlanCache::instance().get(img.height(), img.width(), sign);
    // FFTW never writes its input for out-of-place complex transforms
    auto* in = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(img.values().data()));
    fftw_execute_dft(plan, in, reinterpret_cast<fftw_complex*>(out.values().data()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(img.size()));
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace

ComplexImage fft2_unitary(const ComplexImage& img) { return transform(img, FFTW_FORWARD); }

ComplexImage ifft2_unitary(const ComplexImage& img) { return transform(img, FFTW_BACKWARD); }

long signed_frequency(std::size_t i, std::size_t n) noexcept {
    const long li = static_cast<long>(i);
    const long ln = static_cast<long>(n);
    return li < (ln + 1) / 2 ? li : li - ln;
}

}  // namespace pls
