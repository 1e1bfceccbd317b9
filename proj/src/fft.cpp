#include "sjko/detail/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace sjko::detail {

namespace {
// the FFTW planner is not reentrant
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct RealFFT::Impl {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
};

RealFFT::RealFFT(int ny, int nx) : ny_(ny), nx_(nx), impl_(std::make_unique<Impl>()) {
    const std::size_t n = static_cast<std::size_t>(ny) * nx;
    const std::size_t m = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    impl_->real = fftw_alloc_real(n);
    impl_->spec = fftw_alloc_complex(m);
    std::lock_guard lock(planner_mutex());
    if (ny == 1) {
        impl_->fwd = fftw_plan_dft_r2c_1d(nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_dft_c2r_1d(nx, impl_->spec, impl_->real, FFTW_ESTIMATE);
    } else {
        impl_->fwd = fftw_plan_dft_r2c_2d(ny, nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_dft_c2r_2d(ny, nx, impl_->spec, impl_->real, FFTW_ESTIMATE);
    }
}

RealFFT::~RealFFT() = default;

void RealFFT::forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
    std::copy(in.begin(), in.end(), impl_->real);
    fftw_execute(impl_->fwd);
    out.resize(spectral_size());
    for (int k = 0; k < spectral_size(); ++k) out[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFFT::inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
    for (int k = 0; k < spectral_size(); ++k) {
        impl_->spec[k][0] = in[k].real();
        impl_->spec[k][1] = in[k].imag();
    }
    fftw_execute(impl_->bwd);  // destroys spec, which is a private copy
    out.assign(impl_->real, impl_->real + static_cast<std::size_t>(ny_) * nx_);
}

struct CosineTransform::Impl {
    double* a = nullptr;
    double* b = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(a);
        fftw_free(b);
    }
};

CosineTransform::CosineTransform(int ny, int nx) : ny_(ny), nx_(nx), impl_(std::make_unique<Impl>()) {
    const std::size_t n = static_cast<std::size_t>(ny) * nx;
    impl_->a = fftw_alloc_real(n);
    impl_->b = fftw_alloc_real(n);
    std::lock_guard lock(planner_mutex());
    if (ny == 1) {
        impl_->fwd = fftw_plan_r2r_1d(nx, impl_->a, impl_->b, FFTW_REDFT10, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_r2r_1d(nx, impl_->b, impl_->a, FFTW_REDFT01, FFTW_ESTIMATE);
    } else {
        impl_->fwd = fftw_plan_r2r_2d(ny, nx, impl_->a, impl_->b, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_r2r_2d(ny, nx, impl_->b, impl_->a, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
    }
}

CosineTransform::~CosineTransform() = default;

void CosineTransform::forward(const std::vector<double>& in, std::vector<double>& out) {
    std::copy(in.begin(), in.end(), impl_->a);
    fftw_execute(impl_->fwd);
    out.assign(impl_->b, impl_->b + in.size());
}

void CosineTransform::inverse(const std::vector<double>& in, std::vector<double>& out) {
    std::copy(in.begin(), in.end(), impl_->b);
    fftw_execute(impl_->bwd);
    out.assign(impl_->a, impl_->a + in.size());
}

double CosineTransform::round_trip_scale() const {
    return ny_ == 1 ? 2.0 * nx_ : 4.0 * nx_ * ny_;
}

double wavenumber(int index, int n, double L) {
    if (n % 2 == 0 && index == n / 2) return 0.0;
    const int m = index <= n / 2 ? index : index - n;
    return 2.0 * std::numbers::pi * m / L;
}

}  // namespace sjko::detail
