#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace sjko::detail {

// Thin owners of FFTW plans. Arrays are row-major with x fastest, ny = 1 in 1D.
// Transforms are unnormalized, as in FFTW.
class RealFFT {
public:
    RealFFT(int ny, int nx);
    ~RealFFT();
    RealFFT(const RealFFT&) = delete;
    RealFFT& operator=(const RealFFT&) = delete;

    int spectral_size() const { return ny_ * (nx_ / 2 + 1); }
    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out);
    void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out);

private:
    int ny_, nx_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Cosine transform pair (REDFT10 forward, REDFT01 back); the round trip
// multiplies by (2 nx)(2 ny) in 2D and 2 nx in 1D.
class CosineTransform {
public:
    CosineTransform(int ny, int nx);
    ~CosineTransform();
    CosineTransform(const CosineTransform&) = delete;
    CosineTransform& operator=(const CosineTransform&) = delete;

    void forward(const std::vector<double>& in, std::vector<double>& out);
    void inverse(const std::vector<double>& in, std::vector<double>& out);
    double round_trip_scale() const;

private:
    int ny_, nx_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Angular wavenumber of the r2c/c2c index along an axis of n points and
// length L, with the Nyquist mode mapped to zero.
double wavenumber(int index, int n, double L);

}  // namespace sjko::detail
