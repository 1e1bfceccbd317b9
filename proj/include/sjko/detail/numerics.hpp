#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sjko::detail {

// Pairwise summation: result does not depend on anything but the input order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v));
}

// Catmull-Rom weights for the stencil {-1, 0, 1, 2} at fractional offset t.
inline std::array<double, 4> cubic_weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {(-t3 + 2 * t2 - t) * 0.5, (3 * t3 - 5 * t2 + 2) * 0.5,
            (-3 * t3 + 4 * t2 + t) * 0.5, (t3 - t2) * 0.5};
}

// Lagrange weights for the stencil {-2, ..., 3} at fractional offset t.
inline std::array<double, 6> quintic_weights(double t) {
    std::array<double, 6> w{};
    for (int j = 0; j < 6; ++j) {
        double num = 1.0, den = 1.0;
        const double xj = j - 2;
        for (int k = 0; k < 6; ++k) {
            if (k == j) continue;
            const double xk = k - 2;
            num *= (t - xk);
            den *= (xj - xk);
        }
        w[j] = num / den;
    }
    return w;
}

// Index mapping used by stencils: wrap for periodic axes, even reflection
// about the wall otherwise (matches a zero-flux boundary).
inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i = wrap_index(i, period);
    return i < n ? i : period - 1 - i;
}

// Gauss-Legendre nodes/weights on [0, 1].
template <int N>
struct GaussLegendre;

template <>
struct GaussLegendre<4> {
    static constexpr std::array<double, 4> nodes{
        0.5 - 0.4305681557970262, 0.5 - 0.1699905217924281,
        0.5 + 0.1699905217924281, 0.5 + 0.4305681557970262};
    static constexpr std::array<double, 4> weights{
        0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
        0.1739274225687269};
};

template <>
struct GaussLegendre<5> {
    static constexpr std::array<double, 5> nodes{
        0.5 - 0.4530899229693320, 0.5 - 0.2692346550528415, 0.5,
        0.5 + 0.2692346550528415, 0.5 + 0.4530899229693320};
    static constexpr std::array<double, 5> weights{
        0.1184634425280945, 0.2393143352496832, 0.2844444444444444,
        0.2393143352496832, 0.1184634425280945};
};

}  // namespace sjko::detail
