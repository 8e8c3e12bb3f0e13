#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"
#include "nlsel/grid.hpp"

namespace nlsel {

using cdouble = std::complex<double>;

/// Forward DFT result. Unnormalized convention: X[k] = sum_n x[n] e^{-2pi i nk/N};
/// the inverse divides by N. Float64 throughout so downstream calibration and
/// golden files are bit-stable.
struct ComplexSpectrum {
    std::vector<cdouble> bins;
    std::size_t size() const { return bins.size(); }
};

namespace detail {

inline void check_pow2(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw DataError("fft: length must be a power of two, got " + std::to_string(n));
}

/// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse.
/// Twiddles are computed per call; the transform has no shared state.
inline void fft_inplace(std::vector<cdouble>& a, int sign) {
    const std::size_t n = a.size();
    check_pow2(n);

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cdouble even = a[i + j];
                const cdouble odd = a[i + j + len / 2] * w;
                a[i + j] = even + odd;
                a[i + j + len / 2] = even - odd;
                w *= wlen;
            }
        }
    }
}

} // namespace detail

inline ComplexSpectrum fft(std::vector<cdouble> x) {
    detail::fft_inplace(x, -1);
    return ComplexSpectrum{std::move(x)};
}

inline ComplexSpectrum fft_real(const std::vector<double>& x) {
    std::vector<cdouble> a(x.begin(), x.end());
    return fft(std::move(a));
}

inline std::vector<cdouble> ifft(ComplexSpectrum spec) {
    detail::fft_inplace(spec.bins, +1);
    const double inv = 1.0 / static_cast<double>(spec.bins.size());
    for (auto& b : spec.bins) b *= inv;
    return std::move(spec.bins);
}

/// Elementwise modulus of the spectrum.
inline std::vector<double> amplitude(const ComplexSpectrum& spec) {
    std::vector<double> out(spec.bins.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(spec.bins[i]);
    return out;
}

/// Unit-modulus compensation vector e[n] = exp(-i * coeff * v_n^order).
///
/// The minus sign makes coeff = a2 cancel the positive-frequency component's
/// chirp exactly (the mirror component's chirp doubles).
inline std::vector<cdouble> compensation_exponent(const Grid& grid, int order, double coeff) {
    if (order != 2 && order != 3)
        throw DataError("compensation_exponent: order must be 2 or 3, got " +
                        std::to_string(order));
    if (!std::isfinite(coeff))
        throw DataError("compensation_exponent: coefficient must be finite");
    std::vector<cdouble> e(grid.n_samples);
    for (std::size_t n = 0; n < grid.n_samples; ++n) {
        const double vn = grid.v(n);
        const double arg = -coeff * (order == 2 ? vn * vn : vn * vn * vn);
        e[n] = cdouble(std::cos(arg), std::sin(arg));
    }
    return e;
}

/// Analytic signal via the FFT method: zero the negative-frequency half,
/// double bins 1..N/2-1, keep bins 0 and N/2 as-is. Real part of the result
/// reproduces the input.
inline std::vector<cdouble> analytic_signal(const std::vector<double>& x) {
    detail::check_pow2(x.size());
    auto spec = fft_real(x);
    const std::size_t n = x.size();
    for (std::size_t k = 1; k < n / 2; ++k) spec.bins[k] *= 2.0;
    for (std::size_t k = n / 2 + 1; k < n; ++k) spec.bins[k] = 0.0;
    return ifft(std::move(spec));
}

/// Phase samples in radians. `unwrapped` marks that consecutive differences
/// lie in (-pi, pi].
struct PhaseProfile {
    std::vector<double> phase;
    bool unwrapped = false;
};

/// Adds 2pi multiples so consecutive differences fall in (-pi, pi]; the first
/// element is left untouched. Idempotent.
inline PhaseProfile unwrap_phase(const PhaseProfile& p) {
    PhaseProfile out;
    out.phase.resize(p.phase.size());
    out.unwrapped = true;
    if (p.phase.empty()) return out;
    const double two_pi = 2.0 * std::numbers::pi;
    out.phase[0] = p.phase[0];
    for (std::size_t i = 1; i < p.phase.size(); ++i) {
        const double d = p.phase[i] - p.phase[i - 1];
        const double k = std::ceil((d - std::numbers::pi) / two_pi);
        out.phase[i] = out.phase[i - 1] + d - two_pi * k;
    }
    return out;
}

/// Unwrapped instantaneous phase of a complex signal.
inline PhaseProfile unwrapped_phase_of(const std::vector<cdouble>& z) {
    PhaseProfile p;
    p.phase.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) p.phase[i] = std::arg(z[i]);
    return unwrap_phase(p);
}

} // namespace nlsel
