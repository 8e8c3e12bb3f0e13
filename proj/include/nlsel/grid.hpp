#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "nlsel/errors.hpp"

namespace nlsel {

/// Sampling grid for interferogram synthesis and its Fourier-domain views.
///
/// Sample n has the centered coordinate u_n = (n - N/2)/N in [-1/2, 1/2) and
/// the band coordinate v_n = 2*u_n in [-1, 1). Nonlinear phase coefficients
/// are expressed as radians at the band edge v = +-1, so they are directly
/// comparable across grid widths.
struct Grid {
    std::size_t n_samples = 1024;
    double envelope_sigma = 0.15;

    double u(std::size_t n) const {
        return (static_cast<double>(n) - static_cast<double>(n_samples) / 2.0) /
               static_cast<double>(n_samples);
    }
    double v(std::size_t n) const { return 2.0 * u(n); }

    /// Gaussian synthesis envelope, G(N/2) = 1.
    double envelope(std::size_t n) const {
        const double un = u(n);
        return std::exp(-un * un / (2.0 * envelope_sigma * envelope_sigma));
    }

    void validate() const {
        if (n_samples < 8 || (n_samples & (n_samples - 1)) != 0)
            throw DataError("grid: n_samples must be a power of two >= 8, got " +
                            std::to_string(n_samples));
        if (!(envelope_sigma > 0.0))
            throw DataError("grid: envelope_sigma must be positive");
    }

    bool operator==(const Grid& other) const = default;
};

/// Admissible band for interface peak positions: keeps positive-frequency
/// peaks away from DC and Nyquist.
inline double freq_min(const Grid&) { return 8.0; }
inline double freq_max(const Grid& grid) {
    return static_cast<double>(grid.n_samples) / 2.0 - 32.0;
}

} // namespace nlsel
