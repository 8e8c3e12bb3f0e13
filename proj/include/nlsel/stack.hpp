#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"
#include "nlsel/io.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/spectral.hpp"

namespace nlsel {

/// The symmetric, equally spaced compensation coefficients C_0..C_{M-1}
/// (order 2) or D_0..D_{M-1} (order 3), in radians.
struct CoeffLadder {
    int order = 2;
    std::vector<double> values;

    static CoeffLadder make(int order, std::size_t m, double max_coeff) {
        if (order != 2 && order != 3)
            throw DataError("ladder: order must be 2 or 3, got " + std::to_string(order));
        if (m < 2) throw DataError("ladder: need at least 2 levels");
        if (!(max_coeff > 0.0)) throw DataError("ladder: max coefficient must be positive");
        CoeffLadder ladder;
        ladder.order = order;
        ladder.values.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            ladder.values[i] =
                max_coeff * (2.0 * static_cast<double>(i) / static_cast<double>(m - 1) - 1.0);
        return ladder;
    }

    double max_coeff() const { return values.empty() ? 0.0 : values.back(); }
    std::size_t size() const { return values.size(); }
};

/// M x N matrix of compensated FFT amplitudes; row m is
/// |FFT(signal * exp(-i * values[m] * v^order))|.
struct Stack {
    std::vector<double> rows; // row-major, size M * n_samples
    std::size_t m = 0;
    std::size_t n_samples = 0;
    CoeffLadder ladder;
    bool normalized = false;

    double at(std::size_t row, std::size_t col) const { return rows[row * n_samples + col]; }
    std::vector<double> row(std::size_t r) const {
        return {rows.begin() + static_cast<std::ptrdiff_t>(r * n_samples),
                rows.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_samples)};
    }

    void write_csv(const std::string& path) const { write_csv_matrix(path, rows, m, n_samples); }
};

inline Stack build_stack(const RawSignal& sig, const CoeffLadder& ladder) {
    if (sig.samples.size() != sig.grid.n_samples)
        throw DataError("build_stack: signal length does not match grid");
    Stack stack;
    stack.m = ladder.size();
    stack.n_samples = sig.grid.n_samples;
    stack.ladder = ladder;
    stack.rows.resize(stack.m * stack.n_samples);
    std::vector<cdouble> buf(stack.n_samples);
    for (std::size_t row = 0; row < stack.m; ++row) {
        const auto exponent = compensation_exponent(sig.grid, ladder.order, ladder.values[row]);
        for (std::size_t n = 0; n < stack.n_samples; ++n) buf[n] = sig.samples[n] * exponent[n];
        auto amp = amplitude(fft(buf));
        std::copy(amp.begin(), amp.end(), stack.rows.begin() + static_cast<std::ptrdiff_t>(row * stack.n_samples));
    }
    return stack;
}

/// Min-Max scaling with one global min/max over the whole input; output spans
/// [0, 1] exactly. Constant input is a degenerate range and an error.
inline std::vector<double> minmax_normalize(const std::vector<double>& values) {
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    if (!(*mx_it > *mn_it)) throw NumericError("minmax_normalize: degenerate range");
    const double mn = *mn_it;
    const double inv = 1.0 / (*mx_it - mn);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mn) * inv;
    return out;
}

inline void normalize_stack(Stack& stack) {
    stack.rows = minmax_normalize(stack.rows);
    stack.normalized = true;
}

} // namespace nlsel
