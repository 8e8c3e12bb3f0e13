#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsel/errors.hpp"
#include "nlsel/interp.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/spectral.hpp"

namespace nlsel {

/// Classical two-mirror calibration: a spectrometer resampling map plus a
/// residual interferometer dispersion phase. Accuracy claims exclude a
/// 16-pixel guard band at each end.
struct CalibrationMap {
    std::vector<double> resample_positions; // fractional source index per output sample
    std::vector<double> residual_phase;     // radians, subtracted after resampling

    static constexpr std::size_t guard = 16;

    std::size_t size() const { return resample_positions.size(); }

    void save(const std::string& path) const {
        nlohmann::json j{{"resample_positions", resample_positions},
                         {"residual_phase", residual_phase}};
        std::ofstream out(path);
        if (!out) throw DataError("cannot open for writing: " + path);
        out << j.dump() << '\n';
    }

    static CalibrationMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("calibration JSON parse error: " + std::string(e.what()));
        }
        CalibrationMap map;
        try {
            map.resample_positions = j.at("resample_positions").get<std::vector<double>>();
            map.residual_phase = j.at("residual_phase").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("calibration JSON: " + std::string(e.what()));
        }
        if (map.resample_positions.size() != map.residual_phase.size())
            throw DataError("calibration JSON: array length mismatch");
        return map;
    }
};

namespace detail {

/// Centered moving average, window shrinking at the ends.
inline std::vector<double> smooth5(const std::vector<double>& x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - 2);
        const std::ptrdiff_t hi = std::min(n - 1, i + 2);
        double acc = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += x[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

/// Least-squares line a + b*k over [guard, n-guard).
inline std::pair<double, double> fit_line(const std::vector<double>& y, std::size_t guard) {
    const std::size_t n = y.size();
    double sk = 0, sy = 0, skk = 0, sky = 0, cnt = 0;
    for (std::size_t k = guard; k + guard < n; ++k) {
        const double kk = static_cast<double>(k);
        sk += kk;
        sy += y[k];
        skk += kk * kk;
        sky += kk * y[k];
        cnt += 1;
    }
    const double denom = cnt * skk - sk * sk;
    const double b = (cnt * sky - sk * sy) / denom;
    const double a = (sy - b * sk) / cnt;
    return {a, b};
}

} // namespace detail

/// Builds the calibration from two mirror signals at distinct depths.
///
/// The unwrapped analytic phases are subtracted; the difference is
/// proportional to the true wavenumber coordinate, so inverting it onto a
/// uniform grid yields the spectrometer resampling map. The first signal,
/// resampled, then gives the depth-independent residual dispersion phase
/// (its best-fit line removed: linear phase is depth, not distortion).
inline CalibrationMap calibrate(const RawSignal& sig1, const RawSignal& sig2) {
    if (sig1.grid != sig2.grid) throw DataError("calibrate: grids differ");
    sig1.grid.validate();
    const std::size_t n = sig1.grid.n_samples;

    const PhaseProfile phi1 = unwrapped_phase_of(analytic_signal(sig1.samples));
    const PhaseProfile phi2 = unwrapped_phase_of(analytic_signal(sig2.samples));

    std::vector<double> dphi(n);
    for (std::size_t k = 0; k < n; ++k) dphi[k] = phi1.phase[k] - phi2.phase[k];
    if (dphi.back() < dphi.front())
        for (auto& d : dphi) d = -d;

    // total phase span ~ 2*pi*(f1 - f2): reject too-close mirror depths
    const double depth_gap_bins = (dphi.back() - dphi.front()) / (2.0 * std::numbers::pi);
    if (depth_gap_bins < 8.0)
        throw DataError("calibrate: mirror depths too close (need >= 8 bins apart)");

    const std::vector<double> smooth = detail::smooth5(dphi);
    for (std::size_t k = 1; k < n; ++k)
        if (!(smooth[k] > smooth[k - 1]))
            throw DataError("calibrate: phase difference not monotone; "
                            "mirror depths too close or signals invalid");

    // warped coordinate normalized onto [0, n-1], then inverted
    std::vector<double> warped(n), pixel(n);
    const double lo = smooth.front(), span = smooth.back() - smooth.front();
    for (std::size_t k = 0; k < n; ++k) {
        warped[k] = (smooth[k] - lo) / span * static_cast<double>(n - 1);
        pixel[k] = static_cast<double>(k);
    }
    CalibrationMap map;
    map.resample_positions.resize(n);
    const MonotoneCubic inverse(warped, pixel);
    for (std::size_t k = 0; k < n; ++k)
        map.resample_positions[k] = inverse(static_cast<double>(k));

    // residual dispersion: sig1's phase on the resampled axis, line removed
    const MonotoneCubic phase_of_pixel(pixel, phi1.phase);
    std::vector<double> resampled_phase(n);
    for (std::size_t k = 0; k < n; ++k)
        resampled_phase[k] = phase_of_pixel(map.resample_positions[k]);
    const auto [a, b] = detail::fit_line(resampled_phase, CalibrationMap::guard);
    map.residual_phase.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        map.residual_phase[k] = resampled_phase[k] - (a + b * static_cast<double>(k));
    return map;
}

/// Applies the calibration: resample, analytic signal, dispersion phase
/// removal, FFT amplitude.
inline std::vector<double> linearize(const RawSignal& sig, const CalibrationMap& map) {
    if (sig.samples.size() != map.size())
        throw DataError("linearize: signal length does not match calibration");
    std::vector<double> resampled = resample_signal(sig.samples, map.resample_positions);
    std::vector<cdouble> za = analytic_signal(resampled);
    for (std::size_t k = 0; k < za.size(); ++k) {
        const double r = map.residual_phase[k];
        za[k] *= cdouble(std::cos(r), -std::sin(r));
    }
    return amplitude(fft(std::move(za)));
}

} // namespace nlsel
