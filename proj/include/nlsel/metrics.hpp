#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsel/dataset.hpp"
#include "nlsel/errors.hpp"
#include "nlsel/grid.hpp"
#include "nlsel/sigmodel.hpp"

namespace nlsel {

/// Goodness-of-Fit Approximity: percentage of samples whose absolute error is
/// within `threshold` of the ground truth. Both inputs must be Min-Max
/// normalized, so the value span is 1 and a 0.01 threshold means 1% error.
inline double gof(const std::vector<double>& pred, const std::vector<double>& gt,
                  double threshold) {
    if (pred.size() != gt.size()) throw DataError("gof: length mismatch");
    if (pred.empty()) throw DataError("gof: empty input");
    if (!(threshold > 0.0)) throw DataError("gof: threshold must be positive");
    constexpr double norm_tol = 1e-9;
    for (const auto* vec : {&pred, &gt}) {
        const auto [mn, mx] = std::minmax_element(vec->begin(), vec->end());
        if (*mn < -norm_tol || *mx > 1.0 + norm_tol)
            throw DataError("gof: inputs must be normalized to [0, 1]");
    }
    std::size_t within = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (std::abs(pred[i] - gt[i]) <= threshold) ++within;
    return 100.0 * static_cast<double>(within) / static_cast<double>(pred.size());
}

namespace detail {

/// Half-maximum crossing distances around a peak, found by walking outward
/// and linearly interpolating between samples.
struct HalfMaxExtents {
    double left;
    double right;
};

inline HalfMaxExtents half_max_extents(const std::vector<double>& amp, std::size_t peak_bin) {
    if (peak_bin >= amp.size()) throw DataError("fwhm: peak bin out of range");
    const double peak = amp[peak_bin];
    if ((peak_bin > 0 && amp[peak_bin - 1] > peak) ||
        (peak_bin + 1 < amp.size() && amp[peak_bin + 1] > peak))
        throw DataError("fwhm: amp[peak_bin] is not a local maximum");
    const double half = peak / 2.0;

    std::size_t i = peak_bin;
    while (i > 0 && amp[i] > half) --i;
    if (amp[i] > half) throw DataError("fwhm: no left half-maximum crossing");
    const double xl = static_cast<double>(i) + (half - amp[i]) / (amp[i + 1] - amp[i]);

    std::size_t j = peak_bin;
    while (j + 1 < amp.size() && amp[j] > half) ++j;
    if (amp[j] > half) throw DataError("fwhm: no right half-maximum crossing");
    const double xr =
        static_cast<double>(j - 1) + (amp[j - 1] - half) / (amp[j - 1] - amp[j]);

    return {static_cast<double>(peak_bin) - xl, xr - static_cast<double>(peak_bin)};
}

} // namespace detail

/// Full width at half maximum in bins.
inline double fwhm(const std::vector<double>& amp, std::size_t peak_bin) {
    const auto e = detail::half_max_extents(amp, peak_bin);
    return e.left + e.right;
}

/// Signed tail indicator: right/left half-max distance ratio minus 1.
/// Zero for symmetric peaks; the sign tracks the tail direction.
inline double peak_asymmetry(const std::vector<double>& amp, std::size_t peak_bin) {
    const auto e = detail::half_max_extents(amp, peak_bin);
    return e.right / e.left - 1.0;
}

/// Index of the largest value in the positive-frequency half [1, N/2).
inline std::size_t positive_peak_bin(const std::vector<double>& amp) {
    std::size_t best = 1;
    for (std::size_t i = 1; i < amp.size() / 2; ++i)
        if (amp[i] > amp[best]) best = i;
    return best;
}

/// FWHM of an unchirped tone on this grid: the resolution floor set by the
/// envelope alone (~2.5 bins for sigma = 0.15), measured with the same
/// linear-interpolation rule as every other width in this module.
inline double transform_limit_fwhm(const Grid& grid) {
    ObjectSpec obj;
    Interface itf;
    itf.freq = static_cast<double>(grid.n_samples) / 8.0;
    obj.interfaces.push_back(itf);
    const auto amp = amplitude(fft_real(synthesize_signal(obj, grid).samples));
    return fwhm(amp, positive_peak_bin(amp));
}

// ---------------------------------------------------------------------------
// Table-1-style aggregation
// ---------------------------------------------------------------------------

struct GofBucket {
    int interfaces = 0;
    std::size_t below = 0; // samples with GoF < 95%
    std::size_t total = 0;
    double percent_below = 0.0;
};

struct GofReport {
    double threshold = 0.0;
    std::vector<double> per_sample;
    std::vector<GofBucket> buckets; // interface counts 2..12
    std::size_t total_below = 0;
    std::size_t total_count = 0;
    double percent_below_total = 0.0;
    double mean_gof = 0.0;
    bool order_mismatch = false;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot open for writing: " + path);
        out << "interfaces,below_95,in_dataset,percent_below\n";
        for (const auto& b : buckets)
            out << b.interfaces << ',' << b.below << ',' << b.total << ','
                << format_double(b.percent_below) << '\n';
        out << "totals," << total_below << ',' << total_count << ','
            << format_double(percent_below_total) << '\n';
        out << "mean_gof," << format_double(mean_gof) << ",,\n";
        out << "threshold," << format_double(threshold) << ",,\n";
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& b : buckets)
            rows.push_back({{"interfaces", b.interfaces},
                            {"below_95", b.below},
                            {"in_dataset", b.total},
                            {"percent_below", b.percent_below}});
        return {{"threshold", threshold},
                {"buckets", rows},
                {"total_below", total_below},
                {"total_count", total_count},
                {"percent_below_total", percent_below_total},
                {"mean_gof", mean_gof},
                {"order_mismatch", order_mismatch}};
    }
};

/// Runs `predict` over the samples and aggregates GoF per interface count,
/// one report per threshold. `predict` returns the normalized amplitude for
/// a sample's input stack.
template <typename PredictFn>
std::vector<GofReport> evaluate(PredictFn&& predict, const std::vector<Sample>& samples,
                                const std::vector<double>& thresholds,
                                bool order_mismatch = false) {
    if (samples.empty()) throw DataError("evaluate: empty dataset");
    if (thresholds.empty()) throw DataError("evaluate: no thresholds");
    std::vector<GofReport> reports(thresholds.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        auto& r = reports[t];
        r.threshold = thresholds[t];
        r.order_mismatch = order_mismatch;
        r.buckets.resize(11);
        for (int j = 2; j <= 12; ++j) r.buckets[static_cast<std::size_t>(j - 2)].interfaces = j;
    }
    for (const auto& sample : samples) {
        const int j = static_cast<int>(sample.object.interfaces.size());
        if (j < 2 || j > 12)
            throw DataError("evaluate: sample interface count " + std::to_string(j) +
                            " outside [2, 12]");
        const std::vector<double> pred = predict(sample);
        std::vector<double> gt(sample.target.begin(), sample.target.end());
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            const double g = gof(pred, gt, thresholds[t]);
            auto& r = reports[t];
            r.per_sample.push_back(g);
            auto& bucket = r.buckets[static_cast<std::size_t>(j - 2)];
            ++bucket.total;
            if (g < 95.0) ++bucket.below;
        }
    }
    for (auto& r : reports) {
        double sum = 0.0;
        for (double g : r.per_sample) sum += g;
        r.mean_gof = sum / static_cast<double>(r.per_sample.size());
        for (auto& b : r.buckets) {
            r.total_below += b.below;
            r.total_count += b.total;
            b.percent_below =
                b.total ? 100.0 * static_cast<double>(b.below) / static_cast<double>(b.total) : 0.0;
        }
        r.percent_below_total =
            100.0 * static_cast<double>(r.total_below) / static_cast<double>(r.total_count);
    }
    return reports;
}

} // namespace nlsel
