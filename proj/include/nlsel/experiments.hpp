#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlsel/baseline.hpp"
#include "nlsel/errors.hpp"
#include "nlsel/io.hpp"
#include "nlsel/metrics.hpp"
#include "nlsel/net.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/stack.hpp"
#include "nlsel/train.hpp"

namespace nlsel {

/// Synthesizes a mirror at `depth` bins under depth-proportional system
/// nonlinearity (the spectrometer model: per-bin coefficients scale with
/// depth) plus optional depth-independent interferometer dispersion.
struct SystemModel {
    double a2_per_bin = 0.0;
    double a3_per_bin = 0.0;
    double interferometer_a2 = 0.0;
    double interferometer_a3 = 0.0;

    RawSignal mirror(double depth, const Grid& grid, double extra_a2 = 0.0,
                     double extra_a3 = 0.0) const {
        ObjectSpec obj;
        Interface itf;
        itf.freq = depth;
        itf.a2 = a2_per_bin * depth + interferometer_a2 + extra_a2;
        itf.a3 = a3_per_bin * depth + interferometer_a3 + extra_a3;
        obj.interfaces.push_back(itf);
        return synthesize_signal(obj, grid);
    }
};

struct MirrorStudyRow {
    double depth = 0.0;
    double raw_fwhm = 0.0;
    double net1_fwhm = 0.0;
    double net2_asymmetry = 0.0;
    double baseline_fwhm = 0.0;
};

struct MirrorStudyResult {
    std::vector<MirrorStudyRow> rows;
    double transform_limit = 0.0;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot open for writing: " + path);
        out << "depth_bin,raw_fwhm,net1_fwhm,net2_asymmetry,baseline_fwhm\n";
        for (const auto& r : rows)
            out << format_double(r.depth) << ',' << format_double(r.raw_fwhm) << ','
                << format_double(r.net1_fwhm) << ',' << format_double(r.net2_asymmetry) << ','
                << format_double(r.baseline_fwhm) << '\n';
    }
};

namespace detail {

inline std::vector<double> stack_prediction(const Network<float>& net, const RawSignal& sig,
                                            const CoeffLadder& ladder, Workspace<float>& ws) {
    Stack stack = build_stack(sig, ladder);
    normalize_stack(stack);
    Sample s;
    s.input.assign(stack.rows.begin(), stack.rows.end());
    s.target.assign(sig.grid.n_samples, 0.0f);
    return predict(net, s, ws);
}

} // namespace detail

/// The 11-depth mirror experiment: each depth is processed raw, through both
/// networks and through the classical calibration, and the peak metrics are
/// tabulated per depth.
inline MirrorStudyResult mirror_study(const std::vector<double>& depths, const SystemModel& system,
                                      const Network<float>& net1, const Network<float>& net2,
                                      const CoeffLadder& ladder2, const CoeffLadder& ladder3,
                                      const CalibrationMap& calib, const Grid& grid) {
    if (depths.size() < 2) throw DataError("mirror_study: need at least 2 depths");
    if (net1.cfg.order != 2) throw DataError("mirror_study: net1 must carry order tag 2");
    if (net2.cfg.order != 3) throw DataError("mirror_study: net2 must carry order tag 3");
    MirrorStudyResult result;
    result.transform_limit = transform_limit_fwhm(grid);
    Workspace<float> ws;
    for (double depth : depths) {
        const RawSignal sig = system.mirror(depth, grid);
        MirrorStudyRow row;
        row.depth = depth;

        const auto raw_amp = amplitude(fft_real(sig.samples));
        row.raw_fwhm = fwhm(raw_amp, positive_peak_bin(raw_amp));

        const auto p1 = detail::stack_prediction(net1, sig, ladder2, ws);
        row.net1_fwhm = fwhm(p1, positive_peak_bin(p1));

        const auto p2 = detail::stack_prediction(net2, sig, ladder3, ws);
        row.net2_asymmetry = peak_asymmetry(p2, positive_peak_bin(p2));

        const auto lin = linearize(sig, calib);
        row.baseline_fwhm = fwhm(lin, positive_peak_bin(lin));

        result.rows.push_back(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// B-scan assembly
// ---------------------------------------------------------------------------

enum class Pipeline { raw, net1, net2, baseline };

inline Pipeline pipeline_from_string(const std::string& s) {
    if (s == "raw") return Pipeline::raw;
    if (s == "net1") return Pipeline::net1;
    if (s == "net2") return Pipeline::net2;
    if (s == "baseline") return Pipeline::baseline;
    throw DataError("unknown pipeline '" + s + "' (raw|net1|net2|baseline)");
}

/// One amplitude line per lateral position.
struct BScan {
    std::vector<double> lines; // row-major, n_lines x n_samples
    std::size_t n_lines = 0;
    std::size_t n_samples = 0;

    void write_csv(const std::string& path) const {
        write_csv_matrix(path, lines, n_lines, n_samples);
    }
    void write_pgm(const std::string& path) const {
        nlsel::write_pgm(path, lines, n_lines, n_samples);
    }
};

struct BScanOptions {
    const Network<float>* net = nullptr;        // for net1/net2 pipelines
    const CoeffLadder* ladder = nullptr;        // matching the net's order
    const CalibrationMap* calibration = nullptr; // for the baseline pipeline
};

inline BScan assemble_bscan(const std::vector<RawSignal>& signals, Pipeline pipeline,
                            const BScanOptions& opts = {}) {
    if (signals.empty()) throw DataError("bscan: no input lines");
    const Grid grid = signals.front().grid;
    for (const auto& s : signals)
        if (!(s.grid == grid)) throw DataError("bscan: mixed grids");
    if ((pipeline == Pipeline::net1 || pipeline == Pipeline::net2) &&
        (opts.net == nullptr || opts.ladder == nullptr))
        throw DataError("bscan: network pipeline needs a net and ladder");
    if (pipeline == Pipeline::net1 && opts.net->cfg.order != 2)
        throw DataError("bscan: net1 pipeline requires an order-2 network");
    if (pipeline == Pipeline::net2 && opts.net->cfg.order != 3)
        throw DataError("bscan: net2 pipeline requires an order-3 network");
    if (pipeline == Pipeline::baseline && opts.calibration == nullptr)
        throw DataError("bscan: baseline pipeline needs a calibration");

    BScan scan;
    scan.n_lines = signals.size();
    scan.n_samples = grid.n_samples;
    scan.lines.resize(scan.n_lines * scan.n_samples);
    Workspace<float> ws;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        std::vector<double> line;
        switch (pipeline) {
            case Pipeline::raw: line = amplitude(fft_real(signals[i].samples)); break;
            case Pipeline::net1:
            case Pipeline::net2:
                line = detail::stack_prediction(*opts.net, signals[i], *opts.ladder, ws);
                break;
            case Pipeline::baseline: line = linearize(signals[i], *opts.calibration); break;
        }
        std::copy(line.begin(), line.end(),
                  scan.lines.begin() + static_cast<std::ptrdiff_t>(i * scan.n_samples));
    }
    return scan;
}

/// Synthetic analog of the tilted-glass measurement: front and back surfaces
/// drift linearly across lines while the OCT-typical artifact line stays at
/// the constant depth equal to the glass thickness.
struct TiltedGlassConfig {
    std::size_t lines = 256;
    double front_start = 40.0;
    double front_slope = 0.25; // bins per line
    double thickness = 90.0;   // back = front + thickness; artifact at this depth
    double object_a2 = 25.0;   // dispersion of the glass, applied to the back surface
    double object_a3 = 8.0;
};

inline std::vector<RawSignal> make_tilted_glass(const TiltedGlassConfig& cfg, const Grid& grid,
                                                const SystemModel& system = {}) {
    std::vector<RawSignal> lines;
    lines.reserve(cfg.lines);
    for (std::size_t i = 0; i < cfg.lines; ++i) {
        const double front = cfg.front_start + cfg.front_slope * static_cast<double>(i);
        const double back = front + cfg.thickness;
        ObjectSpec obj;
        Interface f1;
        f1.freq = front;
        f1.reflectivity = 0.9;
        f1.a2 = system.a2_per_bin * front + system.interferometer_a2;
        f1.a3 = system.a3_per_bin * front + system.interferometer_a3;
        Interface f2;
        f2.freq = back;
        f2.reflectivity = 0.7;
        f2.a2 = system.a2_per_bin * back + system.interferometer_a2 + cfg.object_a2;
        f2.a3 = system.a3_per_bin * back + system.interferometer_a3 + cfg.object_a3;
        Interface artifact;
        artifact.freq = cfg.thickness;
        artifact.reflectivity = 0.35;
        artifact.a2 = system.a2_per_bin * cfg.thickness + system.interferometer_a2;
        artifact.a3 = system.a3_per_bin * cfg.thickness + system.interferometer_a3;
        obj.interfaces = {f1, f2, artifact};
        lines.push_back(synthesize_signal(obj, grid));
    }
    return lines;
}

} // namespace nlsel
