#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsel/errors.hpp"
#include "nlsel/grid.hpp"
#include "nlsel/io.hpp"
#include "nlsel/prng.hpp"
#include "nlsel/spectral.hpp"

namespace nlsel {

/// One reflecting interface of the imaged object.
///
/// freq is the peak position in FFT bins (cycles per unit u). a2 and a3 are
/// the second- and third-order phase coefficients in radians at the band edge
/// v = +-1. phase0 is an optional constant phase offset, zero by default.
struct Interface {
    double freq = 0.0;
    double reflectivity = 1.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double phase0 = 0.0;
};

struct ObjectSpec {
    std::vector<Interface> interfaces;
};

/// The sampled real-valued interferogram.
struct RawSignal {
    std::vector<double> samples;
    Grid grid;

    void write_csv(const std::string& path) const { write_csv_vector(path, samples); }
};

inline RawSignal read_signal_csv(const std::string& path, const Grid& grid) {
    CsvTable t = read_csv(path);
    if (t.cols != 1 || t.rows != grid.n_samples)
        throw DataError("signal CSV must have " + std::to_string(grid.n_samples) +
                        " lines of one value, got " + std::to_string(t.rows) + "x" +
                        std::to_string(t.cols));
    return RawSignal{std::move(t.data), grid};
}

namespace limits {
constexpr std::size_t max_interfaces = 12;
constexpr double min_peak_separation_bins = 4.0;
constexpr double default_a2_bound = 60.0; // rad; see CoeffLadder coverage rule
constexpr double default_a3_bound = 30.0; // rad
} // namespace limits

/// Validates an object for synthesis. Mirrors (single-interface objects) are
/// accepted; the 2..12 interface range applies to dataset generation, where
/// DatasetConfig enforces it.
inline void validate_object(const ObjectSpec& obj, const Grid& grid) {
    grid.validate();
    const std::size_t j = obj.interfaces.size();
    if (j < 1 || j > limits::max_interfaces)
        throw DataError("object: interface count must be in [1, 12], got " + std::to_string(j));
    for (const auto& itf : obj.interfaces) {
        if (!std::isfinite(itf.freq) || !std::isfinite(itf.reflectivity) ||
            !std::isfinite(itf.a2) || !std::isfinite(itf.a3) || !std::isfinite(itf.phase0))
            throw DataError("object: non-finite interface field");
        if (itf.freq < freq_min(grid) || itf.freq > freq_max(grid))
            throw DataError("object: freq " + format_double(itf.freq) + " outside [" +
                            format_double(freq_min(grid)) + ", " + format_double(freq_max(grid)) +
                            "]");
        if (!(itf.reflectivity > 0.0) || itf.reflectivity > 1.0)
            throw DataError("object: reflectivity must be in (0, 1]");
    }
    for (std::size_t a = 0; a < j; ++a)
        for (std::size_t b = a + 1; b < j; ++b)
            if (std::abs(obj.interfaces[a].freq - obj.interfaces[b].freq) <
                limits::min_peak_separation_bins)
                throw DataError("object: interfaces closer than 4 bins");
}

struct SynthesisOptions {
    double noise_sigma = 0.0; // additive Gaussian noise; off by default
    uint64_t noise_seed = 0;
};

/// Synthesizes the modulated interferogram
///   s(n) = G(n) * sum_j r_j cos(2 pi f_j u_n + a2_j v_n^2 + a3_j v_n^3)
/// with the Gaussian envelope G(n) = exp(-u_n^2 / (2 sigma^2)). Deterministic
/// unless the noise hook is enabled.
inline RawSignal synthesize_signal(const ObjectSpec& obj, const Grid& grid,
                                   const SynthesisOptions& opts = {}) {
    validate_object(obj, grid);
    const double two_pi = 2.0 * std::numbers::pi;
    RawSignal sig{std::vector<double>(grid.n_samples, 0.0), grid};
    for (std::size_t n = 0; n < grid.n_samples; ++n) {
        const double u = grid.u(n);
        const double v = grid.v(n);
        double acc = 0.0;
        for (const auto& itf : obj.interfaces) {
            const double phase =
                two_pi * itf.freq * u + itf.a2 * v * v + itf.a3 * v * v * v + itf.phase0;
            acc += itf.reflectivity * std::cos(phase);
        }
        sig.samples[n] = grid.envelope(n) * acc;
    }
    if (opts.noise_sigma > 0.0) {
        Xoshiro256 rng(opts.noise_seed);
        for (auto& s : sig.samples) s += opts.noise_sigma * rng.gaussian();
    }
    return sig;
}

/// FFT amplitude of the object with the selected nonlinearity order zeroed on
/// every interface: the regression target for that order.
inline std::vector<double> ground_truth(const ObjectSpec& obj, const Grid& grid, int order) {
    if (order != 2 && order != 3)
        throw DataError("ground_truth: order must be 2 or 3, got " + std::to_string(order));
    ObjectSpec cleaned = obj;
    for (auto& itf : cleaned.interfaces) (order == 2 ? itf.a2 : itf.a3) = 0.0;
    return amplitude(fft_real(synthesize_signal(cleaned, grid).samples));
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const ObjectSpec& obj) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& itf : obj.interfaces) {
        nlohmann::json o = {{"freq", itf.freq},
                            {"reflectivity", itf.reflectivity},
                            {"a2", itf.a2},
                            {"a3", itf.a3}};
        if (itf.phase0 != 0.0) o["phase0"] = itf.phase0;
        arr.push_back(std::move(o));
    }
    return nlohmann::json{{"interfaces", std::move(arr)}};
}

inline ObjectSpec object_from_json(const nlohmann::json& j) {
    ObjectSpec obj;
    if (!j.contains("interfaces") || !j["interfaces"].is_array())
        throw DataError("object JSON: missing \"interfaces\" array");
    for (const auto& o : j["interfaces"]) {
        Interface itf;
        try {
            itf.freq = o.at("freq").get<double>();
            itf.reflectivity = o.at("reflectivity").get<double>();
            itf.a2 = o.at("a2").get<double>();
            itf.a3 = o.at("a3").get<double>();
            itf.phase0 = o.value("phase0", 0.0);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("object JSON: ") + e.what());
        }
        obj.interfaces.push_back(itf);
    }
    return obj;
}

inline ObjectSpec load_object(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("object JSON parse error in " + path + ": " + e.what());
    }
    return object_from_json(j);
}

inline void save_object(const ObjectSpec& obj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << to_json(obj).dump(2) << '\n';
}

} // namespace nlsel
