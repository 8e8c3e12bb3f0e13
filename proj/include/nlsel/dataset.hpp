#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsel/errors.hpp"
#include "nlsel/grid.hpp"
#include "nlsel/io.hpp"
#include "nlsel/prng.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/stack.hpp"

namespace nlsel {

constexpr uint16_t dataset_format_version = 1;

/// Everything that determines a dataset byte-for-byte.
struct DatasetConfig {
    uint32_t count = 0;
    int order = 2;
    uint64_t seed = 0;
    Grid grid;
    std::size_t stack_rows = 32;
    int min_interfaces = 2;
    int max_interfaces = 12;
    double reflectivity_lo = 0.0; // exclusive
    double reflectivity_hi = 1.0; // inclusive
    double a2_bound = limits::default_a2_bound;
    double a3_bound = limits::default_a3_bound;
    double ladder_max = 0.0; // 0 -> bound of the configured order

    double effective_ladder_max() const {
        return ladder_max > 0.0 ? ladder_max : (order == 2 ? a2_bound : a3_bound);
    }
    CoeffLadder ladder() const { return CoeffLadder::make(order, stack_rows, effective_ladder_max()); }
    int bucket_count() const { return max_interfaces - min_interfaces + 1; }

    void validate() const {
        grid.validate();
        if (order != 2 && order != 3) throw DataError("dataset: order must be 2 or 3");
        if (min_interfaces < 2 || max_interfaces > 12 || min_interfaces > max_interfaces)
            throw DataError("dataset: interface range must lie within [2, 12]");
        if (count < static_cast<uint32_t>(bucket_count()))
            throw DataError("dataset: count must cover at least one sample per interface bucket");
        if (stack_rows < 2 || stack_rows > 65535) throw DataError("dataset: bad stack rows");
        if (!(reflectivity_hi > reflectivity_lo) || reflectivity_lo < 0.0 || reflectivity_hi > 1.0)
            throw DataError("dataset: reflectivity range must be within (0, 1]");
        if (!(a2_bound > 0.0) || !(a3_bound > 0.0)) throw DataError("dataset: bounds must be positive");
        const double bound = order == 2 ? a2_bound : a3_bound;
        if (effective_ladder_max() < bound)
            throw DataError("dataset: ladder max must cover the nonlinearity bound");
    }
};

/// One training record. Stack and target are stored normalized, float32.
struct Sample {
    ObjectSpec object;
    std::vector<float> input;  // stack_rows x n_samples, row-major
    std::vector<float> target; // n_samples
};

struct DatasetHeader {
    uint16_t version = dataset_format_version;
    uint8_t order = 2;
    uint32_t count = 0;
    uint16_t stack_rows = 0;
    uint16_t n_samples = 0;
    uint64_t seed = 0;
    std::vector<double> ladder_values;
    double a2_bound = 0.0;
    double a3_bound = 0.0;
};

/// Interface count for record `index` under uniform bucket allocation with
/// the remainder going to the lowest counts.
inline int bucket_interfaces(const DatasetConfig& cfg, uint64_t index) {
    return cfg.min_interfaces + static_cast<int>(index % static_cast<uint64_t>(cfg.bucket_count()));
}

/// Draws one object with `j` interfaces from the per-record stream.
/// Frequencies are rejection-sampled to honor the 4-bin separation.
inline ObjectSpec draw_object(Xoshiro256& rng, const DatasetConfig& cfg, int j) {
    if (j < cfg.min_interfaces || j > cfg.max_interfaces)
        throw DataError("draw_object: interface count " + std::to_string(j) + " outside range");
    ObjectSpec obj;
    const double lo = freq_min(cfg.grid), hi = freq_max(cfg.grid);
    int attempts = 0;
    while (obj.interfaces.size() < static_cast<std::size_t>(j)) {
        if (++attempts > 10000)
            throw DataError("draw_object: rejection sampling exceeded 10000 attempts "
                            "(band too narrow for requested interfaces)");
        const double f = rng.uniform(lo, hi);
        bool clear = true;
        for (const auto& itf : obj.interfaces)
            if (std::abs(itf.freq - f) < limits::min_peak_separation_bins) {
                clear = false;
                break;
            }
        if (!clear) continue;
        Interface itf;
        itf.freq = f;
        obj.interfaces.push_back(itf);
    }
    for (auto& itf : obj.interfaces) {
        // reflectivity in (lo, hi]: 1 - u maps [0,1) onto (0,1]
        itf.reflectivity =
            cfg.reflectivity_hi - (cfg.reflectivity_hi - cfg.reflectivity_lo) * rng.uniform01();
        itf.a2 = rng.uniform(-cfg.a2_bound, cfg.a2_bound);
        itf.a3 = rng.uniform(-cfg.a3_bound, cfg.a3_bound);
    }
    return obj;
}

/// Builds the normalized (stack, ground truth) pair for an object.
inline Sample make_sample(const ObjectSpec& obj, const DatasetConfig& cfg) {
    const CoeffLadder ladder = cfg.ladder();
    Sample sample;
    sample.object = obj;
    RawSignal sig = synthesize_signal(obj, cfg.grid);
    Stack stack = build_stack(sig, ladder);
    normalize_stack(stack);
    sample.input.assign(stack.rows.begin(), stack.rows.end());
    const auto gt = minmax_normalize(ground_truth(obj, cfg.grid, cfg.order));
    sample.target.assign(gt.begin(), gt.end());
    return sample;
}

inline Sample generate_sample(const DatasetConfig& cfg, uint64_t index) {
    Xoshiro256 rng = stream_for(cfg.seed, index);
    return make_sample(draw_object(rng, cfg, bucket_interfaces(cfg, index)), cfg);
}

namespace detail {

inline void write_record(std::ostream& out, const Sample& s) {
    write_pod<uint8_t>(out, static_cast<uint8_t>(s.object.interfaces.size()));
    for (const auto& itf : s.object.interfaces) {
        write_pod<double>(out, itf.freq);
        write_pod<double>(out, itf.reflectivity);
        write_pod<double>(out, itf.a2);
        write_pod<double>(out, itf.a3);
    }
    out.write(reinterpret_cast<const char*>(s.input.data()),
              static_cast<std::streamsize>(s.input.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(s.target.data()),
              static_cast<std::streamsize>(s.target.size() * sizeof(float)));
}

} // namespace detail

inline nlohmann::json manifest_json(const DatasetConfig& cfg) {
    const auto ladder = cfg.ladder();
    return nlohmann::json{{"magic", "NLDS"},
                          {"version", dataset_format_version},
                          {"order", cfg.order},
                          {"count", cfg.count},
                          {"stack_rows", cfg.stack_rows},
                          {"n_samples", cfg.grid.n_samples},
                          {"seed", cfg.seed},
                          {"ladder", ladder.values},
                          {"a2_bound", cfg.a2_bound},
                          {"a3_bound", cfg.a3_bound},
                          {"envelope_sigma", cfg.grid.envelope_sigma},
                          {"interface_range", {cfg.min_interfaces, cfg.max_interfaces}},
                          {"reflectivity_range", {cfg.reflectivity_lo, cfg.reflectivity_hi}}};
}

/// Generates the dataset file plus a human-readable JSON manifest sidecar
/// (`<path>.manifest.json`). Byte-for-byte deterministic in (cfg, version).
inline void generate_dataset(const DatasetConfig& cfg, const std::string& path) {
    cfg.validate();
    const CoeffLadder ladder = cfg.ladder();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write("NLDS", 4);
    write_pod<uint16_t>(out, dataset_format_version);
    write_pod<uint8_t>(out, static_cast<uint8_t>(cfg.order));
    write_pod<uint32_t>(out, cfg.count);
    write_pod<uint16_t>(out, static_cast<uint16_t>(cfg.stack_rows));
    write_pod<uint16_t>(out, static_cast<uint16_t>(cfg.grid.n_samples));
    write_pod<uint64_t>(out, cfg.seed);
    for (double v : ladder.values) write_pod<double>(out, v);
    write_pod<double>(out, cfg.a2_bound);
    write_pod<double>(out, cfg.a3_bound);
    for (uint64_t i = 0; i < cfg.count; ++i) detail::write_record(out, generate_sample(cfg, i));
    if (!out) throw DataError("write failed: " + path);

    std::ofstream manifest(path + ".manifest.json");
    if (!manifest) throw DataError("cannot open for writing: " + path + ".manifest.json");
    manifest << manifest_json(cfg).dump(2) << '\n';
}

/// Streaming reader; does not hold more than one record in memory.
class DatasetReader {
  public:
    explicit DatasetReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw DataError("cannot open: " + path);
        char magic[4];
        in_.read(magic, 4);
        if (in_.gcount() != 4 || std::string(magic, 4) != "NLDS")
            throw DataError("dataset: bad magic in " + path);
        if (!read_pod(in_, header_.version)) throw DataError("dataset: truncated header");
        if (header_.version != dataset_format_version)
            throw DataError("dataset: unsupported version " + std::to_string(header_.version));
        if (!read_pod(in_, header_.order) || !read_pod(in_, header_.count) ||
            !read_pod(in_, header_.stack_rows) || !read_pod(in_, header_.n_samples) ||
            !read_pod(in_, header_.seed))
            throw DataError("dataset: truncated header in " + path);
        header_.ladder_values.resize(header_.stack_rows);
        for (auto& v : header_.ladder_values)
            if (!read_pod(in_, v)) throw DataError("dataset: truncated ladder in " + path);
        if (!read_pod(in_, header_.a2_bound) || !read_pod(in_, header_.a3_bound))
            throw DataError("dataset: truncated header in " + path);
    }

    const DatasetHeader& header() const { return header_; }

    /// Reads the next record; empty when all `count` records were read.
    /// A short read is reported as a truncated record with its index.
    std::optional<Sample> next() {
        if (index_ >= header_.count) return std::nullopt;
        Sample s;
        uint8_t j = 0;
        if (!read_pod(in_, j)) return fail();
        if (j < 1 || j > limits::max_interfaces)
            throw DataError("dataset: corrupt interface count at record " + std::to_string(index_));
        s.object.interfaces.resize(j);
        for (auto& itf : s.object.interfaces) {
            if (!read_pod(in_, itf.freq) || !read_pod(in_, itf.reflectivity) ||
                !read_pod(in_, itf.a2) || !read_pod(in_, itf.a3))
                return fail();
        }
        s.input.resize(static_cast<std::size_t>(header_.stack_rows) * header_.n_samples);
        s.target.resize(header_.n_samples);
        in_.read(reinterpret_cast<char*>(s.input.data()),
                 static_cast<std::streamsize>(s.input.size() * sizeof(float)));
        if (in_.gcount() != static_cast<std::streamsize>(s.input.size() * sizeof(float)))
            return fail();
        in_.read(reinterpret_cast<char*>(s.target.data()),
                 static_cast<std::streamsize>(s.target.size() * sizeof(float)));
        if (in_.gcount() != static_cast<std::streamsize>(s.target.size() * sizeof(float)))
            return fail();
        ++index_;
        return s;
    }

    std::vector<Sample> read_all() {
        std::vector<Sample> all;
        all.reserve(header_.count);
        while (auto s = next()) all.push_back(std::move(*s));
        return all;
    }

  private:
    std::optional<Sample> fail() {
        throw DataError("dataset: truncated record at index " + std::to_string(index_) + " in " +
                        path_);
    }
    std::ifstream in_;
    std::string path_;
    DatasetHeader header_;
    uint64_t index_ = 0;
};

} // namespace nlsel
