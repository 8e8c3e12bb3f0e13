// nlsel command-line tool: synthetic interferogram generation, stack
// construction, dataset generation, network training/inference/evaluation,
// classical two-mirror linearization, the scripted experiments, and CSV/SVG
// emitters. Every subcommand writes a resolved-config snapshot next to its
// primary output so a run can be replayed with --config.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlsel/baseline.hpp"
#include "nlsel/dataset.hpp"
#include "nlsel/experiments.hpp"
#include "nlsel/interp.hpp"
#include "nlsel/metrics.hpp"
#include "nlsel/net.hpp"
#include "nlsel/sigmodel.hpp"
#include "nlsel/spectral.hpp"
#include "nlsel/stack.hpp"
#include "nlsel/svg.hpp"
#include "nlsel/train.hpp"

namespace {

constexpr const char* version_line = "nlsel 1.0.0 (formats: NLDS 1, NLNW 1)";

struct GridOpts {
    std::size_t n = 1024;
    double sigma = 0.15;
    nlsel::Grid grid() const { return nlsel::Grid{n, sigma}; }
};

void add_grid_options(CLI::App* cmd, GridOpts& g) {
    cmd->add_option("--grid-size", g.n, "Samples per signal (power of two)")
        ->capture_default_str();
    cmd->add_option("--sigma", g.sigma, "Gaussian envelope width")->capture_default_str();
}

/// Writes the resolved option values of `cmd` next to the primary output so
/// the run is reproducible via `nlsel <cmd> --config <snapshot>`.
void write_snapshot(CLI::App* cmd, const std::string& primary_output) {
    const std::string path = primary_output + ".config.toml";
    std::ofstream out(path);
    if (!out) throw nlsel::DataError("cannot open for writing: " + path);
    out << cmd->config_to_str(true, false);
}

std::vector<nlsel::Sample> load_samples(const std::string& path, nlsel::DatasetHeader* header) {
    nlsel::DatasetReader reader(path);
    if (header) *header = reader.header();
    return reader.read_all();
}

nlsel::CoeffLadder ladder_for(int order, std::size_t rows, double ladder_max) {
    const double mx = ladder_max > 0.0
                          ? ladder_max
                          : (order == 2 ? nlsel::limits::default_a2_bound
                                        : nlsel::limits::default_a3_bound);
    return nlsel::CoeffLadder::make(order, rows, mx);
}

// --- subcommand wiring ------------------------------------------------------

struct SimulateArgs {
    std::string object_path, out, amplitude_out;
    GridOpts grid;
    double noise_sigma = 0.0;
    uint64_t noise_seed = 0;
};

void run_simulate(const SimulateArgs& a) {
    const nlsel::ObjectSpec obj = nlsel::load_object(a.object_path);
    nlsel::SynthesisOptions opts;
    opts.noise_sigma = a.noise_sigma;
    opts.noise_seed = a.noise_seed;
    const nlsel::RawSignal sig = nlsel::synthesize_signal(obj, a.grid.grid(), opts);
    sig.write_csv(a.out);
    if (!a.amplitude_out.empty())
        nlsel::write_csv_vector(a.amplitude_out,
                                nlsel::amplitude(nlsel::fft_real(sig.samples)));
}

struct StackArgs {
    std::string signal_path, out, pgm;
    GridOpts grid;
    int order = 2;
    std::size_t rows = 32;
    double ladder_max = 0.0;
    bool normalize = false;
};

void run_stack(const StackArgs& a) {
    const nlsel::RawSignal sig = nlsel::read_signal_csv(a.signal_path, a.grid.grid());
    nlsel::Stack stack = nlsel::build_stack(sig, ladder_for(a.order, a.rows, a.ladder_max));
    if (a.normalize) nlsel::normalize_stack(stack);
    stack.write_csv(a.out);
    if (!a.pgm.empty()) nlsel::write_pgm(a.pgm, stack.rows, stack.m, stack.n_samples);
}

struct GenDatasetArgs {
    nlsel::DatasetConfig cfg;
    GridOpts grid{1024, 0.15};
    std::string out;
    std::string preset = "full";
};

void run_gen_dataset(GenDatasetArgs& a) {
    if (a.preset == "toy") {
        a.grid.n = 256;
        a.cfg.stack_rows = 16;
    } else if (a.preset != "full") {
        throw nlsel::DataError("unknown preset '" + a.preset + "' (toy|full)");
    }
    a.cfg.grid = a.grid.grid();
    nlsel::generate_dataset(a.cfg, a.out);
}

struct TrainArgs {
    std::string data, val, out, report;
    nlsel::TrainOptions opts;
    int levels = 3;
    int base_channels = 16;
    std::string activation = "clamp";
    bool deterministic = false;
    bool quiet = false;
};

void run_train(const TrainArgs& a) {
    nlsel::DatasetHeader header;
    auto train_set = load_samples(a.data, &header);
    nlsel::DatasetHeader val_header;
    auto val_set = load_samples(a.val, &val_header);
    if (val_header.order != header.order || val_header.stack_rows != header.stack_rows ||
        val_header.n_samples != header.n_samples)
        throw nlsel::DataError("train: validation dataset shape/order differs from training set");

    nlsel::NetConfig cfg;
    cfg.levels = a.levels;
    cfg.base_channels = a.base_channels;
    cfg.rows = header.stack_rows;
    cfg.width = header.n_samples;
    cfg.order = header.order;
    cfg.output_activation = nlsel::activation_from_string(a.activation);
    nlsel::Network<float> net(cfg, a.opts.seed);

    nlsel::TrainOptions opts = a.opts;
    if (!a.quiet)
        opts.on_epoch = [&](const nlsel::EpochRow& r) {
            std::fprintf(stderr, "epoch %d  train MAE %.5f  val MAE %.5f  val GoF %.2f%%\n",
                         r.epoch, r.train_mae, r.val_mae, r.val_gof[0]);
        };
    const nlsel::TrainReport report = nlsel::train(net, train_set, val_set, opts);
    nlsel::save_weights(net, a.out);
    if (!a.report.empty()) report.write_csv(a.report);
}

struct InferArgs {
    std::string weights, data, signal_path, out;
    GridOpts grid;
    double ladder_max = 0.0;
    long index = -1;
};

void run_infer(const InferArgs& a) {
    const nlsel::Network<float> net = nlsel::load_weights(a.weights);
    nlsel::Workspace<float> ws;
    std::vector<std::vector<double>> preds;
    if (!a.data.empty()) {
        nlsel::DatasetReader reader(a.data);
        long idx = 0;
        while (auto s = reader.next()) {
            if (a.index >= 0 && idx++ != a.index) continue;
            preds.push_back(nlsel::predict(net, *s, ws));
            if (a.index >= 0) break;
        }
        if (preds.empty()) throw nlsel::DataError("infer: no matching sample");
    } else if (!a.signal_path.empty()) {
        GridOpts g = a.grid;
        g.n = static_cast<std::size_t>(net.cfg.width);
        const nlsel::RawSignal sig = nlsel::read_signal_csv(a.signal_path, g.grid());
        nlsel::Stack stack = nlsel::build_stack(
            sig, ladder_for(net.cfg.order, static_cast<std::size_t>(net.cfg.rows), a.ladder_max));
        nlsel::normalize_stack(stack);
        nlsel::Sample s;
        s.input.assign(stack.rows.begin(), stack.rows.end());
        s.target.assign(sig.grid.n_samples, 0.0f);
        preds.push_back(nlsel::predict(net, s, ws));
    } else {
        throw nlsel::DataError("infer: need --data or --signal");
    }
    std::vector<double> flat;
    for (const auto& p : preds) flat.insert(flat.end(), p.begin(), p.end());
    nlsel::write_csv_matrix(a.out, flat, preds.size(), preds.front().size());
}

struct EvalArgs {
    std::string weights, data, out, json_out;
    std::vector<double> thresholds{0.001};
    bool allow_order_mismatch = false;
};

void run_eval(const EvalArgs& a) {
    const nlsel::Network<float> net = nlsel::load_weights(a.weights);
    nlsel::DatasetHeader header;
    const auto samples = load_samples(a.data, &header);
    const bool mismatch = header.order != net.cfg.order;
    if (mismatch) {
        if (!a.allow_order_mismatch)
            throw nlsel::DataError("eval: dataset order " + std::to_string(header.order) +
                                   " does not match network order " +
                                   std::to_string(net.cfg.order) +
                                   " (pass --allow-order-mismatch to proceed)");
        std::fprintf(stderr, "warning: order mismatch (dataset %d, network %d)\n",
                     int(header.order), net.cfg.order);
    }
    const auto reports = nlsel::evaluate_network(net, samples, a.thresholds, mismatch);
    reports.front().write_csv(a.out);
    if (!a.json_out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : reports) j.push_back(r.to_json());
        std::ofstream out(a.json_out);
        if (!out) throw nlsel::DataError("cannot open for writing: " + a.json_out);
        out << j.dump(2) << '\n';
    }
    for (const auto& r : reports) {
        std::printf("threshold %.4g%%: mean GoF %.4f%%, %zu/%zu samples below 95%% (%.2f%%)\n",
                    100.0 * r.threshold, r.mean_gof, r.total_below, r.total_count,
                    r.percent_below_total);
    }
}

struct CalibrateArgs {
    std::string signal1, signal2, out;
    GridOpts grid;
};

void run_calibrate(const CalibrateArgs& a) {
    const nlsel::Grid grid = a.grid.grid();
    const auto map = nlsel::calibrate(nlsel::read_signal_csv(a.signal1, grid),
                                      nlsel::read_signal_csv(a.signal2, grid));
    map.save(a.out);
}

struct LinearizeArgs {
    std::string signal_path, calibration, out;
    GridOpts grid;
};

void run_linearize(const LinearizeArgs& a) {
    const auto map = nlsel::CalibrationMap::load(a.calibration);
    GridOpts g = a.grid;
    g.n = map.size();
    const auto amp = nlsel::linearize(nlsel::read_signal_csv(a.signal_path, g.grid()), map);
    nlsel::write_csv_vector(a.out, amp);
}

struct MirrorStudyArgs {
    std::string net1, net2, out;
    int depth_count = 11;
    double depth_min = 0.0, depth_max = 0.0; // 0 -> grid-scaled defaults
    double system_a2_per_bin = -1.0, system_a3_per_bin = -1.0;
    double interferometer_a2 = 0.0, interferometer_a3 = 0.0;
    int calib_lo = 1, calib_hi = 7;
    double ladder2_max = 0.0, ladder3_max = 0.0;
    double sigma = 0.15;
};

void run_mirror_study(const MirrorStudyArgs& a) {
    const auto net1 = nlsel::load_weights(a.net1);
    const auto net2 = nlsel::load_weights(a.net2);
    if (net1.cfg.width != net2.cfg.width || net1.cfg.rows != net2.cfg.rows)
        throw nlsel::DataError("mirror-study: the two networks disagree on stack shape");
    const nlsel::Grid grid{static_cast<std::size_t>(net1.cfg.width), a.sigma};

    const double dmax = a.depth_max > 0 ? a.depth_max : 0.8 * nlsel::freq_max(grid);
    const double dmin = a.depth_min > 0 ? a.depth_min : 0.2 * nlsel::freq_max(grid);
    std::vector<double> depths(static_cast<std::size_t>(a.depth_count));
    for (std::size_t i = 0; i < depths.size(); ++i)
        depths[i] = dmin + (dmax - dmin) * static_cast<double>(i) /
                              static_cast<double>(depths.size() - 1);

    nlsel::SystemModel system;
    // default: 40 rad quadratic and 15 rad cubic at the deepest mirror
    system.a2_per_bin = a.system_a2_per_bin >= 0 ? a.system_a2_per_bin : 40.0 / dmax;
    system.a3_per_bin = a.system_a3_per_bin >= 0 ? a.system_a3_per_bin : 15.0 / dmax;
    system.interferometer_a2 = a.interferometer_a2;
    system.interferometer_a3 = a.interferometer_a3;

    if (a.calib_lo < 0 || a.calib_hi >= a.depth_count || a.calib_lo == a.calib_hi)
        throw nlsel::DataError("mirror-study: bad calibration depth indices");
    const auto calib =
        nlsel::calibrate(system.mirror(depths[static_cast<std::size_t>(a.calib_lo)], grid),
                         system.mirror(depths[static_cast<std::size_t>(a.calib_hi)], grid));

    const auto ladder2 = ladder_for(2, static_cast<std::size_t>(net1.cfg.rows), a.ladder2_max);
    const auto ladder3 = ladder_for(3, static_cast<std::size_t>(net2.cfg.rows), a.ladder3_max);
    const auto result =
        nlsel::mirror_study(depths, system, net1, net2, ladder2, ladder3, calib, grid);
    result.write_csv(a.out);
    std::printf("transform limit %.3f bins; %zu depths written to %s\n", result.transform_limit,
                result.rows.size(), a.out.c_str());
}

struct BScanArgs {
    std::string pipeline = "raw";
    std::string weights, calibration, lines_csv, out, pgm;
    GridOpts grid;
    bool synthetic_glass = false;
    nlsel::TiltedGlassConfig glass;
    double system_a2_per_bin = 0.08, system_a3_per_bin = 0.01;
    double ladder_max = 0.0;
};

void run_bscan(const BScanArgs& a) {
    std::vector<nlsel::RawSignal> signals;
    nlsel::Grid grid = a.grid.grid();
    nlsel::SystemModel system;
    system.a2_per_bin = a.system_a2_per_bin;
    system.a3_per_bin = a.system_a3_per_bin;
    if (a.synthetic_glass) {
        signals = nlsel::make_tilted_glass(a.glass, grid, system);
    } else if (!a.lines_csv.empty()) {
        const nlsel::CsvTable t = nlsel::read_csv(a.lines_csv);
        grid.n_samples = t.cols;
        grid.validate();
        for (std::size_t r = 0; r < t.rows; ++r)
            signals.push_back(nlsel::RawSignal{
                {t.data.begin() + static_cast<std::ptrdiff_t>(r * t.cols),
                 t.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols)},
                grid});
    } else {
        throw nlsel::DataError("bscan: need --lines or --synthetic-glass");
    }

    const nlsel::Pipeline pipeline = nlsel::pipeline_from_string(a.pipeline);
    nlsel::BScanOptions opts;
    nlsel::Network<float> net;
    nlsel::CoeffLadder ladder;
    nlsel::CalibrationMap calib;
    if (pipeline == nlsel::Pipeline::net1 || pipeline == nlsel::Pipeline::net2) {
        if (a.weights.empty()) throw nlsel::DataError("bscan: --weights required for net pipelines");
        net = nlsel::load_weights(a.weights);
        ladder = ladder_for(net.cfg.order, static_cast<std::size_t>(net.cfg.rows), a.ladder_max);
        opts.net = &net;
        opts.ladder = &ladder;
    } else if (pipeline == nlsel::Pipeline::baseline) {
        if (a.calibration.empty()) {
            // calibrate from two synthetic mirrors under the same system model
            const double d1 = 0.25 * nlsel::freq_max(grid), d2 = 0.65 * nlsel::freq_max(grid);
            calib = nlsel::calibrate(system.mirror(d1, grid), system.mirror(d2, grid));
        } else {
            calib = nlsel::CalibrationMap::load(a.calibration);
        }
        opts.calibration = &calib;
    }
    const nlsel::BScan scan = nlsel::assemble_bscan(signals, pipeline, opts);
    scan.write_csv(a.out);
    if (!a.pgm.empty()) scan.write_pgm(a.pgm);
}

struct BenchArgs {
    std::string weights, out;
    GridOpts grid;
    std::size_t rows = 32;
    int iters = 20;
};

void run_bench(const BenchArgs& a) {
    using clock = std::chrono::steady_clock;
    nlsel::ObjectSpec obj;
    obj.interfaces.push_back({100.0, 1.0, 20.0, 5.0, 0.0});
    obj.interfaces.push_back({200.0, 0.7, -30.0, 10.0, 0.0});
    nlsel::Grid grid = a.grid.grid();
    const auto sig = nlsel::synthesize_signal(obj, grid);
    const auto ladder = ladder_for(2, a.rows, 0.0);

    auto t0 = clock::now();
    for (int i = 0; i < a.iters; ++i) {
        auto stack = nlsel::build_stack(sig, ladder);
        nlsel::normalize_stack(stack);
    }
    const double stack_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count() / a.iters;
    std::printf("stack build: %.3f ms/stack (%.1f stacks/s)\n", stack_ms, 1000.0 / stack_ms);

    std::string csv = "metric,value\nstack_ms," + nlsel::format_double(stack_ms) + "\n";
    if (!a.weights.empty()) {
        const auto net = nlsel::load_weights(a.weights);
        nlsel::Grid g{static_cast<std::size_t>(net.cfg.width), a.grid.sigma};
        nlsel::ObjectSpec obj2 = obj;
        for (auto& itf : obj2.interfaces) itf.freq = std::min(itf.freq, nlsel::freq_max(g));
        auto s = nlsel::synthesize_signal(obj2, g);
        auto stack =
            nlsel::build_stack(s, ladder_for(net.cfg.order, static_cast<std::size_t>(net.cfg.rows), 0.0));
        nlsel::normalize_stack(stack);
        nlsel::Sample sample;
        sample.input.assign(stack.rows.begin(), stack.rows.end());
        sample.target.assign(g.n_samples, 0.0f);
        nlsel::Workspace<float> ws;
        nlsel::predict(net, sample, ws); // warm-up
        t0 = clock::now();
        for (int i = 0; i < a.iters; ++i) nlsel::predict(net, sample, ws);
        const double infer_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0).count() / a.iters;
        std::printf("inference: %.3f ms/stack\n", infer_ms);
        csv += "inference_ms," + nlsel::format_double(infer_ms) + "\n";
    }
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw nlsel::DataError("cannot open for writing: " + a.out);
        f << csv;
    }
}

struct PlotArgs {
    std::string csv, kind = "line", out;
};

void run_plot(const PlotArgs& a) {
    const nlsel::CsvTable table = nlsel::read_csv(a.csv);
    if (a.kind == "line")
        nlsel::emit_line_plot(table, a.out);
    else if (a.kind == "heatmap")
        nlsel::emit_heatmap(table, a.out);
    else
        throw nlsel::DataError("plot: unknown kind '" + a.kind + "' (line|heatmap)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selective nonlinearity removal for modulated signals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_line);

    auto configure = [](CLI::App* cmd) {
        cmd->set_config("--config", "", "Read options from a TOML config snapshot");
        return cmd;
    };

    SimulateArgs sim;
    auto* c_sim = configure(app.add_subcommand("simulate", "Object JSON -> signal CSV (+amplitude)"));
    c_sim->add_option("--object", sim.object_path, "Object spec JSON")->required();
    c_sim->add_option("--out", sim.out, "Signal CSV output")->required();
    c_sim->add_option("--amplitude", sim.amplitude_out, "Also write the FFT amplitude CSV");
    c_sim->add_option("--noise-sigma", sim.noise_sigma, "Additive Gaussian noise level")
        ->capture_default_str();
    c_sim->add_option("--noise-seed", sim.noise_seed, "Noise RNG seed")->capture_default_str();
    add_grid_options(c_sim, sim.grid);

    StackArgs stk;
    auto* c_stk = configure(app.add_subcommand("stack", "Signal CSV -> compensation stack"));
    c_stk->add_option("--signal", stk.signal_path, "Raw signal CSV")->required();
    c_stk->add_option("--out", stk.out, "Stack CSV output")->required();
    c_stk->add_option("--order", stk.order, "Nonlinearity order (2|3)")->capture_default_str();
    c_stk->add_option("--rows", stk.rows, "Ladder levels M")->capture_default_str();
    c_stk->add_option("--ladder-max", stk.ladder_max, "Ladder maximum (0 = order default)")
        ->capture_default_str();
    c_stk->add_flag("--normalize", stk.normalize, "Min-Max normalize the stack");
    c_stk->add_option("--pgm", stk.pgm, "Also write a PGM preview");
    add_grid_options(c_stk, stk.grid);

    GenDatasetArgs gen;
    auto* c_gen = configure(app.add_subcommand("gen-dataset", "Generate a training dataset"));
    c_gen->add_option("--count", gen.cfg.count, "Number of samples")->required();
    c_gen->add_option("--order", gen.cfg.order, "Nonlinearity order (2|3)")->capture_default_str();
    c_gen->add_option("--seed", gen.cfg.seed, "Dataset seed")->capture_default_str();
    c_gen->add_option("--out", gen.out, "Output .nlds path")->required();
    c_gen->add_option("--preset", gen.preset, "toy (16x256) or full (32x1024)")
        ->capture_default_str();
    c_gen->add_option("--rows", gen.cfg.stack_rows, "Stack rows M")->capture_default_str();
    c_gen->add_option("--min-interfaces", gen.cfg.min_interfaces)->capture_default_str();
    c_gen->add_option("--max-interfaces", gen.cfg.max_interfaces)->capture_default_str();
    c_gen->add_option("--a2-bound", gen.cfg.a2_bound, "Max |a2| in radians")->capture_default_str();
    c_gen->add_option("--a3-bound", gen.cfg.a3_bound, "Max |a3| in radians")->capture_default_str();
    c_gen->add_option("--ladder-max", gen.cfg.ladder_max, "Ladder maximum (0 = bound)")
        ->capture_default_str();
    add_grid_options(c_gen, gen.grid);

    TrainArgs tr;
    auto* c_tr = configure(app.add_subcommand("train", "Train a selective-removal network"));
    c_tr->add_option("--data", tr.data, "Training dataset (.nlds)")->required();
    c_tr->add_option("--val", tr.val, "Validation dataset (.nlds)")->required();
    c_tr->add_option("--out", tr.out, "Weight file output (.nlnw)")->required();
    c_tr->add_option("--report", tr.report, "Training report CSV");
    c_tr->add_option("--epochs", tr.opts.epochs)->capture_default_str();
    c_tr->add_option("--batch", tr.opts.batch_size)->capture_default_str();
    c_tr->add_option("--lr", tr.opts.lr)->capture_default_str();
    c_tr->add_option("--seed", tr.opts.seed)->capture_default_str();
    c_tr->add_option("--levels", tr.levels)->capture_default_str();
    c_tr->add_option("--base-channels", tr.base_channels)->capture_default_str();
    c_tr->add_option("--activation", tr.activation, "sigmoid|clamp")->capture_default_str();
    c_tr->add_option("--thresholds", tr.opts.thresholds, "GoF thresholds; first selects best epoch")
        ->capture_default_str();
    c_tr->add_option("--stop-at-gof", tr.opts.stop_at_gof,
                     "Stop once val GoF reaches this (0 = off)")
        ->capture_default_str();
    c_tr->add_flag("--deterministic", tr.deterministic,
                   "Force single-threaded numeric paths (the default build is single-threaded)");
    c_tr->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress");

    InferArgs inf;
    auto* c_inf = configure(app.add_subcommand("infer", "Run inference"));
    c_inf->add_option("--weights", inf.weights)->required();
    c_inf->add_option("--data", inf.data, "Dataset input (.nlds)");
    c_inf->add_option("--signal", inf.signal_path, "Raw signal CSV input");
    c_inf->add_option("--index", inf.index, "Dataset record index (-1 = all)")
        ->capture_default_str();
    c_inf->add_option("--ladder-max", inf.ladder_max)->capture_default_str();
    c_inf->add_option("--out", inf.out, "Predictions CSV")->required();
    add_grid_options(c_inf, inf.grid);

    EvalArgs ev;
    auto* c_ev = configure(app.add_subcommand("eval", "GoF evaluation report"));
    c_ev->add_option("--weights", ev.weights)->required();
    c_ev->add_option("--data", ev.data, "Test dataset (.nlds)")->required();
    c_ev->add_option("--out", ev.out, "Report CSV")->required();
    c_ev->add_option("--json", ev.json_out, "Report JSON");
    c_ev->add_option("--threshold", ev.thresholds, "GoF error thresholds")->capture_default_str();
    c_ev->add_flag("--allow-order-mismatch", ev.allow_order_mismatch,
                   "Proceed when dataset and network orders differ");

    CalibrateArgs cal;
    auto* c_cal = configure(app.add_subcommand("calibrate", "Two-mirror classical calibration"));
    c_cal->add_option("--signal1", cal.signal1, "Mirror signal CSV")->required();
    c_cal->add_option("--signal2", cal.signal2, "Mirror signal CSV (different depth)")->required();
    c_cal->add_option("--out", cal.out, "Calibration JSON output")->required();
    add_grid_options(c_cal, cal.grid);

    LinearizeArgs lin;
    auto* c_lin = configure(app.add_subcommand("linearize", "Apply a calibration to a signal"));
    c_lin->add_option("--signal", lin.signal_path)->required();
    c_lin->add_option("--calibration", lin.calibration)->required();
    c_lin->add_option("--out", lin.out, "Amplitude CSV output")->required();
    add_grid_options(c_lin, lin.grid);

    MirrorStudyArgs ms;
    auto* c_ms = configure(app.add_subcommand("mirror-study", "Mirror-at-N-depths comparison"));
    c_ms->add_option("--net1", ms.net1, "Order-2 network weights")->required();
    c_ms->add_option("--net2", ms.net2, "Order-3 network weights")->required();
    c_ms->add_option("--out", ms.out, "Study CSV output")->required();
    c_ms->add_option("--depths", ms.depth_count)->capture_default_str();
    c_ms->add_option("--depth-min", ms.depth_min, "0 = grid default");
    c_ms->add_option("--depth-max", ms.depth_max, "0 = grid default");
    c_ms->add_option("--system-a2-per-bin", ms.system_a2_per_bin, "<0 = 40 rad at deepest");
    c_ms->add_option("--system-a3-per-bin", ms.system_a3_per_bin, "<0 = 15 rad at deepest");
    c_ms->add_option("--interferometer-a2", ms.interferometer_a2)->capture_default_str();
    c_ms->add_option("--interferometer-a3", ms.interferometer_a3)->capture_default_str();
    c_ms->add_option("--calib-lo", ms.calib_lo, "Calibration mirror index")->capture_default_str();
    c_ms->add_option("--calib-hi", ms.calib_hi, "Calibration mirror index")->capture_default_str();
    c_ms->add_option("--ladder2-max", ms.ladder2_max)->capture_default_str();
    c_ms->add_option("--ladder3-max", ms.ladder3_max)->capture_default_str();
    c_ms->add_option("--sigma", ms.sigma)->capture_default_str();

    BScanArgs bs;
    auto* c_bs = configure(app.add_subcommand("bscan", "Assemble a 2D depth image"));
    c_bs->add_option("--pipeline", bs.pipeline, "raw|net1|net2|baseline")->capture_default_str();
    c_bs->add_option("--weights", bs.weights, "Network weights (net pipelines)");
    c_bs->add_option("--calibration", bs.calibration, "Calibration JSON (baseline pipeline)");
    c_bs->add_option("--lines", bs.lines_csv, "CSV of raw signal lines");
    c_bs->add_flag("--synthetic-glass", bs.synthetic_glass, "Generate the tilted-glass analog");
    c_bs->add_option("--glass-lines", bs.glass.lines)->capture_default_str();
    c_bs->add_option("--glass-front", bs.glass.front_start)->capture_default_str();
    c_bs->add_option("--glass-slope", bs.glass.front_slope)->capture_default_str();
    c_bs->add_option("--glass-thickness", bs.glass.thickness)->capture_default_str();
    c_bs->add_option("--glass-a2", bs.glass.object_a2)->capture_default_str();
    c_bs->add_option("--glass-a3", bs.glass.object_a3)->capture_default_str();
    c_bs->add_option("--system-a2-per-bin", bs.system_a2_per_bin)->capture_default_str();
    c_bs->add_option("--system-a3-per-bin", bs.system_a3_per_bin)->capture_default_str();
    c_bs->add_option("--ladder-max", bs.ladder_max)->capture_default_str();
    c_bs->add_option("--out", bs.out, "B-scan CSV output")->required();
    c_bs->add_option("--pgm", bs.pgm, "Also write a PGM image");
    add_grid_options(c_bs, bs.grid);

    BenchArgs bench;
    auto* c_bench = configure(app.add_subcommand("bench", "Stack build / inference timing"));
    c_bench->add_option("--weights", bench.weights, "Network weights for inference timing");
    c_bench->add_option("--rows", bench.rows)->capture_default_str();
    c_bench->add_option("--iters", bench.iters)->capture_default_str();
    c_bench->add_option("--out", bench.out, "Timings CSV");
    add_grid_options(c_bench, bench.grid);

    PlotArgs plot;
    auto* c_plot = configure(app.add_subcommand("plot", "CSV -> SVG line plot or heatmap"));
    c_plot->add_option("--csv", plot.csv, "Input CSV")->required();
    c_plot->add_option("--kind", plot.kind, "line|heatmap")->capture_default_str();
    c_plot->add_option("--out", plot.out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_sim->parsed()) {
            run_simulate(sim);
            write_snapshot(c_sim, sim.out);
        } else if (c_stk->parsed()) {
            run_stack(stk);
            write_snapshot(c_stk, stk.out);
        } else if (c_gen->parsed()) {
            run_gen_dataset(gen);
            write_snapshot(c_gen, gen.out);
        } else if (c_tr->parsed()) {
            run_train(tr);
            write_snapshot(c_tr, tr.out);
        } else if (c_inf->parsed()) {
            run_infer(inf);
            write_snapshot(c_inf, inf.out);
        } else if (c_ev->parsed()) {
            run_eval(ev);
            write_snapshot(c_ev, ev.out);
        } else if (c_cal->parsed()) {
            run_calibrate(cal);
            write_snapshot(c_cal, cal.out);
        } else if (c_lin->parsed()) {
            run_linearize(lin);
            write_snapshot(c_lin, lin.out);
        } else if (c_ms->parsed()) {
            run_mirror_study(ms);
            write_snapshot(c_ms, ms.out);
        } else if (c_bs->parsed()) {
            run_bscan(bs);
            write_snapshot(c_bs, bs.out);
        } else if (c_bench->parsed()) {
            run_bench(bench);
            if (!bench.out.empty()) write_snapshot(c_bench, bench.out);
        } else if (c_plot->parsed()) {
            run_plot(plot);
            write_snapshot(c_plot, plot.out);
        }
    } catch (const nlsel::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nlsel::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
