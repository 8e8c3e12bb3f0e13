#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsel/dataset.hpp"
#include "nlsel/errors.hpp"
#include "nlsel/metrics.hpp"
#include "nlsel/net.hpp"
#include "nlsel/prng.hpp"

namespace nlsel {

/// Mean absolute error.
template <typename T>
double mae_loss(const std::vector<T>& pred, const std::vector<T>& target) {
    if (pred.size() != target.size()) throw DataError("mae: length mismatch");
    if (pred.empty()) throw DataError("mae: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += std::abs(static_cast<double>(pred[i]) - static_cast<double>(target[i]));
    return acc / static_cast<double>(pred.size());
}

/// One Adam update (beta1 = 0.9, beta2 = 0.999, eps = 1e-8, bias-corrected).
/// Rejects non-finite gradients without touching the state.
template <typename T>
void adam_step(Network<T>& net, const Gradients<T>& grads, double lr) {
    if (grads.size() != net.params.size()) throw DataError("adam: gradient shape mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].same_shape(net.params[i])) throw DataError("adam: gradient shape mismatch");
        for (T g : grads[i].w)
            if (!std::isfinite(static_cast<double>(g))) throw NumericError("adam: non-finite gradient");
        for (T g : grads[i].bias)
            if (!std::isfinite(static_cast<double>(g))) throw NumericError("adam: non-finite gradient");
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    net.adam_step_count += 1;
    const double t = static_cast<double>(net.adam_step_count);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    auto update = [&](std::vector<T>& p, std::vector<T>& m, std::vector<T>& v,
                      const std::vector<T>& g) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = static_cast<double>(g[k]);
            const double mk = beta1 * static_cast<double>(m[k]) + (1.0 - beta1) * gk;
            const double vk = beta2 * static_cast<double>(v[k]) + (1.0 - beta2) * gk * gk;
            m[k] = static_cast<T>(mk);
            v[k] = static_cast<T>(vk);
            const double mhat = mk / bc1;
            const double vhat = vk / bc2;
            p[k] = static_cast<T>(static_cast<double>(p[k]) - lr * mhat / (std::sqrt(vhat) + eps));
        }
    };
    for (std::size_t i = 0; i < grads.size(); ++i) {
        update(net.params[i].w, net.adam_m[i].w, net.adam_v[i].w, grads[i].w);
        update(net.params[i].bias, net.adam_m[i].bias, net.adam_v[i].bias, grads[i].bias);
    }
}

/// Copies a Sample's stack into a (1, 1, rows, width) tensor.
template <typename T>
Tensor4<T> sample_input_tensor(const Sample& s, int rows, int width) {
    if (s.input.size() != static_cast<std::size_t>(rows) * width)
        throw DataError("sample stack shape does not match network config");
    Tensor4<T> t(1, 1, rows, width);
    for (std::size_t i = 0; i < s.input.size(); ++i) t.data[i] = static_cast<T>(s.input[i]);
    return t;
}

/// Inference on one sample; returns the predicted normalized amplitude.
template <typename T>
std::vector<double> predict(const Network<T>& net, const Sample& s, Workspace<T>& ws) {
    const auto& out = net.forward(sample_input_tensor<T>(s, net.cfg.rows, net.cfg.width), ws);
    std::vector<double> pred(out.data.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = static_cast<double>(out.data[i]);
    return pred;
}

template <typename T>
std::vector<double> predict(const Network<T>& net, const Sample& s) {
    Workspace<T> ws;
    return predict(net, s, ws);
}

/// MAE loss + gradients for one batch of samples (fixed index order, so the
/// result does not depend on scheduling).
template <typename T>
double batch_gradients(const Network<T>& net, const std::vector<Sample>& samples,
                       const std::vector<std::size_t>& batch, Workspace<T>& ws,
                       Gradients<T>& grads) {
    const int rows = net.cfg.rows, width = net.cfg.width;
    Tensor4<T> input(static_cast<int>(batch.size()), 1, rows, width);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& s = samples[batch[b]];
        if (s.input.size() != static_cast<std::size_t>(rows) * width)
            throw DataError("train: stack shape does not match network config");
        std::copy(s.input.begin(), s.input.end(), input.plane(static_cast<int>(b), 0));
    }
    const auto& out = net.forward(input, ws);
    // d(MAE)/d(pred): sign / (batch * width); subgradient at 0 is 0
    Tensor4<T> d_out(out.b, out.c, out.h, out.w);
    const T scale = T(1) / static_cast<T>(batch.size() * static_cast<std::size_t>(width));
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& target = samples[batch[b]].target;
        const T* pred = out.plane(static_cast<int>(b), 0);
        T* d = d_out.plane(static_cast<int>(b), 0);
        for (int i = 0; i < width; ++i) {
            const T diff = pred[i] - static_cast<T>(target[static_cast<std::size_t>(i)]);
            loss += std::abs(static_cast<double>(diff));
            d[i] = diff > T(0) ? scale : (diff < T(0) ? -scale : T(0));
        }
    }
    net.backward(ws, std::move(d_out), grads);
    return loss / static_cast<double>(batch.size() * static_cast<std::size_t>(width));
}

struct EpochRow {
    int epoch = 0;
    double train_mae = 0.0;
    double val_mae = 0.0;
    std::vector<double> val_gof; // one per threshold
};

struct TrainReport {
    std::vector<double> thresholds;
    std::vector<EpochRow> rows;
    int best_epoch = -1; // 1-based; -1 when no epochs ran

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot open for writing: " + path);
        out << "epoch,train_mae,val_mae";
        for (double t : thresholds) out << ",val_gof_" << format_double(t);
        out << '\n';
        for (const auto& r : rows) {
            out << r.epoch << ',' << format_double(r.train_mae) << ',' << format_double(r.val_mae);
            for (double g : r.val_gof) out << ',' << format_double(g);
            out << '\n';
        }
        out << "best_epoch," << best_epoch << ",\n";
    }
};

struct TrainOptions {
    int epochs = 30;
    int batch_size = 8;
    double lr = 2e-4;
    std::vector<double> thresholds{0.01, 0.001}; // first one selects the best epoch
    uint64_t seed = 0;
    /// stop once best validation mean GoF at thresholds[0] reaches this; 0 = off
    double stop_at_gof = 0.0;
    std::function<void(const EpochRow&)> on_epoch;
};

/// Trains in place and restores the epoch with the best validation mean GoF
/// at thresholds[0] before returning.
template <typename T>
TrainReport train(Network<T>& net, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainOptions& opts) {
    if (opts.epochs < 0 || opts.batch_size < 1) throw DataError("train: bad options");
    TrainReport report;
    report.thresholds = opts.thresholds;
    if (opts.epochs == 0) return report;
    if (train_set.empty() || val_set.empty()) throw DataError("train: empty dataset");

    Xoshiro256 shuffle_rng(opts.seed ^ 0x5eedf00dULL);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Workspace<T> ws;
    Gradients<T> grads = net.make_gradients();
    std::vector<ConvParam<T>> best_params = net.params;
    std::vector<ConvParam<T>> best_m = net.adam_m, best_v = net.adam_v;
    uint64_t best_step = net.adam_step_count;
    double best_gof = -1.0;

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        // Fisher-Yates with the run seed
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        double train_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(opts.batch_size)) {
            const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(opts.batch_size));
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(at),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            for (auto& g : grads) g.zero();
            const double loss = batch_gradients(net, train_set, batch, ws, grads);
            if (!std::isfinite(loss))
                throw NumericError("train: NaN loss at epoch " + std::to_string(epoch) +
                                   ", step " + std::to_string(at / static_cast<std::size_t>(opts.batch_size)));
            adam_step(net, grads, opts.lr);
            train_loss += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }

        EpochRow row;
        row.epoch = epoch;
        row.train_mae = train_loss / static_cast<double>(seen);
        row.val_gof.assign(opts.thresholds.size(), 0.0);
        double val_mae = 0.0;
        for (const auto& s : val_set) {
            const auto pred = predict(net, s, ws);
            std::vector<double> gt(s.target.begin(), s.target.end());
            val_mae += mae_loss(pred, gt);
            for (std::size_t t = 0; t < opts.thresholds.size(); ++t)
                row.val_gof[t] += gof(pred, gt, opts.thresholds[t]);
        }
        row.val_mae = val_mae / static_cast<double>(val_set.size());
        for (auto& g : row.val_gof) g /= static_cast<double>(val_set.size());
        report.rows.push_back(row);
        if (opts.on_epoch) opts.on_epoch(row);

        if (row.val_gof[0] > best_gof) {
            best_gof = row.val_gof[0];
            report.best_epoch = epoch;
            best_params = net.params;
            best_m = net.adam_m;
            best_v = net.adam_v;
            best_step = net.adam_step_count;
        }
        if (opts.stop_at_gof > 0.0 && best_gof >= opts.stop_at_gof) break;
    }

    net.params = std::move(best_params);
    net.adam_m = std::move(best_m);
    net.adam_v = std::move(best_v);
    net.adam_step_count = best_step;
    return report;
}

/// evaluate() wrapper for a trained network.
template <typename T>
std::vector<GofReport> evaluate_network(const Network<T>& net, const std::vector<Sample>& samples,
                                        const std::vector<double>& thresholds,
                                        bool order_mismatch = false) {
    Workspace<T> ws;
    return evaluate([&](const Sample& s) { return predict(net, s, ws); }, samples, thresholds,
                    order_mismatch);
}

} // namespace nlsel
