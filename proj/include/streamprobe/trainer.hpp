#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/metrics.hpp"
#include "streamprobe/objectives.hpp"
#include "streamprobe/probe.hpp"
#include "streamprobe/rng.hpp"
#include "streamprobe/streamer.hpp"

namespace streamprobe {

struct TrainConfig {
    double learning_rate = 5e-5;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 10;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t patience = 5;
    double val_fraction = 0.2;
    std::uint64_t seed = 42;
    std::size_t hidden = 100;  // MLP width for the rmattn objective

    void validate() const {
        if (!(learning_rate > 0)) throw config_error("learning_rate must be > 0");
        if (batch_size < 1) throw config_error("batch_size must be >= 1");
        if (!(weight_decay >= 0)) throw config_error("weight_decay must be >= 0");
        if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
            throw config_error("betas must be in [0,1)");
        }
        if (!(adam_eps > 0)) throw config_error("adam_eps must be > 0");
        if (patience < 1) throw config_error("patience must be >= 1");
        if (!(val_fraction > 0 && val_fraction < 1)) {
            throw config_error("val_fraction must be in (0,1)");
        }
    }
};

struct EpochStats {
    double train_loss = 0.0;
    double val_metric = 0.0;
    double wall_time_sec = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // meaningful only when epochs is non-empty
};

// Line-delimited export. Wall time is deliberately omitted so the log is
// byte-reproducible across reruns of the same seed.
inline void write_history_log(const TrainHistory& history, std::ostream& out) {
    char buf[128];
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "epoch=%zu train_loss=%.17g val_metric=%.17g\n", e,
                      history.epochs[e].train_loss, history.epochs[e].val_metric);
        out << buf;
    }
    out << "best_epoch=" << history.best_epoch << "\n";
}

// Deterministic shuffle split. The source must contain both classes and the
// split must leave both classes on each side; otherwise a config error.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double val_fraction,
                                                 std::uint64_t seed) {
    if (!(val_fraction > 0 && val_fraction < 1)) {
        throw config_error("split_dataset: val_fraction must be in (0,1)");
    }
    const std::size_t n = ds.records.size();
    if (n < 2) throw config_error("split_dataset: need at least 2 records");

    bool any_pos = false, any_neg = false;
    for (const auto& rec : ds.records) (rec.label == 1 ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) {
        throw config_error("split_dataset: stratification error, source has a single class");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);

    std::size_t val_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * val_fraction));
    val_count = std::clamp<std::size_t>(val_count, 1, n - 1);

    Dataset train, val;
    train.feature_dim = val.feature_dim = ds.feature_dim;
    train.provenance = ds.provenance + " [train split]";
    val.provenance = ds.provenance + " [val split]";
    for (std::size_t i = 0; i < n; ++i) {
        (i < val_count ? val : train).records.push_back(ds.records[order[i]]);
    }

    for (const Dataset* part : {&train, &val}) {
        bool pos = false, neg = false;
        for (const auto& rec : part->records) (rec.label == 1 ? pos : neg) = true;
        if (!pos || !neg) {
            throw config_error("split_dataset: stratification error, a split lost a class");
        }
    }
    return {std::move(train), std::move(val)};
}

// AdamW moment state over the flattened parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;
};

// Bias-corrected Adam update plus decoupled weight decay:
//   p -= lr * ( m_hat / (sqrt(v_hat) + eps) + wd * p )
inline void optimizer_step(std::vector<double>& params, const std::vector<double>& grads,
                           AdamState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size()) throw invalid_input_error("optimizer_step: size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate *
                     (m_hat / (std::sqrt(v_hat) + cfg.adam_eps) + cfg.weight_decay * params[i]);
    }
}

struct TrainResult {
    ProbeParams params;
    TrainHistory history;
};

// Validation score for early stopping: log-space AUROC of the streaming
// exchange scores, i.e. the same path evaluation uses.
inline double validation_metric(const ProbeParams& params, const AggregationConfig& agg,
                                Objective objective, const Dataset& val) {
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(val.records.size());
    labels.reserve(val.records.size());
    for (const auto& rec : val.records) {
        scores.push_back(score_exchange(params, agg, rec, objective));
        labels.push_back(rec.label);
    }
    return log_auroc(build_roc(scores, labels));
}

inline TrainResult train(const Dataset& dataset, Objective objective,
                         const AggregationConfig& agg_cfg, const TrainConfig& train_cfg) {
    train_cfg.validate();
    agg_cfg.validate();
    validate_dataset(dataset);

    auto [train_set, val_set] = split_dataset(dataset, train_cfg.val_fraction, train_cfg.seed);

    TrainResult result;
    result.params = init_params(objective, dataset.feature_dim, train_cfg.hidden,
                                train_cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    if (train_cfg.max_epochs == 0) return result;

    ProbeParams best_params = result.params;
    double best_metric = -std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    std::vector<std::size_t> order(train_set.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(train_cfg.seed ^ 0xD1B54A32D192ED03ULL);

    std::vector<ExchangeRecord> batch;
    AdamState state;
    for (std::size_t epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle(order, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t seen = 0, batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + train_cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(train_set.records[order[i]]);
            }
            const LossReport rep = batch_loss(result.params, agg_cfg, objective, batch);
            if (!std::isfinite(rep.loss)) {
                throw train_error("training diverged at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batch_index));
            }
            loss_sum += rep.loss * static_cast<double>(batch.size());
            seen += batch.size();

            std::vector<double> flat = result.params.flatten();
            optimizer_step(flat, rep.grads.flatten(), state, train_cfg);
            result.params.unflatten(flat);
            ++batch_index;
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(seen);
        stats.val_metric = validation_metric(result.params, agg_cfg, objective, val_set);
        stats.wall_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(stats);

        if (stats.val_metric > best_metric) {
            best_metric = stats.val_metric;
            best_params = result.params;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= train_cfg.patience) {
            break;
        }
    }

    result.params = best_params;
    result.history.best_epoch = best_epoch;
    return result;
}

}  // namespace streamprobe
