#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/probe.hpp"

namespace streamprobe {

// ---------------------------------------------------------------------------
// numeric primitives
// ---------------------------------------------------------------------------

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Binary cross-entropy of label y against sigmoid(logit), in the log-sum-exp
// form: finite for |logit| well beyond 1e4.
inline double bce_from_logit(double y, double logit) {
    return std::max(logit, 0.0) - y * logit + std::log1p(std::exp(-std::abs(logit)));
}

// d/dlogit of bce_from_logit.
inline double bce_grad_from_logit(double y, double logit) { return sigmoid(logit) - y; }

// Max-subtracted softmax of values/temperature.
inline std::vector<double> softmax(std::span<const double> values, double temperature = 1.0) {
    if (values.empty()) throw invalid_input_error("softmax: empty input");
    const double vmax = *std::max_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp((values[i] - vmax) / temperature);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

// ---------------------------------------------------------------------------
// loss report
// ---------------------------------------------------------------------------

struct LossReport {
    double loss = 0.0;
    ProbeParams grads;
    // The aggregated logit sequence the loss consumed: sliding-window means
    // for the window objectives, per-token logits for mean/softmax/attention.
    std::vector<double> per_window_logits;
};

namespace detail {

// dL/dz -> (dL/dw, dL/db) for the linear token head.
inline void accumulate_linear(const ExchangeRecord& rec, const std::vector<double>& dz,
                              ProbeParams& grads) {
    for (std::size_t t = 0; t < rec.token_count; ++t) {
        const auto psi = rec.token(t);
        const double g = dz[t];
        if (g == 0.0) continue;
        for (std::size_t j = 0; j < psi.size(); ++j) grads.w[j] += g * psi[j];
        grads.b += g;
    }
}

// dL/dzbar -> dL/dz through the window-mean map.
inline std::vector<double> window_backprop(std::size_t token_count, std::size_t window,
                                           const std::vector<double>& dzbar) {
    std::vector<double> dz(token_count, 0.0);
    if (token_count < window) {
        const double g = dzbar[0] / static_cast<double>(token_count);
        for (double& v : dz) v += g;
        return dz;
    }
    const double inv_m = 1.0 / static_cast<double>(window);
    for (std::size_t t = 0; t < dzbar.size(); ++t) {
        if (dzbar[t] == 0.0) continue;
        const double g = dzbar[t] * inv_m;
        for (std::size_t j = t; j < t + window; ++j) dz[j] += g;
    }
    return dz;
}

inline double label_of(const ExchangeRecord& rec) { return static_cast<double>(rec.label); }

// Indices of the k' = min(k, n) largest values; ties broken toward the
// earliest index. Returned in ascending index order so downstream sums are
// deterministic.
inline std::vector<std::size_t> topk_indices(const std::vector<double>& values, std::size_t k) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    order.resize(std::min(k, values.size()));
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// token-level objectives
// ---------------------------------------------------------------------------

// BCE on the arithmetic mean of token logits.
inline LossReport loss_mean(const ProbeParams& params, const ExchangeRecord& rec) {
    const std::vector<double> z = probe_logits(params, rec);
    const double t_count = static_cast<double>(z.size());
    double u = 0.0;
    for (double v : z) u += v;
    u /= t_count;

    const double y = detail::label_of(rec);
    LossReport rep;
    rep.loss = bce_from_logit(y, u);
    rep.grads = ProbeParams::zeros_like(params);
    const double g = bce_grad_from_logit(y, u) / t_count;
    std::vector<double> dz(z.size(), g);
    detail::accumulate_linear(rec, dz, rep.grads);
    rep.per_window_logits = z;
    return rep;
}

// BCE on the self-weighted logit sum, weights = softmax of the logits.
inline LossReport loss_softmax_token(const ProbeParams& params, const ExchangeRecord& rec) {
    const std::vector<double> z = probe_logits(params, rec);
    const std::vector<double> w = softmax(z);
    double u = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) u += w[t] * z[t];

    const double y = detail::label_of(rec);
    LossReport rep;
    rep.loss = bce_from_logit(y, u);
    rep.grads = ProbeParams::zeros_like(params);
    const double g = bce_grad_from_logit(y, u);
    // du/dz_t = w_t (1 + z_t - u): the weight itself plus the softmax shift.
    std::vector<double> dz(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) dz[t] = g * w[t] * (1.0 + z[t] - u);
    detail::accumulate_linear(rec, dz, rep.grads);
    rep.per_window_logits = z;
    return rep;
}

// BCE on the attention-weighted logit sum; weights come from a separate
// linear projection m_t = <attn_w, psi_t> + attn_b.
inline LossReport loss_attention(const ProbeParams& params, const ExchangeRecord& rec) {
    if (!params.has_attn) throw invalid_input_error("loss_attention: params lack attention block");
    const std::vector<double> z = probe_logits(params, rec);
    std::vector<double> m(rec.token_count);
    for (std::size_t t = 0; t < rec.token_count; ++t) {
        const auto psi = rec.token(t);
        double acc = params.attn_b;
        for (std::size_t j = 0; j < psi.size(); ++j) acc += params.attn_w[j] * psi[j];
        m[t] = acc;
    }
    const std::vector<double> w = softmax(m);
    double u = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) u += w[t] * z[t];

    const double y = detail::label_of(rec);
    LossReport rep;
    rep.loss = bce_from_logit(y, u);
    rep.grads = ProbeParams::zeros_like(params);
    const double g = bce_grad_from_logit(y, u);
    std::vector<double> dz(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) dz[t] = g * w[t];
    detail::accumulate_linear(rec, dz, rep.grads);
    for (std::size_t t = 0; t < z.size(); ++t) {
        const double dm = g * w[t] * (z[t] - u);
        if (dm == 0.0) continue;
        const auto psi = rec.token(t);
        for (std::size_t j = 0; j < psi.size(); ++j) rep.grads.attn_w[j] += dm * psi[j];
        rep.grads.attn_b += dm;
    }
    rep.per_window_logits = z;
    return rep;
}

// ---------------------------------------------------------------------------
// window-level objectives
// ---------------------------------------------------------------------------

// Max of rolling attention-weighted means. Token logits come from the MLP
// head; each width-w window is summarized with softmax(m) weights; the loss
// is BCE on the maximum window summary, and the gradient follows the argmax
// window only.
inline LossReport loss_rmattn(const ProbeParams& params, const AggregationConfig& cfg,
                              const ExchangeRecord& rec) {
    if (!params.has_attn || !params.has_mlp) {
        throw invalid_input_error("loss_rmattn: params lack attention or mlp block");
    }
    const std::size_t t_count = rec.token_count;
    const std::size_t width = std::min(cfg.rmattn_window, t_count);

    std::vector<double> z(t_count), m(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        const auto psi = rec.token(t);
        z[t] = mlp_token_logit(params, psi);
        double acc = params.attn_b;
        for (std::size_t j = 0; j < psi.size(); ++j) acc += params.attn_w[j] * psi[j];
        m[t] = acc;
    }

    const std::size_t n_windows = t_count - width + 1;
    std::vector<double> zbar(n_windows);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_t = 0;
    std::vector<double> best_alpha;
    for (std::size_t t = 0; t < n_windows; ++t) {
        const std::vector<double> alpha = softmax(std::span(m).subspan(t, width));
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) acc += alpha[j] * z[t + j];
        zbar[t] = acc;
        if (acc > best) {
            best = acc;
            best_t = t;
            best_alpha = alpha;
        }
    }

    const double y = detail::label_of(rec);
    LossReport rep;
    rep.loss = bce_from_logit(y, best);
    rep.grads = ProbeParams::zeros_like(params);
    const double g = bce_grad_from_logit(y, best);

    const std::size_t d = params.dim();
    for (std::size_t j = 0; j < width; ++j) {
        const std::size_t tok = best_t + j;
        const auto psi = rec.token(tok);
        // attention path
        const double dm = g * best_alpha[j] * (z[tok] - best);
        for (std::size_t i = 0; i < d; ++i) rep.grads.attn_w[i] += dm * psi[i];
        rep.grads.attn_b += dm;
        // mlp path
        const double dzj = g * best_alpha[j];
        for (std::size_t h = 0; h < params.hidden; ++h) {
            double a = params.mlp_b1[h];
            const double* row = params.mlp_w1.data() + h * d;
            for (std::size_t i = 0; i < d; ++i) a += row[i] * psi[i];
            if (a <= 0) continue;
            rep.grads.mlp_w2[h] += dzj * a;
            const double da = dzj * params.mlp_w2[h];
            double* grow = rep.grads.mlp_w1.data() + h * d;
            for (std::size_t i = 0; i < d; ++i) grow[i] += da * psi[i];
            rep.grads.mlp_b1[h] += da;
        }
        rep.grads.mlp_b2 += dzj;
    }
    rep.per_window_logits = std::move(zbar);
    return rep;
}

// Softmax-weighted per-window BCE over sliding-window means; gradients flow
// through both the weights and the BCE terms.
inline LossReport loss_swim(const ProbeParams& params, const AggregationConfig& cfg,
                            const ExchangeRecord& rec) {
    const std::vector<double> z = probe_logits(params, rec);
    const std::vector<double> zbar = window_means(z, cfg.window);
    const std::vector<double> w = softmax(zbar, cfg.tau);
    const double y = detail::label_of(rec);

    std::vector<double> bce(zbar.size());
    double loss = 0.0;
    for (std::size_t t = 0; t < zbar.size(); ++t) {
        bce[t] = bce_from_logit(y, zbar[t]);
        loss += w[t] * bce[t];
    }

    LossReport rep;
    rep.loss = loss;
    rep.grads = ProbeParams::zeros_like(params);
    std::vector<double> dzbar(zbar.size());
    for (std::size_t t = 0; t < zbar.size(); ++t) {
        dzbar[t] = w[t] * (bce_grad_from_logit(y, zbar[t]) + (bce[t] - loss) / cfg.tau);
    }
    const std::vector<double> dz = detail::window_backprop(rec.token_count, cfg.window, dzbar);
    detail::accumulate_linear(rec, dz, rep.grads);
    rep.per_window_logits = zbar;
    return rep;
}

namespace detail {

struct TopkForward {
    double z_seq = 0.0;
    std::vector<std::size_t> selected;
};

inline TopkForward topk_forward(const std::vector<double>& zbar, std::size_t k) {
    TopkForward fwd;
    fwd.selected = topk_indices(zbar, k);
    double acc = 0.0;
    for (std::size_t idx : fwd.selected) acc += zbar[idx];
    fwd.z_seq = acc / static_cast<double>(fwd.selected.size());
    return fwd;
}

}  // namespace detail

// BCE on the mean of the K highest window means.
inline LossReport loss_topk(const ProbeParams& params, const AggregationConfig& cfg,
                            const ExchangeRecord& rec) {
    const std::vector<double> z = probe_logits(params, rec);
    const std::vector<double> zbar = window_means(z, cfg.window);
    const auto fwd = detail::topk_forward(zbar, cfg.top_k);
    const double y = detail::label_of(rec);

    LossReport rep;
    rep.loss = bce_from_logit(y, fwd.z_seq);
    rep.grads = ProbeParams::zeros_like(params);
    const double g = bce_grad_from_logit(y, fwd.z_seq) / static_cast<double>(fwd.selected.size());
    std::vector<double> dzbar(zbar.size(), 0.0);
    for (std::size_t idx : fwd.selected) dzbar[idx] = g;
    const std::vector<double> dz = detail::window_backprop(rec.token_count, cfg.window, dzbar);
    detail::accumulate_linear(rec, dz, rep.grads);
    rep.per_window_logits = zbar;
    return rep;
}

// ---------------------------------------------------------------------------
// segment variance regularizer
// ---------------------------------------------------------------------------

// Soft-weighted variance of the window-mean sequence:
//   p_t = sigmoid(zbar_t / tau_s)
//   mu  = sum(p_t zbar_t) / (sum(p_t) + eps)
//   pen = sum(p_t (zbar_t - mu)^2) / (sum(p_t) + eps)
inline double segvar_penalty(const std::vector<double>& window_logits, double tau_s,
                             double epsilon) {
    if (window_logits.empty()) throw invalid_input_error("segvar_penalty: empty input");
    if (!(tau_s > 0)) throw invalid_input_error("segvar_penalty: tau_s must be > 0");
    if (!(epsilon > 0)) throw invalid_input_error("segvar_penalty: epsilon must be > 0");
    double p_sum = 0.0, a_sum = 0.0;
    std::vector<double> p(window_logits.size());
    for (std::size_t t = 0; t < window_logits.size(); ++t) {
        p[t] = sigmoid(window_logits[t] / tau_s);
        p_sum += p[t];
        a_sum += p[t] * window_logits[t];
    }
    const double denom = p_sum + epsilon;
    const double mu = a_sum / denom;
    double v = 0.0;
    for (std::size_t t = 0; t < window_logits.size(); ++t) {
        const double r = window_logits[t] - mu;
        v += p[t] * r * r;
    }
    return v / denom;
}

namespace detail {

// Value and d(penalty)/d(zbar) with full differentiation through the weights.
inline double segvar_with_grad(const std::vector<double>& zbar, double tau_s, double epsilon,
                               std::vector<double>& dzbar) {
    const std::size_t n = zbar.size();
    std::vector<double> p(n);
    double p_sum = 0.0, a_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        p[t] = sigmoid(zbar[t] / tau_s);
        p_sum += p[t];
        a_sum += p[t] * zbar[t];
    }
    const double denom = p_sum + epsilon;
    const double mu = a_sum / denom;
    double v = 0.0, pr_sum = 0.0;
    std::vector<double> r(n);
    for (std::size_t t = 0; t < n; ++t) {
        r[t] = zbar[t] - mu;
        v += p[t] * r[t] * r[t];
        pr_sum += p[t] * r[t];
    }
    const double penalty = v / denom;

    dzbar.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double q = p[t] * (1.0 - p[t]) / tau_s;  // dp_t/dzbar_t
        const double dmu = (q * r[t] + p[t]) / denom;
        const double dv = q * r[t] * r[t] + 2.0 * p[t] * r[t] - 2.0 * pr_sum * dmu;
        dzbar[t] = (dv - penalty * q) / denom;
    }
    return penalty;
}

}  // namespace detail

// Top-K BCE plus lambda * gate(y) * SegVar over the same window means.
// gate(y) is (1-y) in negatives-only mode, 1 in all mode, 0 when off.
inline LossReport loss_combined(const ProbeParams& params, const AggregationConfig& cfg,
                                const ExchangeRecord& rec) {
    const std::vector<double> z = probe_logits(params, rec);
    const std::vector<double> zbar = window_means(z, cfg.window);
    const auto fwd = detail::topk_forward(zbar, cfg.top_k);
    const double y = detail::label_of(rec);

    double gate = 0.0;
    switch (cfg.segvar_mode) {
        case SegvarMode::kOff: gate = 0.0; break;
        case SegvarMode::kNegativesOnly: gate = 1.0 - y; break;
        case SegvarMode::kAll: gate = 1.0; break;
    }
    const double scale = cfg.lambda * gate;

    LossReport rep;
    rep.grads = ProbeParams::zeros_like(params);
    rep.loss = bce_from_logit(y, fwd.z_seq);
    const double g = bce_grad_from_logit(y, fwd.z_seq) / static_cast<double>(fwd.selected.size());
    std::vector<double> dzbar(zbar.size(), 0.0);
    for (std::size_t idx : fwd.selected) dzbar[idx] = g;

    if (scale != 0.0) {
        std::vector<double> dseg;
        const double penalty = detail::segvar_with_grad(zbar, cfg.tau_s, cfg.epsilon, dseg);
        rep.loss += scale * penalty;
        for (std::size_t t = 0; t < zbar.size(); ++t) dzbar[t] += scale * dseg[t];
    }

    const std::vector<double> dz = detail::window_backprop(rec.token_count, cfg.window, dzbar);
    detail::accumulate_linear(rec, dz, rep.grads);
    rep.per_window_logits = zbar;
    return rep;
}

// ---------------------------------------------------------------------------
// dispatch and batching
// ---------------------------------------------------------------------------

inline LossReport exchange_loss(const ProbeParams& params, const AggregationConfig& cfg,
                                Objective objective, const ExchangeRecord& rec) {
    switch (objective) {
        case Objective::kMean: return loss_mean(params, rec);
        case Objective::kSoftmax: return loss_softmax_token(params, rec);
        case Objective::kAttention: return loss_attention(params, rec);
        case Objective::kRmattn: return loss_rmattn(params, cfg, rec);
        case Objective::kSwim: return loss_swim(params, cfg, rec);
        case Objective::kTopk: return loss_topk(params, cfg, rec);
        case Objective::kTopkSegvar: return loss_combined(params, cfg, rec);
    }
    throw invalid_input_error("exchange_loss: unknown objective");
}

// Mean loss and gradients over a span of records, reduced in record order.
inline LossReport batch_loss(const ProbeParams& params, const AggregationConfig& cfg,
                             Objective objective, std::span<const ExchangeRecord> records) {
    if (records.empty()) throw invalid_input_error("batch_loss: empty batch");
    LossReport total;
    total.grads = ProbeParams::zeros_like(params);
    std::vector<double> grad_acc(total.grads.flatten().size(), 0.0);
    for (const auto& rec : records) {
        const LossReport rep = exchange_loss(params, cfg, objective, rec);
        total.loss += rep.loss;
        const std::vector<double> flat = rep.grads.flatten();
        for (std::size_t i = 0; i < flat.size(); ++i) grad_acc[i] += flat[i];
    }
    const double inv = 1.0 / static_cast<double>(records.size());
    total.loss *= inv;
    for (double& v : grad_acc) v *= inv;
    total.grads.unflatten(grad_acc);
    return total;
}

}  // namespace streamprobe
