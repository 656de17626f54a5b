#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/probe.hpp"

namespace streamprobe {

struct StreamEmission {
    double raw_logit = 0.0;
    double window_mean = 0.0;
    double ema = 0.0;
};

// Causal per-token scorer: raw logit -> window mean -> EMA. Windows grow
// until M tokens have been seen so monitoring starts at token 1; the first
// emitted EMA equals the first window mean.
class StreamState {
public:
    StreamState(ProbeParams params, std::size_t window, double gamma,
                Objective objective = Objective::kTopkSegvar)
        : params_(std::move(params)), objective_(objective), window_(window), gamma_(gamma) {
        if (window_ < 1) throw invalid_input_error("stream: window must be >= 1");
        if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw invalid_input_error("stream: gamma in (0,1]");
    }

    StreamEmission push(std::span<const double> psi) {
        if (psi.size() != params_.dim()) {
            throw invalid_input_error("stream: feature dim mismatch");
        }
        double z;
        if (objective_ == Objective::kRmattn) {
            z = mlp_token_logit(params_, psi);
        } else {
            z = params_.b;
            for (std::size_t j = 0; j < psi.size(); ++j) z += params_.w[j] * psi[j];
        }
        buffer_.push_back(z);
        if (buffer_.size() > window_) buffer_.pop_front();
        // Summed front-to-back to match the batch window_means path exactly.
        double acc = 0.0;
        for (double v : buffer_) acc += v;
        const double zbar = acc / static_cast<double>(buffer_.size());

        ema_ = tokens_seen_ == 0 ? zbar : gamma_ * zbar + (1.0 - gamma_) * ema_;
        ++tokens_seen_;
        return {z, zbar, ema_};
    }

    std::size_t tokens_seen() const { return tokens_seen_; }

private:
    ProbeParams params_;
    Objective objective_;
    std::size_t window_;
    double gamma_;
    std::deque<double> buffer_;
    double ema_ = 0.0;
    std::size_t tokens_seen_ = 0;
};

inline StreamState stream_init(ProbeParams params, std::size_t window, double gamma,
                               Objective objective = Objective::kTopkSegvar) {
    return StreamState(std::move(params), window, gamma, objective);
}

// All per-token emissions for one exchange, by driving the streaming path.
inline std::vector<StreamEmission> stream_exchange(const ProbeParams& params,
                                                   const AggregationConfig& cfg,
                                                   const ExchangeRecord& rec,
                                                   Objective objective = Objective::kTopkSegvar) {
    StreamState state(params, cfg.window, cfg.gamma, objective);
    std::vector<StreamEmission> out;
    out.reserve(rec.token_count);
    for (std::size_t t = 0; t < rec.token_count; ++t) out.push_back(state.push(rec.token(t)));
    return out;
}

// Exchange score: maximum EMA-smoothed score over all tokens.
inline double score_exchange(const ProbeParams& params, const AggregationConfig& cfg,
                             const ExchangeRecord& rec,
                             Objective objective = Objective::kTopkSegvar) {
    StreamState state(params, cfg.window, cfg.gamma, objective);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < rec.token_count; ++t) {
        best = std::max(best, state.push(rec.token(t)).ema);
    }
    return best;
}

// Strict batch mode: EMA fold over the Eq.-style windows only (no growing
// prefix), for parity checks against the windowed definition.
inline std::vector<double> ema_fold(const std::vector<double>& window_means_seq, double gamma) {
    if (window_means_seq.empty()) throw invalid_input_error("ema_fold: empty input");
    std::vector<double> out(window_means_seq.size());
    out[0] = window_means_seq[0];
    for (std::size_t t = 1; t < window_means_seq.size(); ++t) {
        out[t] = gamma * window_means_seq[t] + (1.0 - gamma) * out[t - 1];
    }
    return out;
}

}  // namespace streamprobe
