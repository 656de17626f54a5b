#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/rng.hpp"

namespace streamprobe {

// Synthetic activation streams with planted evidence. Positive exchanges
// carry R contiguous spans of length L along a fixed unit direction; hard
// negatives carry S isolated single-token spikes of the same amplitude, so
// the per-token maximum is uninformative while window aggregation separates
// the classes. S = 0 makes negatives pure noise.
struct SynthConfig {
    std::size_t feature_dim = 16;
    std::size_t t_min = 320;
    std::size_t t_max = 480;
    std::uint64_t evidence_direction_seed = 9001;
    double signal_amplitude = 4.0;
    std::size_t spans_per_exchange = 3;   // R
    std::size_t span_length = 8;          // L
    std::size_t spike_count = 24;         // S
    double noise_scale = 1.0;
    double class_balance = 0.5;           // fraction of positive exchanges
    std::size_t count = 512;
    std::uint64_t seed = 7;

    void validate() const {
        if (feature_dim < 2) throw config_error("synth: feature_dim must be >= 2");
        if (span_length < 1) throw config_error("synth: span_length must be >= 1");
        if (t_min < span_length) throw config_error("synth: t_min must be >= span_length");
        if (t_max < t_min) throw config_error("synth: t_max must be >= t_min");
        if (spans_per_exchange < 1) throw config_error("synth: spans_per_exchange must be >= 1");
        if (count < 1) throw config_error("synth: count must be >= 1");
        if (!(class_balance >= 0.0 && class_balance <= 1.0)) {
            throw config_error("synth: class_balance must be in [0,1]");
        }
        if (!std::isfinite(signal_amplitude) || !std::isfinite(noise_scale) || noise_scale < 0) {
            throw config_error("synth: amplitudes must be finite, noise_scale >= 0");
        }
        if (spans_per_exchange * span_length > t_min) {
            throw config_error("synth: infeasible placement, R*L exceeds t_min");
        }
        if (spike_count > t_min) {
            throw config_error("synth: infeasible placement, spike_count exceeds t_min");
        }
    }
};

// The planted unit direction u for a given seed.
inline std::vector<double> evidence_direction(std::size_t feature_dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(feature_dim);
    double norm = 0.0;
    for (double& v : u) {
        v = rng.next_gaussian();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    return u;
}

inline Dataset generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::vector<double> u = evidence_direction(cfg.feature_dim, cfg.evidence_direction_seed);
    const std::size_t positives =
        static_cast<std::size_t>(std::llround(static_cast<double>(cfg.count) * cfg.class_balance));

    Dataset ds;
    ds.feature_dim = cfg.feature_dim;
    ds.provenance = "synthgen seed=" + std::to_string(cfg.seed) +
                    " dir_seed=" + std::to_string(cfg.evidence_direction_seed) +
                    " d=" + std::to_string(cfg.feature_dim) + " T=[" + std::to_string(cfg.t_min) +
                    "," + std::to_string(cfg.t_max) + "] a=" + std::to_string(cfg.signal_amplitude) +
                    " R=" + std::to_string(cfg.spans_per_exchange) +
                    " L=" + std::to_string(cfg.span_length) +
                    " S=" + std::to_string(cfg.spike_count) +
                    " noise=" + std::to_string(cfg.noise_scale);
    ds.records.reserve(cfg.count);

    for (std::size_t i = 0; i < cfg.count; ++i) {
        Rng rng = Rng::substream(cfg.seed, i);
        ExchangeRecord rec;
        rec.exchange_id = "rec" + std::to_string(i);
        rec.label = i < positives ? 1 : 0;
        rec.dim = cfg.feature_dim;
        rec.token_count =
            static_cast<std::size_t>(rng.next_int(static_cast<std::int64_t>(cfg.t_min),
                                                  static_cast<std::int64_t>(cfg.t_max)));
        rec.features.resize(rec.token_count * cfg.feature_dim);
        for (double& v : rec.features) v = cfg.noise_scale * rng.next_gaussian();

        auto plant = [&](std::size_t token) {
            for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
                rec.at(token, j) += cfg.signal_amplitude * u[j];
            }
        };

        if (rec.label == 1) {
            // One span per equal-width block keeps spans disjoint without
            // rejection sampling.
            const std::size_t r = cfg.spans_per_exchange;
            for (std::size_t s = 0; s < r; ++s) {
                const std::size_t lo = s * rec.token_count / r;
                const std::size_t hi = (s + 1) * rec.token_count / r;
                const std::size_t slack = (hi - lo) - cfg.span_length;
                const std::size_t start =
                    lo + static_cast<std::size_t>(rng.next_below(slack + 1));
                for (std::size_t t = start; t < start + cfg.span_length; ++t) plant(t);
            }
        } else if (cfg.spike_count > 0) {
            const std::size_t s_count = cfg.spike_count;
            for (std::size_t s = 0; s < s_count; ++s) {
                const std::size_t lo = s * rec.token_count / s_count;
                const std::size_t hi = (s + 1) * rec.token_count / s_count;
                plant(lo + static_cast<std::size_t>(rng.next_below(hi - lo)));
            }
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// Named profiles. "separable" is the sanity profile (no hard negatives);
// "keyword_bias" makes the per-token max misleading while Top-K window
// aggregation separates the classes.
inline SynthConfig profile(const std::string& name) {
    if (name == "separable") {
        SynthConfig cfg;
        cfg.feature_dim = 8;
        cfg.t_min = 64;
        cfg.t_max = 128;
        cfg.signal_amplitude = 4.0;
        cfg.spans_per_exchange = 2;
        cfg.span_length = 8;
        cfg.spike_count = 0;
        cfg.noise_scale = 1.0;
        cfg.count = 200;
        return cfg;
    }
    if (name == "keyword_bias") {
        SynthConfig cfg;
        cfg.feature_dim = 16;
        cfg.t_min = 320;
        cfg.t_max = 480;
        cfg.signal_amplitude = 4.0;
        cfg.spans_per_exchange = 3;
        cfg.span_length = 8;
        // Matches the positives' planted-token count so the max-token
        // statistic carries no label information.
        cfg.spike_count = 24;
        cfg.noise_scale = 1.0;
        cfg.count = 512;
        return cfg;
    }
    throw config_error("unknown synth profile '" + name + "'");
}

}  // namespace streamprobe
