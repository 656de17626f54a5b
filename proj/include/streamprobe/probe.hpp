#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "streamprobe/binio.hpp"
#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/rng.hpp"

namespace streamprobe {

enum class Objective {
    kMean,
    kSoftmax,
    kAttention,
    kRmattn,
    kSwim,
    kTopk,
    kTopkSegvar,
};

inline const char* objective_name(Objective o) {
    switch (o) {
        case Objective::kMean: return "mean";
        case Objective::kSoftmax: return "softmax";
        case Objective::kAttention: return "attention";
        case Objective::kRmattn: return "rmattn";
        case Objective::kSwim: return "swim";
        case Objective::kTopk: return "topk";
        case Objective::kTopkSegvar: return "topk-segvar";
    }
    return "?";
}

inline Objective objective_from_name(const std::string& name) {
    for (Objective o : {Objective::kMean, Objective::kSoftmax, Objective::kAttention,
                        Objective::kRmattn, Objective::kSwim, Objective::kTopk,
                        Objective::kTopkSegvar}) {
        if (name == objective_name(o)) return o;
    }
    throw invalid_input_error("unknown objective '" + name + "'");
}

inline bool objective_uses_attention(Objective o) {
    return o == Objective::kAttention || o == Objective::kRmattn;
}

inline bool objective_uses_mlp(Objective o) { return o == Objective::kRmattn; }

enum class SegvarMode { kOff, kNegativesOnly, kAll };

inline const char* segvar_mode_name(SegvarMode m) {
    switch (m) {
        case SegvarMode::kOff: return "off";
        case SegvarMode::kNegativesOnly: return "neg";
        case SegvarMode::kAll: return "all";
    }
    return "?";
}

inline SegvarMode segvar_mode_from_name(const std::string& name) {
    if (name == "off") return SegvarMode::kOff;
    if (name == "neg") return SegvarMode::kNegativesOnly;
    if (name == "all") return SegvarMode::kAll;
    throw invalid_input_error("unknown segvar mode '" + name + "'");
}

// Objective/inference hyperparameters. Defaults follow the reference
// configuration: M=16, K=8, lambda=0.01, tau_s=2, tau=1, gamma=0.1.
struct AggregationConfig {
    std::size_t window = 16;          // M, sliding-window length in tokens
    std::size_t top_k = 8;            // K, supportive-window count
    double lambda = 0.01;             // segment-variance weight
    double tau_s = 2.0;               // segment-variance temperature
    double tau = 1.0;                 // soft window-weighting temperature
    SegvarMode segvar_mode = SegvarMode::kNegativesOnly;
    std::size_t rmattn_window = 16;   // w, rolling attention window width
    double epsilon = 1e-8;            // denominator stabilizer
    double gamma = 0.1;               // inference-time EMA coefficient

    void validate() const {
        if (window < 1) throw config_error("window must be >= 1");
        if (top_k < 1) throw config_error("top_k must be >= 1");
        if (lambda < 0) throw config_error("lambda must be >= 0");
        if (!(tau_s > 0)) throw config_error("tau_s must be > 0");
        if (!(tau > 0)) throw config_error("tau must be > 0");
        if (rmattn_window < 1) throw config_error("rmattn_window must be >= 1");
        if (!(epsilon > 0)) throw config_error("epsilon must be > 0");
        if (!(gamma > 0 && gamma <= 1)) throw config_error("gamma must be in (0,1]");
    }
};

// Trainable parameters. The attention block exists for the attention and
// rmattn objectives; the MLP block (which replaces the linear token head)
// only for rmattn. Doubles throughout.
struct ProbeParams {
    std::vector<double> w;   // d
    double b = 0.0;
    bool has_attn = false;
    std::vector<double> attn_w;  // d
    double attn_b = 0.0;
    bool has_mlp = false;
    std::size_t hidden = 0;      // H
    std::vector<double> mlp_w1;  // H x d, row-major
    std::vector<double> mlp_b1;  // H
    std::vector<double> mlp_w2;  // H
    double mlp_b2 = 0.0;

    std::size_t dim() const { return w.size(); }

    static ProbeParams zeros_like(const ProbeParams& p) {
        ProbeParams g;
        g.w.assign(p.w.size(), 0.0);
        g.has_attn = p.has_attn;
        if (p.has_attn) g.attn_w.assign(p.attn_w.size(), 0.0);
        g.has_mlp = p.has_mlp;
        g.hidden = p.hidden;
        if (p.has_mlp) {
            g.mlp_w1.assign(p.mlp_w1.size(), 0.0);
            g.mlp_b1.assign(p.mlp_b1.size(), 0.0);
            g.mlp_w2.assign(p.mlp_w2.size(), 0.0);
        }
        return g;
    }

    // Flat view in declaration order: w, b, attn_w, attn_b, mlp_w1, mlp_b1,
    // mlp_w2, mlp_b2. Used by the optimizer and finite-difference checks.
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(w.size() + 1 + (has_attn ? attn_w.size() + 1 : 0) +
                    (has_mlp ? mlp_w1.size() + mlp_b1.size() + mlp_w2.size() + 1 : 0));
        out.insert(out.end(), w.begin(), w.end());
        out.push_back(b);
        if (has_attn) {
            out.insert(out.end(), attn_w.begin(), attn_w.end());
            out.push_back(attn_b);
        }
        if (has_mlp) {
            out.insert(out.end(), mlp_w1.begin(), mlp_w1.end());
            out.insert(out.end(), mlp_b1.begin(), mlp_b1.end());
            out.insert(out.end(), mlp_w2.begin(), mlp_w2.end());
            out.push_back(mlp_b2);
        }
        return out;
    }

    void unflatten(std::span<const double> flat) {
        std::size_t i = 0;
        for (double& v : w) v = flat[i++];
        b = flat[i++];
        if (has_attn) {
            for (double& v : attn_w) v = flat[i++];
            attn_b = flat[i++];
        }
        if (has_mlp) {
            for (double& v : mlp_w1) v = flat[i++];
            for (double& v : mlp_b1) v = flat[i++];
            for (double& v : mlp_w2) v = flat[i++];
            mlp_b2 = flat[i++];
        }
        if (i != flat.size()) throw invalid_input_error("unflatten: size mismatch");
    }
};

// Seeded init, uniform in [-1/sqrt(d), 1/sqrt(d)]. Zero init is degenerate
// for top-k selection and attention weighting.
inline ProbeParams init_params(Objective objective, std::size_t dim, std::size_t hidden,
                               std::uint64_t seed) {
    if (dim < 1) throw invalid_input_error("init_params: dim must be >= 1");
    ProbeParams p;
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    auto draw = [&] { return rng.next_double(-s, s); };
    p.w.resize(dim);
    for (double& v : p.w) v = draw();
    p.b = draw();
    if (objective_uses_attention(objective)) {
        p.has_attn = true;
        p.attn_w.resize(dim);
        for (double& v : p.attn_w) v = draw();
        p.attn_b = draw();
    }
    if (objective_uses_mlp(objective)) {
        if (hidden < 1) throw invalid_input_error("init_params: rmattn needs hidden >= 1");
        p.has_mlp = true;
        p.hidden = hidden;
        p.mlp_w1.resize(hidden * dim);
        p.mlp_b1.resize(hidden);
        p.mlp_w2.resize(hidden);
        for (double& v : p.mlp_w1) v = draw();
        for (double& v : p.mlp_b1) v = draw();
        for (double& v : p.mlp_w2) v = draw();
        p.mlp_b2 = draw();
    }
    return p;
}

// z_t = <w, psi_t> + b for every token, causally.
inline std::vector<double> probe_logits(const ProbeParams& params, const ExchangeRecord& rec) {
    if (rec.dim != params.dim()) {
        throw invalid_input_error("probe_logits: feature dim " + std::to_string(rec.dim) +
                                  " does not match probe dim " + std::to_string(params.dim()));
    }
    std::vector<double> z(rec.token_count);
    for (std::size_t t = 0; t < rec.token_count; ++t) {
        const auto psi = rec.token(t);
        double acc = params.b;
        for (std::size_t j = 0; j < psi.size(); ++j) acc += params.w[j] * psi[j];
        z[t] = acc;
    }
    return z;
}

// Two-layer ReLU MLP token head used by the rmattn objective.
inline double mlp_token_logit(const ProbeParams& p, std::span<const double> psi) {
    double out = p.mlp_b2;
    for (std::size_t h = 0; h < p.hidden; ++h) {
        double a = p.mlp_b1[h];
        const double* row = p.mlp_w1.data() + h * p.dim();
        for (std::size_t j = 0; j < psi.size(); ++j) a += row[j] * psi[j];
        if (a > 0) out += p.mlp_w2[h] * a;
    }
    return out;
}

// Token logits under the objective's token head: the MLP for rmattn, the
// linear probe otherwise.
inline std::vector<double> token_logits(const ProbeParams& params, Objective objective,
                                        const ExchangeRecord& rec) {
    if (objective != Objective::kRmattn) return probe_logits(params, rec);
    if (rec.dim != params.dim()) throw invalid_input_error("token_logits: feature dim mismatch");
    std::vector<double> z(rec.token_count);
    for (std::size_t t = 0; t < rec.token_count; ++t) z[t] = mlp_token_logit(params, rec.token(t));
    return z;
}

// Sliding-window means over the last M logits. For t >= M the value is the
// mean of z[t-M+1..t]; sequences shorter than M produce a single mean over
// all tokens. Output length max(1, T-M+1). Windows are summed directly so
// the batch and streaming paths agree bit for bit.
inline std::vector<double> window_means(const std::vector<double>& z, std::size_t window) {
    if (z.empty()) throw invalid_input_error("window_means: empty logit sequence");
    if (window < 1) throw invalid_input_error("window_means: window must be >= 1");
    const std::size_t t_count = z.size();
    if (t_count < window) {
        double acc = 0.0;
        for (double v : z) acc += v;
        return {acc / static_cast<double>(t_count)};
    }
    std::vector<double> out(t_count - window + 1);
    for (std::size_t t = 0; t + window <= t_count; ++t) {
        double acc = 0.0;
        for (std::size_t j = t; j < t + window; ++j) acc += z[j];
        out[t] = acc / static_cast<double>(window);
    }
    return out;
}

inline constexpr char kParamsMagic[4] = {'A', 'P', 'P', 'M'};
inline constexpr std::uint8_t kParamsVersion = 0x01;

// Parameter container: "APPM", version 0x01, u32 header length, header text
// (objective, feature_dim, hidden_dim, has_attn, has_mlp), then the f64
// blocks in declaration order.
inline void save_params(const ProbeParams& p, Objective objective, std::ostream& out) {
    std::string header;
    header += std::string("objective=") + objective_name(objective) + "\n";
    header += "feature_dim=" + std::to_string(p.dim()) + "\n";
    header += "hidden_dim=" + std::to_string(p.hidden) + "\n";
    header += std::string("has_attn=") + (p.has_attn ? "1" : "0") + "\n";
    header += std::string("has_mlp=") + (p.has_mlp ? "1" : "0") + "\n";

    out.write(kParamsMagic, 4);
    binio::write_u8(out, kParamsVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : p.flatten()) binio::write_f64(out, v);
    if (!out) throw io_error("save_params: sink failure");
}

struct LoadedParams {
    ProbeParams params;
    Objective objective = Objective::kMean;
};

inline LoadedParams load_params(std::istream& in) {
    char magic[4];
    binio::read_bytes(in, magic, 4, "magic");
    if (std::string(magic, 4) != std::string(kParamsMagic, 4)) {
        throw format_error("bad magic: not a probe parameter container");
    }
    const std::uint8_t version = binio::read_u8(in, "version");
    if (version != kParamsVersion) {
        throw format_error("unsupported params version " + std::to_string(version));
    }
    const std::uint32_t header_len = binio::read_u32(in, "header length");
    std::string header(header_len, '\0');
    binio::read_bytes(in, header.data(), header_len, "header");

    LoadedParams out;
    std::size_t dim = 0;
    std::size_t pos = 0;
    while (pos < header.size()) {
        std::size_t eol = header.find('\n', pos);
        if (eol == std::string::npos) eol = header.size();
        const std::string line = header.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw format_error("malformed params header line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "objective") {
            out.objective = objective_from_name(value);
        } else if (key == "feature_dim") {
            dim = std::stoull(value);
        } else if (key == "hidden_dim") {
            out.params.hidden = std::stoull(value);
        } else if (key == "has_attn") {
            out.params.has_attn = value == "1";
        } else if (key == "has_mlp") {
            out.params.has_mlp = value == "1";
        } else {
            throw format_error("unknown params header key '" + key + "'");
        }
    }
    if (dim < 1) throw format_error("params header missing feature_dim");

    ProbeParams& p = out.params;
    p.w.resize(dim);
    for (double& v : p.w) v = binio::read_f64(in, "w");
    p.b = binio::read_f64(in, "b");
    if (p.has_attn) {
        p.attn_w.resize(dim);
        for (double& v : p.attn_w) v = binio::read_f64(in, "attn_w");
        p.attn_b = binio::read_f64(in, "attn_b");
    }
    if (p.has_mlp) {
        if (p.hidden < 1) throw format_error("params header has_mlp without hidden_dim");
        p.mlp_w1.resize(p.hidden * dim);
        p.mlp_b1.resize(p.hidden);
        p.mlp_w2.resize(p.hidden);
        for (double& v : p.mlp_w1) v = binio::read_f64(in, "mlp_w1");
        for (double& v : p.mlp_b1) v = binio::read_f64(in, "mlp_b1");
        for (double& v : p.mlp_w2) v = binio::read_f64(in, "mlp_w2");
        p.mlp_b2 = binio::read_f64(in, "mlp_b2");
    }
    for (double v : p.flatten()) {
        if (!std::isfinite(v)) throw format_error("non-finite parameter value");
    }
    return out;
}

}  // namespace streamprobe
