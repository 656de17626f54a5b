#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streamprobe/errors.hpp"
#include "streamprobe/objectives.hpp"

namespace streamprobe {

struct RocPoint {
    double threshold = 0.0;  // score >= threshold predicts positive
    double fpr = 0.0;
    double tpr = 0.0;
};

// Empirical step ROC. Points are ordered by descending threshold (ascending
// FPR/TPR); tied scores collapse to a single point; the (inf,0,0) and
// (min,1,1) endpoints are always present.
struct RocCurve {
    std::vector<RocPoint> points;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

inline RocCurve build_roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw metric_error("build_roc: size mismatch");
    if (scores.empty()) throw metric_error("build_roc: empty input");
    std::size_t p = 0, n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!std::isfinite(scores[i])) throw metric_error("build_roc: non-finite score");
        if (labels[i] == 1) {
            ++p;
        } else if (labels[i] == 0) {
            ++n;
        } else {
            throw metric_error("build_roc: label not in {0,1}");
        }
    }
    if (p == 0 || n == 0) {
        throw metric_error("build_roc: both classes required (P=" + std::to_string(p) +
                           ", N=" + std::to_string(n) + ")");
    }

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.positives = p;
    curve.negatives = n;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n),
                                static_cast<double>(tp) / static_cast<double>(p)});
    }
    return curve;
}

// Trapezoidal area; with tie-collapsed points this equals the Mann-Whitney
// statistic with half-credit for ties.
inline double auroc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

// Step-function TPR at a given FPR: highest TPR among points with FPR <= f.
inline double tpr_at_fpr_step(const RocCurve& curve, double fpr) {
    double best = 0.0;
    for (const auto& pt : curve.points) {
        if (pt.fpr <= fpr) best = std::max(best, pt.tpr);
    }
    return best;
}

// TPR at the most permissive threshold whose FPR stays within the target.
inline double tpr_at_fpr(const RocCurve& curve, double fpr_target = 0.01) {
    if (!(fpr_target >= 0.0 && fpr_target <= 1.0)) {
        throw metric_error("tpr_at_fpr: target outside [0,1]");
    }
    return tpr_at_fpr_step(curve, fpr_target);
}

// Area of TPR against log10(FPR) over [fpr_lo, fpr_hi], normalized to [0,1].
// The step ROC is sampled on a log-spaced grid; both the area and the
// normalizer are accumulated from the same trapezoids so the perfect
// classifier evaluates to exactly 1.
inline double log_auroc(const RocCurve& curve, double fpr_lo = 1e-3, double fpr_hi = 1e-1,
                        std::size_t grid_points = 512) {
    if (!(fpr_lo > 0.0 && fpr_hi > fpr_lo && fpr_hi <= 1.0)) {
        throw metric_error("log_auroc: invalid FPR band");
    }
    if (grid_points < 2) throw metric_error("log_auroc: grid too small");
    const double x_lo = std::log10(fpr_lo);
    const double x_hi = std::log10(fpr_hi);
    double area = 0.0, norm = 0.0;
    double prev_x = x_lo;
    double prev_y = tpr_at_fpr_step(curve, fpr_lo);
    for (std::size_t i = 1; i < grid_points; ++i) {
        const double x =
            x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double y = tpr_at_fpr_step(curve, std::pow(10.0, x));
        area += (x - prev_x) * (prev_y + y) * 0.5;
        norm += (x - prev_x);
        prev_x = x;
        prev_y = y;
    }
    return area / norm;
}

// Exact piecewise integration of the step ROC against the log10 measure.
// Reference mode for validating the grid evaluation.
inline double log_auroc_exact(const RocCurve& curve, double fpr_lo = 1e-3, double fpr_hi = 1e-1) {
    if (!(fpr_lo > 0.0 && fpr_hi > fpr_lo && fpr_hi <= 1.0)) {
        throw metric_error("log_auroc_exact: invalid FPR band");
    }
    // Collect the FPR breakpoints of the step function inside the band.
    std::vector<double> cuts{fpr_lo};
    for (const auto& pt : curve.points) {
        if (pt.fpr > fpr_lo && pt.fpr < fpr_hi) cuts.push_back(pt.fpr);
    }
    cuts.push_back(fpr_hi);
    std::sort(cuts.begin(), cuts.end());
    double area = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double lo = cuts[i - 1], hi = cuts[i];
        if (hi <= lo) continue;
        // Step value on (lo, hi): TPR attained at FPR <= lo.
        area += tpr_at_fpr_step(curve, lo) * (std::log10(hi) - std::log10(lo));
    }
    return area / (std::log10(fpr_hi) - std::log10(fpr_lo));
}

// Token-level activation metric: for each candidate threshold, the fraction
// of positive exchanges whose maximum token score falls below it.
inline std::vector<std::pair<double, double>> token_fnr_curve(
    std::span<const double> positive_max_scores, std::span<const double> thresholds) {
    if (positive_max_scores.empty()) {
        throw metric_error("token_fnr_curve: no positive exchanges");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(thresholds.size());
    for (double th : thresholds) {
        std::size_t misses = 0;
        for (double s : positive_max_scores) {
            if (s < th) ++misses;
        }
        out.emplace_back(th, static_cast<double>(misses) /
                                 static_cast<double>(positive_max_scores.size()));
    }
    return out;
}

struct DispersionStats {
    double logit_variance = 0.0;
    double probability_variance = 0.0;
};

// Population variance of the window logits and of their sigmoid
// probabilities (sigmoid of zbar/tau_s; tau_s = 1 gives plain probabilities).
inline DispersionStats evidence_dispersion(std::span<const double> window_logits,
                                           double tau_s = 1.0) {
    if (window_logits.empty()) throw metric_error("evidence_dispersion: empty input");
    const double n = static_cast<double>(window_logits.size());
    double zm = 0.0, pm = 0.0;
    for (double z : window_logits) {
        zm += z;
        pm += sigmoid(z / tau_s);
    }
    zm /= n;
    pm /= n;
    DispersionStats out;
    for (double z : window_logits) {
        const double dz = z - zm;
        const double dp = sigmoid(z / tau_s) - pm;
        out.logit_variance += dz * dz;
        out.probability_variance += dp * dp;
    }
    out.logit_variance /= n;
    out.probability_variance /= n;
    return out;
}

// Mean per-exchange dispersion over {all, positives, negatives}.
struct DispersionSummary {
    DispersionStats all;
    DispersionStats positives;
    DispersionStats negatives;
};

inline DispersionSummary summarize_dispersion(std::span<const DispersionStats> per_exchange,
                                              std::span<const int> labels) {
    if (per_exchange.size() != labels.size() || per_exchange.empty()) {
        throw metric_error("summarize_dispersion: size mismatch or empty");
    }
    DispersionSummary s;
    std::size_t np = 0, nn = 0;
    for (std::size_t i = 0; i < per_exchange.size(); ++i) {
        s.all.logit_variance += per_exchange[i].logit_variance;
        s.all.probability_variance += per_exchange[i].probability_variance;
        if (labels[i] == 1) {
            s.positives.logit_variance += per_exchange[i].logit_variance;
            s.positives.probability_variance += per_exchange[i].probability_variance;
            ++np;
        } else {
            s.negatives.logit_variance += per_exchange[i].logit_variance;
            s.negatives.probability_variance += per_exchange[i].probability_variance;
            ++nn;
        }
    }
    const double n = static_cast<double>(per_exchange.size());
    s.all.logit_variance /= n;
    s.all.probability_variance /= n;
    if (np > 0) {
        s.positives.logit_variance /= static_cast<double>(np);
        s.positives.probability_variance /= static_cast<double>(np);
    }
    if (nn > 0) {
        s.negatives.logit_variance /= static_cast<double>(nn);
        s.negatives.probability_variance /= static_cast<double>(nn);
    }
    return s;
}

}  // namespace streamprobe
