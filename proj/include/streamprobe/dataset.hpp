#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "streamprobe/binio.hpp"
#include "streamprobe/errors.hpp"

namespace streamprobe {

// One user-assistant exchange: a stream of per-token feature vectors plus an
// exchange-level binary label. Features are stored flat, row-major, and held
// as doubles in memory (the container stores them as f32).
struct ExchangeRecord {
    std::string exchange_id;
    int label = 0;  // 1 = harmful
    std::size_t token_count = 0;
    std::size_t dim = 0;
    std::vector<double> features;  // token_count * dim

    std::span<const double> token(std::size_t t) const {
        return {features.data() + t * dim, dim};
    }
    double& at(std::size_t t, std::size_t j) { return features[t * dim + j]; }
    double at(std::size_t t, std::size_t j) const { return features[t * dim + j]; }
};

struct Dataset {
    std::vector<ExchangeRecord> records;
    std::size_t feature_dim = 0;
    std::string provenance;
};

// Per-layer activation vectors for a single token, in fixed layer order.
struct LayerStack {
    std::vector<std::vector<double>> per_layer_features;
};

inline void validate_record(const ExchangeRecord& rec, std::size_t feature_dim) {
    if (rec.token_count < 1) {
        throw invalid_input_error("exchange '" + rec.exchange_id + "' has no tokens");
    }
    if (rec.dim != feature_dim || rec.features.size() != rec.token_count * feature_dim) {
        throw invalid_input_error("exchange '" + rec.exchange_id + "' feature dimension mismatch");
    }
    if (rec.label != 0 && rec.label != 1) {
        throw invalid_input_error("exchange '" + rec.exchange_id + "' label must be 0 or 1");
    }
    for (double v : rec.features) {
        if (!std::isfinite(v)) {
            throw invalid_input_error("exchange '" + rec.exchange_id + "' has non-finite feature");
        }
    }
}

inline void validate_dataset(const Dataset& ds) {
    if (ds.feature_dim < 1) throw invalid_input_error("feature_dim must be >= 1");
    for (const auto& rec : ds.records) validate_record(rec, ds.feature_dim);
}

// Concatenates per-layer activations into one feature vector, layer order
// preserved.
inline std::vector<double> concat_layer_features(const LayerStack& stack) {
    if (stack.per_layer_features.empty()) {
        throw invalid_input_error("concat_layer_features: empty layer stack");
    }
    std::vector<double> out;
    std::size_t total = 0;
    for (const auto& layer : stack.per_layer_features) total += layer.size();
    out.reserve(total);
    for (const auto& layer : stack.per_layer_features) {
        for (double v : layer) {
            if (!std::isfinite(v)) {
                throw invalid_input_error("concat_layer_features: non-finite activation");
            }
            out.push_back(v);
        }
    }
    return out;
}

namespace detail {

inline std::string escape_header_value(const std::string& v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

inline std::string unescape_header_value(const std::string& v) {
    std::string out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size()) {
            ++i;
            out += (v[i] == 'n') ? '\n' : v[i];
        } else {
            out += v[i];
        }
    }
    return out;
}

}  // namespace detail

inline constexpr char kDatasetMagic[4] = {'A', 'P', 'D', 'S'};
inline constexpr std::uint8_t kDatasetVersion = 0x01;

// Container layout (little-endian):
//   "APDS", version byte 0x01, u32 header length, UTF-8 header text with
//   key=value lines (feature_dim, count, dtype, provenance), then per record:
//   u32 token_count, u8 label, token_count*feature_dim f32 features row-major.
inline void write_dataset(const Dataset& ds, std::ostream& out) {
    validate_dataset(ds);

    std::string header;
    header += "feature_dim=" + std::to_string(ds.feature_dim) + "\n";
    header += "count=" + std::to_string(ds.records.size()) + "\n";
    header += "dtype=f32\n";
    header += "provenance=" + detail::escape_header_value(ds.provenance) + "\n";
    if (header.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw invalid_input_error("dataset header too large");
    }

    out.write(kDatasetMagic, 4);
    binio::write_u8(out, kDatasetVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    for (const auto& rec : ds.records) {
        binio::write_u32(out, static_cast<std::uint32_t>(rec.token_count));
        binio::write_u8(out, static_cast<std::uint8_t>(rec.label));
        for (double v : rec.features) binio::write_f32(out, static_cast<float>(v));
    }
    if (!out) throw io_error("write_dataset: sink failure");
}

// The container does not persist exchange ids; records are named
// positionally ("rec0", "rec1", ...) on read.
inline Dataset read_dataset(std::istream& in) {
    char magic[4];
    binio::read_bytes(in, magic, 4, "magic");
    if (std::string(magic, 4) != std::string(kDatasetMagic, 4)) {
        throw format_error("bad magic at offset 0: not a dataset container");
    }
    const std::uint8_t version = binio::read_u8(in, "version");
    if (version != kDatasetVersion) {
        throw format_error("unsupported dataset version " + std::to_string(version));
    }
    const std::uint32_t header_len = binio::read_u32(in, "header length");
    std::string header(header_len, '\0');
    binio::read_bytes(in, header.data(), header_len, "header");

    Dataset ds;
    std::size_t count = 0;
    bool saw_dim = false, saw_count = false, saw_dtype = false, saw_prov = false;
    std::size_t pos = 0;
    while (pos < header.size()) {
        std::size_t eol = header.find('\n', pos);
        if (eol == std::string::npos) eol = header.size();
        const std::string line = header.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw format_error("malformed header line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "feature_dim") {
            ds.feature_dim = std::stoull(value);
            saw_dim = true;
        } else if (key == "count") {
            count = std::stoull(value);
            saw_count = true;
        } else if (key == "dtype") {
            if (value != "f32") throw format_error("unsupported dtype '" + value + "'");
            saw_dtype = true;
        } else if (key == "provenance") {
            ds.provenance = detail::unescape_header_value(value);
            saw_prov = true;
        } else {
            throw format_error("unknown header key '" + key + "'");
        }
    }
    if (!saw_dim || !saw_count || !saw_dtype || !saw_prov) {
        throw format_error("header missing required keys");
    }
    if (ds.feature_dim < 1) throw format_error("feature_dim must be >= 1");

    ds.records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ExchangeRecord rec;
        rec.exchange_id = "rec" + std::to_string(i);
        try {
            rec.token_count = binio::read_u32(in, "token_count");
            rec.label = binio::read_u8(in, "label");
            rec.dim = ds.feature_dim;
            if (rec.token_count < 1) {
                throw format_error("record has zero tokens");
            }
            if (rec.label != 0 && rec.label != 1) {
                throw format_error("record label not in {0,1}");
            }
            rec.features.resize(rec.token_count * ds.feature_dim);
            for (std::size_t j = 0; j < rec.features.size(); ++j) {
                const float v = binio::read_f32(in, "feature");
                if (!std::isfinite(v)) {
                    throw format_error("non-finite feature at flat index " + std::to_string(j));
                }
                rec.features[j] = static_cast<double>(v);
            }
        } catch (const format_error& e) {
            throw format_error("record " + std::to_string(i) + ": " + e.what());
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace streamprobe
