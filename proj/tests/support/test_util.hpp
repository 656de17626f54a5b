#pragma once

#include <string>
#include <vector>

#include "streamprobe/dataset.hpp"
#include "streamprobe/rng.hpp"

namespace streamprobe::testing {

inline ExchangeRecord random_record(Rng& rng, std::size_t tokens, std::size_t dim, int label,
                                    const std::string& id = "rec") {
    ExchangeRecord rec;
    rec.exchange_id = id;
    rec.label = label;
    rec.token_count = tokens;
    rec.dim = dim;
    rec.features.resize(tokens * dim);
    for (double& v : rec.features) v = rng.next_gaussian();
    return rec;
}

// Features snapped to the f32 grid so container round-trips are exact.
inline ExchangeRecord random_record_f32(Rng& rng, std::size_t tokens, std::size_t dim, int label,
                                        const std::string& id = "rec") {
    ExchangeRecord rec = random_record(rng, tokens, dim, label, id);
    for (double& v : rec.features) v = static_cast<double>(static_cast<float>(v));
    return rec;
}

}  // namespace streamprobe::testing
