#pragma once

#include <stdexcept>
#include <string>

namespace streamprobe {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller violated an operation precondition (bad dimension, bad range, ...).
struct invalid_input_error : error {
    using error::error;
};

// Underlying stream/file failure.
struct io_error : error {
    using error::error;
};

// Malformed container bytes or config document.
struct format_error : error {
    using error::error;
};

// Metric preconditions not met (e.g. single-class input).
struct metric_error : error {
    using error::error;
};

// Infeasible or inconsistent configuration values.
struct config_error : error {
    using error::error;
};

// Training diverged or could not proceed.
struct train_error : error {
    using error::error;
};

// Malformed ciphertext.
struct decode_error : error {
    using error::error;
};

}  // namespace streamprobe
