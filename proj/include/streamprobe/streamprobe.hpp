#pragma once

// Umbrella header.

#include "streamprobe/cipher.hpp"
#include "streamprobe/dataset.hpp"
#include "streamprobe/errors.hpp"
#include "streamprobe/metrics.hpp"
#include "streamprobe/objectives.hpp"
#include "streamprobe/probe.hpp"
#include "streamprobe/rng.hpp"
#include "streamprobe/streamer.hpp"
#include "streamprobe/synthgen.hpp"
#include "streamprobe/trainer.hpp"
