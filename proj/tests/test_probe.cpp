#include <catch2/catch_amalgamated.hpp>
#include "streamprobe/streamprobe.hpp"
