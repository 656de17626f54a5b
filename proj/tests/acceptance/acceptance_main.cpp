#include "streamprobe/streamprobe.hpp"
int main() { return 0; }
