#pragma once

#include <string>

namespace hermite {

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double x);

} // namespace hermite
