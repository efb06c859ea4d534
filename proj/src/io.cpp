#include "hermite/io.hpp"

#include <array>
#include <charconv>

namespace hermite {

std::string format_number(double x)
{
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

} // namespace hermite
