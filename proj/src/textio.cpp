#include "xbar/textio.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace xbar {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

double parse_double(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str()) throw std::runtime_error("not a number: '" + token + "'");
    return v;
}

}  // namespace xbar
