#pragma once

#include <string>

namespace xbar {

// Scientific notation with 17 significant digits: parsing the string returns
// the identical double, which the map/log file formats rely on.
std::string format_double(double v);

// strtod with error checking.
double parse_double(const std::string& token);

}  // namespace xbar
