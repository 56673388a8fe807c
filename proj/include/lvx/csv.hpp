#pragma once

#include <istream>
#include <string>
#include <vector>

namespace lvx::csv {

// shortest round-trip representation of a double
std::string format(double v);
std::vector<std::string> split(const std::string& line, char sep = ',');
std::vector<std::vector<std::string>> read(std::istream& in);
// numeric table; a leading non-numeric row is treated as a header and skipped
std::vector<std::vector<double>> read_numeric(const std::string& path);

}  // namespace lvx::csv
