#include "lvx/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace lvx::csv {

std::string format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split(line));
  }
  return rows;
}

std::vector<std::vector<double>> read_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto rows = read(in);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> vals;
    bool ok = true;
    for (const auto& f : rows[i]) {
      std::size_t pos = 0;
      try {
        vals.push_back(std::stod(f, &pos));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (i == 0) continue;
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": non-numeric field");
    }
    out.push_back(std::move(vals));
  }
  return out;
}

}  // namespace lvx::csv
