#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lvx/simulator.hpp"

namespace lvx::sim::detail {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

std::vector<std::size_t> grid_reach(const SpaceTimeGrid& g);
std::vector<std::size_t> offset_map(const SpaceTimeGrid& g, const KernelTable& table);
double initial_at(const ModelSpec& m, double t, const std::vector<double>& x);
std::vector<double> additive_values(const ModelSpec& m, const SpaceTimeGrid& g, const KernelTable& table,
                                    const NoiseField& noise, const std::vector<std::pair<std::size_t, std::size_t>>& where);
PathField solve_with_table(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                           const SimConfig& cfg, const KernelTable& table, const std::vector<std::size_t>& offsets,
                           double force_shift);

}  // namespace lvx::sim::detail
