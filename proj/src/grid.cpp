#include "fbsq/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbsq {

Grid::Grid(int n, double box_scale) : n_(n), box_scale_(box_scale) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid: n must be even and >= 8, got " + std::to_string(n));
  }
  if (!(box_scale > 0.0) || !std::isfinite(box_scale)) {
    throw std::invalid_argument("grid: box scale L must be positive and finite");
  }
}

Grid make_grid(int n, double box_scale) { return Grid(n, box_scale); }

IntVec3 Grid::indices(std::size_t flat) const {
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(flat / (n * n)), static_cast<int>((flat / n) % n),
          static_cast<int>(flat % n)};
}

IntVec3 Grid::wavevector(std::size_t flat) const {
  const auto idx = indices(flat);
  return {wavenumber(idx[0]), wavenumber(idx[1]), wavenumber(idx[2])};
}

Vec3 Grid::xi(std::size_t flat) const {
  const auto k = wavevector(flat);
  return {k[0] / box_scale_, k[1] / box_scale_, k[2] / box_scale_};
}

double Grid::xi_norm(std::size_t flat) const {
  const auto k = wavevector(flat);
  return std::sqrt(static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])) / box_scale_;
}

std::size_t Grid::mirror(std::size_t flat) const {
  const auto idx = indices(flat);
  return this->flat((n_ - idx[0]) % n_, (n_ - idx[1]) % n_, (n_ - idx[2]) % n_);
}

bool Grid::is_nyquist(std::size_t flat) const {
  const auto idx = indices(flat);
  const int half = n_ / 2;
  return idx[0] == half || idx[1] == half || idx[2] == half;
}

bool Grid::retained(std::size_t flat) const {
  const auto k = wavevector(flat);
  const int cut = dealias_cutoff();
  return std::abs(k[0]) <= cut && std::abs(k[1]) <= cut && std::abs(k[2]) <= cut;
}

double Grid::xi_max() const {
  const double kmax = n_ / 2 - 1;
  return std::sqrt(3.0) * kmax / box_scale_;
}

double Grid::cell_volume() const { return 1.0 / (box_scale_ * box_scale_ * box_scale_); }

double Grid::coordinate(int index) const {
  return 2.0 * std::numbers::pi * box_scale_ * index / n_;
}

}  // namespace fbsq
