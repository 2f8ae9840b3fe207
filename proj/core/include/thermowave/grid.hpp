#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace thermowave {

// Row-major 2D real grid used for every frame-shaped intermediate.
using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Binary mask (0/1) with the same layout as Grid.
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

}  // namespace thermowave
