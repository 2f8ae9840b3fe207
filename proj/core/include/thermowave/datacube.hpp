#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "thermowave/grid.hpp"

namespace thermowave {

// A stack of nt thermal frames, each nx rows by ny columns, stored as 32-bit
// reals in frame-major, row-major order. Immutable after construction.
class DataCube {
 public:
  DataCube() = default;

  // Throws ShapeError if values.size() != nx*ny*nt or any extent is zero,
  // DataError if a value is non-finite or te_s is negative/non-finite.
  DataCube(int nx, int ny, int nt, double te_s, std::vector<float> values,
           bool flipped_y = false);

  // Builds a cube from double-precision frames (rounded to float).
  static DataCube from_frames(std::span<const Grid> frames, double te_s,
                              bool flipped_y = false);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nt() const { return nt_; }
  double te_s() const { return te_s_; }
  bool flipped_y() const { return flipped_y_; }
  std::size_t frame_size() const { return static_cast<std::size_t>(nx_) * ny_; }

  std::span<const float> values() const { return values_; }
  std::span<const float> frame_values(int t) const;
  float at(int t, int row, int col) const {
    return values_[static_cast<std::size_t>(t) * frame_size() +
                   static_cast<std::size_t>(row) * ny_ + col];
  }

  // Frame t widened to double precision.
  Grid frame(int t) const;

  // Temporal arithmetic mean of all frames, accumulated in double.
  Grid temporal_mean() const;

  // Returns a copy with every value multiplied by `factor`.
  DataCube scaled(double factor) const;

  friend bool operator==(const DataCube&, const DataCube&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  int nt_ = 0;
  double te_s_ = 0.0;
  bool flipped_y_ = false;
  std::vector<float> values_;
};

// On/off pattern driving the lamps; one frame is acquired per bit.
class ExcitationSequence {
 public:
  ExcitationSequence() = default;
  // Throws DataError unless bits are all 0/1 and contain both values.
  ExcitationSequence(std::vector<std::uint8_t> bits, double te_s);

  std::span<const std::uint8_t> bits() const { return bits_; }
  int size() const { return static_cast<int>(bits_.size()); }
  double te_s() const { return te_s_; }

  friend bool operator==(const ExcitationSequence&, const ExcitationSequence&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  double te_s_ = 0.0;
};

// Square (2*half_extent+1)^2 neighbourhood around a pixel.
struct FrameWindow {
  Pixel center;
  int half_extent = 5;

  int side() const { return 2 * half_extent + 1; }
  bool inside(int nx, int ny) const {
    return half_extent >= 0 && center.row - half_extent >= 0 &&
           center.col - half_extent >= 0 && center.row + half_extent < nx &&
           center.col + half_extent < ny;
  }
  friend bool operator==(const FrameWindow&, const FrameWindow&) = default;
};

inline constexpr int kDefaultWindowHalfExtent = 5;

// TIC1 cube container. See README for the byte layout.
DataCube read_cube(const std::filesystem::path& path);
void write_cube(const DataCube& cube, const std::filesystem::path& path);

// Serialized form used by write_cube; exposed for golden-file tests.
std::vector<char> encode_cube(const DataCube& cube);
DataCube decode_cube(std::span<const char> bytes);

// One ASCII '0'/'1' per line.
ExcitationSequence read_excitation(const std::filesystem::path& path, double te_s = 0.0);
void write_excitation(const ExcitationSequence& seq, const std::filesystem::path& path);

// Mirrors every frame left-right and toggles flipped_y.
DataCube flip_y(const DataCube& cube);

// Copies the window out of the frame; throws BoundsError when the window is
// not fully inside.
Grid extract_window(const Grid& frame, const FrameWindow& win);

}  // namespace thermowave
