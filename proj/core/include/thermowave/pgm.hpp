#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "thermowave/grid.hpp"

namespace thermowave {

// 16-bit binary greymap (P5, maxval 65535, big-endian samples).
struct GreyImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint16_t> pixels;

  friend bool operator==(const GreyImage&, const GreyImage&) = default;
};

// Bounds of the linear map from values to grey levels.
struct GreyScaling {
  double min = 0.0;
  double max = 0.0;
};

// Linear min-max scaling to 0..65535; a constant map becomes mid-grey 32768.
GreyImage to_grey(const Grid& values, GreyScaling* scaling = nullptr);

// Inverse of to_grey() up to quantisation.
Grid from_grey(const GreyImage& image, const GreyScaling& scaling);

std::vector<char> encode_pgm(const GreyImage& image);
GreyImage decode_pgm(std::span<const char> bytes);

void write_pgm(const GreyImage& image, const std::filesystem::path& path);
GreyImage read_pgm(const std::filesystem::path& path);

// Sidecar next to a rendered map: "<image>.scale" with `min` and `max` lines.
std::filesystem::path scaling_sidecar_path(const std::filesystem::path& image_path);
void write_scaling(const GreyScaling& scaling, const std::filesystem::path& path);
GreyScaling read_scaling(const std::filesystem::path& path);

// to_grey() + write_pgm() + sidecar.
void render_map(const Grid& values, const std::filesystem::path& image_path);

}  // namespace thermowave
