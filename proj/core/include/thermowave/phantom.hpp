#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "thermowave/datacube.hpp"
#include "thermowave/grid.hpp"

namespace thermowave {

struct FaultRecord {
  int id = 0;
  Pixel center;
  double diameter_mm = 0.0;
  double depth_mm = 0.0;
  friend bool operator==(const FaultRecord&, const FaultRecord&) = default;
};

struct GroundTruth {
  std::vector<FaultRecord> faults;
  std::vector<FrameWindow> background_windows;
  double px_per_mm = 1.0;
  int window_half_extent = kDefaultWindowHalfExtent;

  const FaultRecord& fault(int id) const;
  FrameWindow fault_window(const FaultRecord& f) const {
    return FrameWindow{f.center, window_half_extent};
  }
  // Disc of the fault (hard edge at the nominal radius).
  Mask disc_mask(const FaultRecord& f, int nx, int ny) const;
  // Mirror of every coordinate for a frame of `ny` columns.
  GroundTruth flipped_y(int ny) const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// The twelve holes of the plaster test sample: centre pixel, diameter and
// depth below the heated face. Ordered by id.
const std::vector<FaultRecord>& standard_faults();

// Eight background windows in the left margin (columns < 15); throws
// ConfigError if one would intersect a fault disc grown by the window extent.
std::vector<FrameWindow> default_background_windows(const std::vector<FaultRecord>& faults,
                                                    int nx, int ny, double px_per_mm,
                                                    int half_extent = kDefaultWindowHalfExtent);

GroundTruth standard_ground_truth(int nx = 160, int ny = 200);

// JSON file with px_per_mm, window_half_extent, faults[] and
// background_windows[]; see README.
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);
std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);

// Pulse duration -> number of pulses: 0.5 s -> 2048, 1 -> 1024, 2 -> 512,
// 5 -> 256, 10 -> 128. ConfigError for anything else.
int frames_for_excitation_time(double te_s);

struct PhantomConfig {
  int nx = 160;
  int ny = 200;
  double te_s = 5.0;
  std::uint64_t seed = 42;
  double noise_sigma = 0.12;
  std::array<Pixel, 2> lamp_centers{Pixel{80, 50}, Pixel{80, 150}};
  // Lamps beyond the first `lamp_count` are ignored.
  int lamp_count = 2;
  double lamp_sigma = 150.0;
  // Peak surface response of the illumination field to a saturated lamp.
  double illumination_gain = 1.0;
  // First-order time constant of the surface heating, seconds.
  double surface_tau_s = 20.0;
  double texture_amplitude = 0.035;
  // Gaussian correlation length of the pictorial texture, pixels.
  double texture_scale_px = 1.0;
  // Width of the unpainted plaster rim; the texture is absent there and
  // ramps in over the next `texture_border_px` pixels.
  int texture_border_px = 8;
  double defect_gain = 1.0;
  // Rise time per squared millimetre of depth, s/mm^2.
  double diffusivity_tau_mm2_s = 1.0;
  double px_per_mm = 1.0;
  bool include_faults = true;

  // Defaults with nx/ny and lamp positions derived from the frame size.
  static PhantomConfig standard(double te_s = 5.0, std::uint64_t seed = 42);
  void validate() const;
};

// Maximal-length LFSR output of the smallest order m with 2^m - 1 >= nt,
// truncated to nt bits. The start state is derived from `seed`.
ExcitationSequence generate_prbs(int nt, std::uint64_t seed, double te_s = 0.0);

// Primitive feedback taps (1-based bit positions) for LFSR orders 2..24.
std::vector<int> lfsr_taps(int order);

// Temperature rise over a fault after `t_s` seconds of heating.
double defect_response(double depth_mm, double diameter_mm, double t_s, const PhantomConfig& cfg);

// Smooth-edged disc weights in [0, 1] for a fault.
Grid fault_weight(const FaultRecord& fault, int nx, int ny, double px_per_mm);

// Spatial illumination field: sum of one isotropic Gaussian per lamp.
Grid illumination_field(const PhantomConfig& cfg);

struct Phantom {
  DataCube cube;
  ExcitationSequence excitation;
  GroundTruth truth;
};

Phantom generate_phantom(const PhantomConfig& cfg);

// A reflective patch whose intensity follows the excitation directly:
// amplitude * bit(t) plus Gaussian noise, added to a square region.
struct ReflectivePatch {
  FrameWindow region{Pixel{58, 105}, 6};
  double amplitude = 0.95;
  double noise_sigma = 0.05;
  std::uint64_t seed = 7;
};

DataCube add_reflective_patch(const DataCube& cube, const ExcitationSequence& excitation,
                              const ReflectivePatch& patch);

}  // namespace thermowave
