#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sccl/volume.hpp"

namespace sccl {

/// Multilayer circuit board: a substrate slab carrying thin conductive layers
/// with traces and pads, joined by vertical vias.
struct PcbParams {
  std::vector<double> layer_zs;  // mm; empty -> three layers spread through the board
  double board_z0 = 0, board_z1 = 0;  // mm; equal -> central 80% of the grid height
  double trace_attn = 1.0;            // mm^-1
  double substrate_attn = 0.05;       // mm^-1
  std::uint64_t seed = 1;
  int layer_thickness_vox = 1;
  int footprint_margin_vox = 0;  // uncovered border around the board, in voxels
  int traces_per_layer = 14;
  int pads_per_layer = 8;
  int vias_per_gap = 4;
};

Volume make_pcb_phantom(const GridSpec& grid, const PcbParams& params);

/// Layer heights actually used by make_pcb_phantom (defaults resolved).
std::vector<double> resolved_layer_zs(const GridSpec& grid, const PcbParams& params);

Volume make_point(const GridSpec& grid, std::array<int, 3> index, double value);

/// z-aligned cylinder centered on the grid, boundary voxels antialiased by
/// 4x4x4 subsampling. Parts outside the grid are clipped.
Volume make_cylinder(const GridSpec& grid, double radius, double height, double value);

/// Fills z in [z0, z1) (mm), with fractional coverage of partially covered voxels.
Volume make_slab(const GridSpec& grid, double z0, double z1, double value);

}  // namespace sccl
