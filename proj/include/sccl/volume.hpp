#pragma once

#include <cstddef>
#include <vector>

#include "sccl/geometry.hpp"

namespace sccl {

/// Voxel raster: isotropic pitch, `origin` is the global position of the
/// center of voxel (0, 0, 0).
struct GridSpec {
  int nx = 1, ny = 1, nz = 1;
  double voxel_pitch = 1;
  Vec3 origin;

  /// Grid of the given size whose geometric center sits at `center`.
  static GridSpec centered(int nx, int ny, int nz, double pitch, Vec3 center = {});

  std::size_t size() const { return std::size_t(nx) * ny * nz; }
  std::size_t index(int ix, int iy, int iz) const {
    return (std::size_t(iz) * ny + iy) * nx + ix;
  }
  Vec3 voxel_center(int ix, int iy, int iz) const {
    return {origin.x + ix * voxel_pitch, origin.y + iy * voxel_pitch, origin.z + iz * voxel_pitch};
  }
  double z_of(int iz) const { return origin.z + iz * voxel_pitch; }
  /// Lower and upper z faces of the raster.
  double z_min() const { return origin.z - 0.5 * voxel_pitch; }
  double z_max() const { return origin.z + (nz - 0.5) * voxel_pitch; }

  bool same_raster(const GridSpec& o) const;
  void validate() const;
  /// Also requires the z-extent to lie strictly between the source plane and
  /// the detector plane of `geom`.
  void validate_against(const ScanGeometry& geom) const;
};

/// Attenuation field (mm^-1), x-fastest.
struct Volume {
  GridSpec grid;
  std::vector<float> data;

  Volume() = default;
  explicit Volume(const GridSpec& g) : grid(g), data(g.size(), 0.0f) {}

  float& at(int ix, int iy, int iz) { return data[grid.index(ix, iy, iz)]; }
  float at(int ix, int iy, int iz) const { return data[grid.index(ix, iy, iz)]; }
};

}  // namespace sccl
