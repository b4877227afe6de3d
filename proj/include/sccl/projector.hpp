#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sccl/geometry.hpp"
#include "sccl/volume.hpp"

namespace sccl {

/// Per-view detector images of line integrals. Row = v index, col = u index.
struct ProjectionStack {
  std::vector<double> betas;
  int det_rows = 0, det_cols = 0;
  double pitch_u = 1, pitch_v = 1;
  std::vector<float> data;  // view-major, then row, then col

  ProjectionStack() = default;
  ProjectionStack(std::vector<double> view_betas, const ScanGeometry& geom);

  int n_views() const { return int(betas.size()); }
  std::size_t view_size() const { return std::size_t(det_rows) * det_cols; }
  std::span<float> view(int k) { return {data.data() + k * view_size(), view_size()}; }
  std::span<const float> view(int k) const { return {data.data() + k * view_size(), view_size()}; }
  float& at(int k, int row, int col) { return data[k * view_size() + std::size_t(row) * det_cols + col]; }
  float at(int k, int row, int col) const {
    return data[k * view_size() + std::size_t(row) * det_cols + col];
  }

  /// Raster metadata agrees with `geom` and betas are finite and increasing.
  void validate_against(const ScanGeometry& geom) const;
};

struct ForwardOptions {
  int supersampling = 1;  // rays per pixel side
  bool check_fov = true;  // warn when nonzero voxels project off the detector
};

/// Exact radiological path (Siddon) through the voxelized volume along the
/// segment source -> pixel center, for every pixel of every view.
ProjectionStack forward_project(const Volume& vol, const ScanGeometry& geom,
                                std::span<const double> betas, const ForwardOptions& opts = {});

/// Line integral along the segment a -> b. Exposed for tests and diagnostics.
double siddon_line_integral(const Volume& vol, Vec3 a, Vec3 b);

enum class BackprojectionWeighting {
  kNone,       // plain bilinear sample sum over views
  kDistance,   // backproj_weight(z) and the (delta beta / 2) quadrature factor
  kRayDensity  // approximate transpose of forward_project (see back_project)
};

/// Voxel-driven backprojection with bilinear detector interpolation; samples
/// outside the detector contribute zero.
///
/// kRayDensity scales each sample by vox^3 t^2 |S - pixel| / (pitch_u pitch_v
/// |SD| cos a), the summed Siddon chord length through a voxel seen by the
/// pixels around its projection. That makes the operator approximately the
/// transpose of forward_project.
Volume back_project(const ProjectionStack& stack, const ScanGeometry& geom, const GridSpec& grid,
                    BackprojectionWeighting weighting);

/// Adds scale * weight * bilinear(image at the voxel's projection) to every
/// voxel of `accum` (grid layout). back_project calls this once per view with
/// scale = delta beta / 2 for kDistance and 1 otherwise.
void backproject_view(std::span<const float> image, double beta, const ScanGeometry& geom,
                      const GridSpec& grid, BackprojectionWeighting weighting, double scale,
                      std::span<double> accum);

/// back_project with BackprojectionWeighting::kDistance.
Volume back_project_weighted(const ProjectionStack& stack, const ScanGeometry& geom,
                             const GridSpec& grid);

ProjectionStack add_noise(const ProjectionStack& stack, double sigma, std::uint64_t seed);

/// Bilinear sample of a detector image at fractional (row, col); zero outside.
float sample_bilinear(std::span<const float> image, int rows, int cols, double row, double col);

/// Warns if any voxel with nonzero value projects outside the detector in
/// some view. Returns true when the volume is fully covered.
bool check_fov_coverage(const Volume& vol, const ScanGeometry& geom, std::span<const double> betas);

}  // namespace sccl
