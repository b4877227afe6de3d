#pragma once

#include <vector>

#include "sccl/volume.hpp"

namespace sccl {

/// Half-open voxel index box.
struct Roi {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0, z0 = 0, z1 = 0;

  static Roi whole(const GridSpec& g) { return {0, g.nx, 0, g.ny, 0, g.nz}; }
  /// The volume minus `margin` voxels on every face (clamped to non-empty).
  static Roi inset(const GridSpec& g, int margin);
  long long count() const { return (long long)(x1 - x0) * (y1 - y0) * (z1 - z0); }
  void validate(const GridSpec& g) const;
};

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

struct MetricReport {
  double rmse = 0;
  double mssim = 1;
  Roi roi;
};

double rmse(const Volume& a, const Volume& b, const Roi& roi);

/// Mean of the 2D per-slice SSIM map over the ROI. The dynamic range L is
/// taken from the reference `b` (max - min over the ROI), so the measure is
/// not symmetric in its arguments.
double mssim(const Volume& a, const Volume& b, const Roi& roi, const SsimOptions& opts = {});

MetricReport evaluate(const Volume& recon, const Volume& reference, const Roi& roi,
                      const SsimOptions& opts = {});

/// Values along z at voxel column (ix, iy).
std::vector<double> z_profile(const Volume& vol, int ix, int iy);

/// Sum of each z-slice.
std::vector<double> slice_sums(const Volume& vol);

}  // namespace sccl
