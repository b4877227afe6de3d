#pragma once

#include <span>
#include <vector>

#include "sccl/geometry.hpp"
#include "sccl/projector.hpp"
#include "sccl/volume.hpp"

namespace sccl {

enum class Apodization { kNone, kCosine };

/// Symmetric ramp filter samples h(n * pitch), n in [-half_width, half_width].
struct FilterKernel {
  std::vector<double> taps;  // taps[half_width + n] = h(n)
  double pitch = 1;          // mm
  int half_width = 0;

  double tap(int n) const { return taps[std::size_t(half_width + n)]; }
};

/// Band-limited ramp (Ram-Lak): h(0) = 1/(4 pitch^2), h(n) = -1/(pi^2 n^2 pitch^2)
/// for odd n, 0 for even n. With kCosine, the ramp's spectrum is multiplied by
/// cos(pi f pitch) before sampling.
FilterKernel ramp_kernel(int half_width, double pitch, Apodization apodization = Apodization::kNone);

/// Which detector axis a view is filtered along.
enum class Branch { kU, kV };

/// kU on [0, pi/4) u [3pi/4, 5pi/4) u [7pi/4, 2pi), kV elsewhere. Angles are
/// reduced modulo 2pi first.
Branch quadrant_of(double beta);

/// One view after preweighting, shearing and ramp filtration. Line j holds the
/// samples with v' = s_j = s0 + j * ds; within a line, sample i sits at
/// detector u_i (kU) or v_i (kV), i.e. at pixel_u(i) / pixel_v(i).
struct FilteredView {
  Branch branch = Branch::kU;
  double beta = 0;
  double s0 = 0, ds = 1;
  int n_lines = 0;
  int n_axis = 0;
  std::vector<double> data;  // n_lines * n_axis, line-major

  double at(int line, int i) const { return data[std::size_t(line) * n_axis + i]; }
  /// Bilinear lookup at (s, axis sample index), zero outside.
  double sample(double s, double axis_index) const;
};

enum class ConvolutionMethod { kAuto, kSpatial, kFft };

/// Preweight, resample onto lines of constant v' with 1D linear interpolation,
/// then convolve each line with `kernel` along the branch axis. `kernel.pitch`
/// must equal the detector pitch of that axis.
FilteredView filter_view(std::span<const float> view, double beta, const ScanGeometry& geom,
                         const FilterKernel& kernel,
                         ConvolutionMethod method = ConvolutionMethod::kAuto);

/// out[i] = pitch * sum_k kernel(i - k) in[k] (zero-padded linear convolution).
void convolve_line(std::span<const double> in, std::span<double> out, const FilterKernel& kernel,
                   ConvolutionMethod method = ConvolutionMethod::kAuto);

enum class ViewSubset { kAll, kUBranchOnly, kVBranchOnly };

struct FdkOptions {
  int kernel_half_width = 0;  // 0 -> long enough for any detector line
  Apodization apodization = Apodization::kNone;
  ConvolutionMethod convolution = ConvolutionMethod::kAuto;
  ViewSubset subset = ViewSubset::kAll;
};

/// Scale applied to every backprojected sample on top of the distance weight
/// and the (delta beta / 2) quadrature factor: |SO| / |SD|. The filter acts in
/// physical detector units, which are magnified by |SD| / |SO| at the origin
/// relative to object units.
double detector_unit_scale(const ScanGeometry& geom);

/// Adds weight_scale * backproj_weight(z) * filtered(s*, u* or v*) to every
/// voxel of `accum` (double, grid layout).
void backproject_filtered(const FilteredView& view, const ScanGeometry& geom, const GridSpec& grid,
                          double weight_scale, std::span<double> accum);

/// Analytical reconstruction: per view filter_view then distance-weighted
/// backprojection, summed with the rectangle rule over a full 2pi scan.
Volume reconstruct_fdk(const ProjectionStack& stack, const ScanGeometry& geom,
                       const GridSpec& grid, const FdkOptions& opts = {});

}  // namespace sccl
