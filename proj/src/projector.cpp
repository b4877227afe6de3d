#include "sccl/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

ProjectionStack::ProjectionStack(std::vector<double> view_betas, const ScanGeometry& geom)
    : betas(std::move(view_betas)),
      det_rows(geom.det_rows),
      det_cols(geom.det_cols),
      pitch_u(geom.pitch_u),
      pitch_v(geom.pitch_v),
      data(betas.size() * std::size_t(geom.det_rows) * geom.det_cols, 0.0f) {}

void ProjectionStack::validate_against(const ScanGeometry& geom) const {
  if (det_rows != geom.det_rows || det_cols != geom.det_cols || pitch_u != geom.pitch_u ||
      pitch_v != geom.pitch_v) {
    std::ostringstream os;
    os << "stack raster " << det_cols << "x" << det_rows << " @ " << pitch_u << "x" << pitch_v
       << " mm does not match geometry " << geom.det_cols << "x" << geom.det_rows << " @ "
       << geom.pitch_u << "x" << geom.pitch_v << " mm";
    throw ValidationError(os.str());
  }
  if (betas.empty()) throw ValidationError("stack: no views");
  if (data.size() != betas.size() * view_size())
    throw ValidationError("stack: payload size does not match dimensions");
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (!std::isfinite(betas[k])) throw ValidationError("stack.betas: non-finite angle");
    if (k > 0 && !(betas[k] > betas[k - 1]))
      throw ValidationError("stack.betas: angles must be strictly increasing");
  }
}

double siddon_line_integral(const Volume& vol, Vec3 a, Vec3 b) {
  const GridSpec& g = vol.grid;
  const double p = g.voxel_pitch;
  const double lo[3] = {g.origin.x - 0.5 * p, g.origin.y - 0.5 * p, g.origin.z - 0.5 * p};
  const int n[3] = {g.nx, g.ny, g.nz};
  const double pa[3] = {a.x, a.y, a.z};
  const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
  const double length = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (length == 0) return 0.0;

  double enter = 0.0, exit = 1.0;
  for (int ax = 0; ax < 3; ++ax) {
    const double hi = lo[ax] + n[ax] * p;
    if (d[ax] == 0) {
      if (pa[ax] <= lo[ax] || pa[ax] >= hi) return 0.0;
      continue;
    }
    double a0 = (lo[ax] - pa[ax]) / d[ax];
    double a1 = (hi - pa[ax]) / d[ax];
    if (a0 > a1) std::swap(a0, a1);
    enter = std::max(enter, a0);
    exit = std::min(exit, a1);
  }
  if (!(enter < exit)) return 0.0;

  int idx[3], step[3];
  double next[3], delta[3];
  const double mid = 0.5 * (enter + std::min(exit, enter + 1e-9));
  for (int ax = 0; ax < 3; ++ax) {
    const double pos = pa[ax] + mid * d[ax];
    idx[ax] = std::clamp(int(std::floor((pos - lo[ax]) / p)), 0, n[ax] - 1);
    if (d[ax] > 0) {
      step[ax] = 1;
      next[ax] = (lo[ax] + (idx[ax] + 1) * p - pa[ax]) / d[ax];
      delta[ax] = p / d[ax];
    } else if (d[ax] < 0) {
      step[ax] = -1;
      next[ax] = (lo[ax] + idx[ax] * p - pa[ax]) / d[ax];
      delta[ax] = -p / d[ax];
    } else {
      step[ax] = 0;
      next[ax] = std::numeric_limits<double>::infinity();
      delta[ax] = 0;
    }
  }

  const std::ptrdiff_t stride[3] = {1, g.nx, std::ptrdiff_t(g.nx) * g.ny};
  std::ptrdiff_t lin = idx[0] * stride[0] + idx[1] * stride[1] + idx[2] * stride[2];
  const float* data = vol.data.data();
  double sum = 0.0, cur = enter;
  for (;;) {
    const int ax = (next[0] < next[1]) ? (next[0] < next[2] ? 0 : 2) : (next[1] < next[2] ? 1 : 2);
    const double until = std::min(next[ax], exit);
    sum += double(data[lin]) * (until - cur);
    if (next[ax] >= exit) break;
    cur = until;
    idx[ax] += step[ax];
    if (idx[ax] < 0 || idx[ax] >= n[ax]) break;
    lin += step[ax] * stride[ax];
    next[ax] += delta[ax];
  }
  return sum * length;
}

ProjectionStack forward_project(const Volume& vol, const ScanGeometry& geom,
                                std::span<const double> betas, const ForwardOptions& opts) {
  geom.validate();
  vol.grid.validate_against(geom);
  if (betas.empty()) throw ValidationError("forward_project: no projection angles");
  if (opts.supersampling < 1) throw ValidationError("forward_project: supersampling must be >= 1");
  if (vol.data.size() != vol.grid.size()) throw ValidationError("forward_project: volume payload size");
  ProjectionStack stack(std::vector<double>(betas.begin(), betas.end()), geom);
  stack.validate_against(geom);
  if (opts.check_fov) check_fov_coverage(vol, geom, betas);

  const int ss = opts.supersampling;
  const double inv = 1.0 / (ss * ss);
  const int rows = geom.det_rows, cols = geom.det_cols;

  for (int k = 0; k < int(betas.size()); ++k) {
    const Pose pose = pose_at(geom, betas[k]);
    std::span<float> img = stack.view(k);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (int sv = 0; sv < ss; ++sv)
          for (int su = 0; su < ss; ++su) {
            const double u = geom.pixel_u(c + (su + 0.5) / ss - 0.5);
            const double v = geom.pixel_v(r + (sv + 0.5) / ss - 0.5);
            acc += siddon_line_integral(vol, pose.source_pos, pose.detector_point(u, v));
          }
        img[std::size_t(r) * cols + c] = float(acc * inv);
      }
    }
  }
  return stack;
}

float sample_bilinear(std::span<const float> image, int rows, int cols, double row, double col) {
  if (!(row > -1.0 && row < rows && col > -1.0 && col < cols)) return 0.0f;
  const int r0 = int(std::floor(row)), c0 = int(std::floor(col));
  const double fr = row - r0, fc = col - c0;
  auto px = [&](int r, int c) -> double {
    return (r >= 0 && r < rows && c >= 0 && c < cols) ? image[std::size_t(r) * cols + c] : 0.0;
  };
  return float((1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
               fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1)));
}

void backproject_view(std::span<const float> image, double beta, const ScanGeometry& geom,
                      const GridSpec& grid, BackprojectionWeighting weighting, double scale,
                      std::span<double> accum) {
  if (image.size() != std::size_t(geom.det_rows) * geom.det_cols)
    throw ValidationError("backproject_view: image size does not match detector raster");
  if (accum.size() != grid.size()) throw ValidationError("backproject_view: accumulator size");
  const Pose pose = pose_at(geom, beta);
  const Vec3& s = pose.source_pos;
  const double ca = std::cos(geom.tilt_alpha);
  const double sd_ca = geom.dist_sd * ca;
  const double vox3 = std::pow(grid.voxel_pitch, 3);
  const std::size_t plane = std::size_t(grid.nx) * grid.ny;

#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < grid.nz; ++iz) {
    const double t = sd_ca / (grid.z_of(iz) + geom.dist_so * ca);
    double w_const = scale;
    if (weighting == BackprojectionWeighting::kDistance) w_const *= t * t;
    if (weighting == BackprojectionWeighting::kRayDensity)
      w_const *= vox3 * t * t / (geom.pitch_u * geom.pitch_v * sd_ca);
    double* slice = accum.data() + std::size_t(iz) * plane;
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double hy = s.y + t * (grid.origin.y + iy * grid.voxel_pitch - s.y);
      const double row = geom.row_of(hy - pose.det_center.y);
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double hx = s.x + t * (grid.origin.x + ix * grid.voxel_pitch - s.x);
        const float val =
            sample_bilinear(image, geom.det_rows, geom.det_cols, row, geom.col_of(hx - pose.det_center.x));
        if (val == 0.0f) continue;
        double w = w_const;
        if (weighting == BackprojectionWeighting::kRayDensity) {
          const double dx = hx - s.x, dy = hy - s.y;
          w *= std::sqrt(dx * dx + dy * dy + sd_ca * sd_ca);
        }
        slice[std::size_t(iy) * grid.nx + ix] += w * val;
      }
    }
  }
}

Volume back_project(const ProjectionStack& stack, const ScanGeometry& geom, const GridSpec& grid,
                    BackprojectionWeighting weighting) {
  geom.validate();
  grid.validate_against(geom);
  stack.validate_against(geom);
  const double scale =
      weighting == BackprojectionWeighting::kDistance ? std::numbers::pi / stack.n_views() : 1.0;
  std::vector<double> accum(grid.size(), 0.0);
  for (int k = 0; k < stack.n_views(); ++k)
    backproject_view(stack.view(k), stack.betas[k], geom, grid, weighting, scale, accum);
  Volume vol(grid);
  std::transform(accum.begin(), accum.end(), vol.data.begin(), [](double x) { return float(x); });
  return vol;
}

Volume back_project_weighted(const ProjectionStack& stack, const ScanGeometry& geom,
                             const GridSpec& grid) {
  return back_project(stack, geom, grid, BackprojectionWeighting::kDistance);
}

ProjectionStack add_noise(const ProjectionStack& stack, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw ValidationError("add_noise: sigma must be >= 0");
  ProjectionStack out = stack;
  if (sigma == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (float& v : out.data) v = float(v + gauss(rng));
  return out;
}

bool check_fov_coverage(const Volume& vol, const ScanGeometry& geom, std::span<const double> betas) {
  const GridSpec& g = vol.grid;
  int lo[3] = {g.nx, g.ny, g.nz}, hi[3] = {-1, -1, -1};
  for (int iz = 0; iz < g.nz; ++iz)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        if (vol.at(ix, iy, iz) == 0.0f) continue;
        lo[0] = std::min(lo[0], ix), hi[0] = std::max(hi[0], ix);
        lo[1] = std::min(lo[1], iy), hi[1] = std::max(hi[1], iy);
        lo[2] = std::min(lo[2], iz), hi[2] = std::max(hi[2], iz);
      }
  if (hi[0] < 0) return true;

  const double h = 0.5 * g.voxel_pitch;
  const Vec3 a = g.voxel_center(lo[0], lo[1], lo[2]) - Vec3{h, h, h};
  const Vec3 b = g.voxel_center(hi[0], hi[1], hi[2]) + Vec3{h, h, h};
  const double umax = geom.half_width_u() + 0.5 * geom.pitch_u;
  const double vmax = geom.half_width_v() + 0.5 * geom.pitch_v;
  for (double beta : betas) {
    for (int corner = 0; corner < 8; ++corner) {
      const Vec3 p{(corner & 1) ? b.x : a.x, (corner & 2) ? b.y : a.y, (corner & 4) ? b.z : a.z};
      const DetCoord d = project_point(geom, beta, p);
      if (std::abs(d.u) > umax || std::abs(d.v) > vmax) {
        std::ostringstream os;
        os << "nonzero voxels project outside the detector (beta=" << rad_to_deg(beta)
           << " deg, u=" << d.u << ", v=" << d.v << " mm); projections are truncated";
        warn(os.str());
        return false;
      }
    }
  }
  return true;
}

}  // namespace sccl
