#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sccl/projector.hpp"

namespace sccl::test {

// Independent oracle: midpoint rule along the ray with step pitch/16, nearest
// voxel. The segment is first clipped to the grid box (slab test) so the march
// only covers the part that can contribute.
inline double ray_march(const Volume& vol, Vec3 a, Vec3 b, int subdiv = 16) {
  const GridSpec& g = vol.grid;
  const Vec3 half{g.voxel_pitch / 2, g.voxel_pitch / 2, g.voxel_pitch / 2};
  const Vec3 lo = g.origin - half;
  const Vec3 hi = g.origin + Vec3{(g.nx - 1) * g.voxel_pitch, (g.ny - 1) * g.voxel_pitch,
                                  (g.nz - 1) * g.voxel_pitch} + half;
  double t0 = 0, t1 = 1;
  const double pa[3] = {a.x, a.y, a.z}, pb[3] = {b.x, b.y, b.z};
  const double bl[3] = {lo.x, lo.y, lo.z}, bh[3] = {hi.x, hi.y, hi.z};
  for (int k = 0; k < 3; ++k) {
    const double d = pb[k] - pa[k];
    if (d == 0) {
      if (pa[k] < bl[k] || pa[k] > bh[k]) return 0.0;
      continue;
    }
    double e0 = (bl[k] - pa[k]) / d, e1 = (bh[k] - pa[k]) / d;
    if (e0 > e1) std::swap(e0, e1);
    t0 = std::max(t0, e0);
    t1 = std::min(t1, e1);
  }
  if (t1 <= t0) return 0.0;
  const Vec3 start = a + t0 * (b - a);
  const double len = (t1 - t0) * norm(b - a);
  const double step = g.voxel_pitch / subdiv;
  const int n = std::max(1, int(std::ceil(len / step)));
  const double h = len / n;
  const Vec3 dir = (1.0 / norm(b - a)) * (b - a);
  a = start;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 p = a + ((i + 0.5) * h) * dir;
    const int ix = int(std::floor((p.x - lo.x) / g.voxel_pitch));
    const int iy = int(std::floor((p.y - lo.y) / g.voxel_pitch));
    const int iz = int(std::floor((p.z - lo.z) / g.voxel_pitch));
    if (ix < 0 || iy < 0 || iz < 0 || ix >= g.nx || iy >= g.ny || iz >= g.nz) continue;
    sum += vol.at(ix, iy, iz);
  }
  return sum * h;
}

inline ProjectionStack march_all(const Volume& vol, const ScanGeometry& geom, const std::vector<double>& betas,
                          int subdiv = 16) {
  ProjectionStack out(betas, geom);
  for (int k = 0; k < out.n_views(); ++k) {
    const Pose pose = pose_at(geom, betas[std::size_t(k)]);
    for (int r = 0; r < geom.det_rows; ++r)
      for (int c = 0; c < geom.det_cols; ++c)
        out.at(k, r, c) = float(
            ray_march(vol, pose.source_pos, pose.detector_point(geom.pixel_u(c), geom.pixel_v(r)), subdiv));
  }
  return out;
}

inline double rel_l2(const std::vector<float>& got, const std::vector<float>& want) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (double(got[i]) - want[i]) * (double(got[i]) - want[i]);
    den += double(want[i]) * want[i];
  }
  return std::sqrt(num / den);
}

// Up to eight random axis-aligned boxes with random attenuations.
inline Volume random_blocks(const GridSpec& g, std::uint64_t seed) {
  Volume v(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> val(0.2f, 1.0f);
  for (int b = 0; b < 8; ++b) {
    int lo[3], hi[3];
    const int n[3] = {g.nx, g.ny, g.nz};
    for (int k = 0; k < 3; ++k) {
      std::uniform_int_distribution<int> len(3, n[k] / 2);
      const int l = len(rng);
      lo[k] = std::uniform_int_distribution<int>(0, n[k] - l)(rng);
      hi[k] = lo[k] + l;
    }
    const float a = val(rng);
    for (int z = lo[2]; z < hi[2]; ++z)
      for (int y = lo[1]; y < hi[1]; ++y)
        for (int x = lo[0]; x < hi[0]; ++x) v.data[g.index(x, y, z)] += a;
  }
  return v;
}

}  // namespace sccl::test
