#include "sccl/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace {

struct Board {
  int x0, x1, y0, y1;  // footprint, half-open voxel ranges
};

class LayerMask {
 public:
  LayerMask(int nx, int ny) : nx_(nx), ny_(ny), cells_(std::size_t(nx) * ny, 0) {}

  void rect(int x0, int y0, int x1, int y1, const Board& b) {
    x0 = std::max(x0, b.x0);
    y0 = std::max(y0, b.y0);
    x1 = std::min(x1, b.x1);
    y1 = std::min(y1, b.y1);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) cells_[std::size_t(y) * nx_ + x] = 1;
  }

  void disk(double cx, double cy, double r, const Board& b) {
    const int x0 = std::max(b.x0, int(std::floor(cx - r)));
    const int x1 = std::min(b.x1, int(std::ceil(cx + r)) + 1);
    const int y0 = std::max(b.y0, int(std::floor(cy - r)));
    const int y1 = std::min(b.y1, int(std::ceil(cy + r)) + 1);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) cells_[std::size_t(y) * nx_ + x] = 1;
  }

  bool operator()(int x, int y) const { return cells_[std::size_t(y) * nx_ + x] != 0; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  int nx_, ny_;
  std::vector<unsigned char> cells_;
};

struct Point2 {
  int x, y;
};

int layer_index(const GridSpec& grid, double z) {
  return int(std::lround((z - grid.origin.z) / grid.voxel_pitch));
}

}  // namespace

std::vector<double> resolved_layer_zs(const GridSpec& grid, const PcbParams& params) {
  if (!params.layer_zs.empty()) return params.layer_zs;
  double z0 = params.board_z0, z1 = params.board_z1;
  if (z0 == z1) {
    const double h = grid.z_max() - grid.z_min();
    z0 = grid.z_min() + 0.1 * h;
    z1 = grid.z_max() - 0.1 * h;
  }
  const double t = z1 - z0;
  return {z0 + t / 6.0, z0 + t / 2.0, z0 + 5.0 * t / 6.0};
}

Volume make_pcb_phantom(const GridSpec& grid, const PcbParams& params) {
  grid.validate();
  if (params.trace_attn < 0 || params.substrate_attn < 0)
    throw ValidationError("phantom: attenuation values must be >= 0");
  if (params.layer_thickness_vox < 1)
    throw ValidationError("phantom.layer_thickness_vox: must be >= 1");

  double bz0 = params.board_z0, bz1 = params.board_z1;
  if (bz0 == bz1) {
    const double h = grid.z_max() - grid.z_min();
    bz0 = grid.z_min() + 0.1 * h;
    bz1 = grid.z_max() - 0.1 * h;
  }
  if (!(bz1 > bz0)) throw ValidationError("phantom: board_z1 must exceed board_z0");

  const std::vector<double> layer_zs = resolved_layer_zs(grid, params);
  if (layer_zs.empty()) throw ValidationError("phantom.layer_zs: at least one layer required");

  const int m = params.footprint_margin_vox;
  if (m < 0 || 2 * m >= std::min(grid.nx, grid.ny))
    throw ValidationError("phantom.footprint_margin_vox: leaves no board area");
  const Board board{m, grid.nx - m, m, grid.ny - m};

  std::vector<int> layer_iz;
  for (double z : layer_zs) {
    const int iz = layer_index(grid, z);
    if (!(z >= bz0 && z <= bz1) || iz < 0 || iz + params.layer_thickness_vox > grid.nz) {
      std::ostringstream os;
      os << "phantom.layer_zs: layer at z=" << z << " mm lies outside the board slab [" << bz0
         << ", " << bz1 << "] or the grid";
      throw ValidationError(os.str());
    }
    layer_iz.push_back(iz);
  }
  std::vector<std::size_t> order(layer_iz.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return layer_iz[a] < layer_iz[b]; });

  Volume vol(grid);
  const float substrate = float(params.substrate_attn);
  const float copper = float(params.trace_attn);

  // Substrate slab.
  for (int iz = 0; iz < grid.nz; ++iz) {
    const double zc = grid.z_of(iz);
    if (zc < bz0 || zc > bz1) continue;
    for (int iy = board.y0; iy < board.y1; ++iy)
      for (int ix = board.x0; ix < board.x1; ++ix) vol.at(ix, iy, iz) = substrate;
  }

  std::mt19937_64 rng(params.seed);
  const int bw = board.x1 - board.x0, bh = board.y1 - board.y0;
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const double cx = 0.5 * (grid.nx - 1), cy = 0.5 * (grid.ny - 1);
  // Vias keep clear of the central column so its z-profile only shows layers.
  const double via_clearance = std::max(6.0, 0.08 * std::min(bw, bh));

  std::vector<LayerMask> masks(layer_iz.size(), LayerMask(grid.nx, grid.ny));
  std::vector<std::vector<Point2>> endpoints(layer_iz.size());

  for (std::size_t li : order) {
    LayerMask& mask = masks[li];
    for (int k = 0; k < params.traces_per_layer; ++k) {
      const int width = uniform_int(1, std::max(1, std::min(bw, bh) / 40 + 2));
      const bool horizontal = uniform_int(0, 1) == 0;
      const int len = uniform_int(std::max(2, bw / 5), std::max(3, (3 * std::min(bw, bh)) / 5));
      const int x = uniform_int(board.x0, board.x1 - 1);
      const int y = uniform_int(board.y0, board.y1 - 1);
      if (horizontal) {
        mask.rect(x, y, x + len, y + width, board);
        endpoints[li].push_back({std::min(x + len - 1, board.x1 - 1), y});
      } else {
        mask.rect(x, y, x + width, y + len, board);
        endpoints[li].push_back({x, std::min(y + len - 1, board.y1 - 1)});
      }
      endpoints[li].push_back({x, y});
    }
    for (int k = 0; k < params.pads_per_layer; ++k) {
      const double r = uniform_int(2, 4);
      mask.disk(uniform_int(board.x0, board.x1 - 1), uniform_int(board.y0, board.y1 - 1), r, board);
    }
    mask.disk(cx, cy, 3.0, board);  // fiducial pad on every layer
  }

  struct Via {
    Point2 at;
    int iz0, iz1;
  };
  std::vector<Via> vias;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const std::size_t lo = order[k], hi = order[k + 1];
    auto& candidates = endpoints[lo];
    std::vector<Point2> usable;
    for (const Point2& p : candidates) {
      const double d = std::hypot(p.x - cx, p.y - cy);
      if (d > via_clearance && p.x >= board.x0 + 2 && p.x < board.x1 - 2 && p.y >= board.y0 + 2 &&
          p.y < board.y1 - 2)
        usable.push_back(p);
    }
    for (int v = 0; v < params.vias_per_gap && !usable.empty(); ++v) {
      const std::size_t pick = std::size_t(uniform_int(0, int(usable.size()) - 1));
      const Point2 p = usable[pick];
      usable.erase(usable.begin() + std::ptrdiff_t(pick));
      masks[lo].disk(p.x, p.y, 2.5, board);
      masks[hi].disk(p.x, p.y, 2.5, board);
      // Route a trace away from the via on the upper layer.
      const int len = uniform_int(std::max(2, bw / 8), std::max(3, bw / 3));
      if (uniform_int(0, 1) == 0)
        masks[hi].rect(p.x, p.y, p.x + len, p.y + 2, board);
      else
        masks[hi].rect(p.x, p.y, p.x + 2, p.y + len, board);
      vias.push_back({p, layer_iz[lo], layer_iz[hi]});
    }
  }

  for (std::size_t li = 0; li < masks.size(); ++li) {
    for (int dz = 0; dz < params.layer_thickness_vox; ++dz) {
      const int iz = layer_iz[li] + dz;
      for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
          if (masks[li](ix, iy)) vol.at(ix, iy, iz) = copper;
    }
  }

  const double via_r = 1.2;
  for (const Via& via : vias) {
    for (int iz = via.iz0; iz <= via.iz1; ++iz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx * dx + dy * dy <= via_r * via_r) vol.at(via.at.x + dx, via.at.y + dy, iz) = copper;
  }
  return vol;
}

Volume make_point(const GridSpec& grid, std::array<int, 3> index, double value) {
  grid.validate();
  const auto [ix, iy, iz] = index;
  if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny || iz < 0 || iz >= grid.nz) {
    std::ostringstream os;
    os << "make_point: index (" << ix << ", " << iy << ", " << iz << ") outside " << grid.nx << "x"
       << grid.ny << "x" << grid.nz << " grid";
    throw ValidationError(os.str());
  }
  Volume vol(grid);
  vol.at(ix, iy, iz) = float(value);
  return vol;
}

Volume make_cylinder(const GridSpec& grid, double radius, double height, double value) {
  grid.validate();
  if (!(radius > 0)) throw ValidationError("make_cylinder: radius must be positive");
  if (!(height > 0)) throw ValidationError("make_cylinder: height must be positive");
  Volume vol(grid);
  const double p = grid.voxel_pitch;
  const Vec3 c = grid.voxel_center(0, 0, 0) +
                 0.5 * Vec3{(grid.nx - 1) * p, (grid.ny - 1) * p, (grid.nz - 1) * p};
  const double z0 = c.z - 0.5 * height, z1 = c.z + 0.5 * height;
  const double half_diag = 0.5 * std::sqrt(2.0) * p;
  constexpr int kSub = 4;

  for (int iz = 0; iz < grid.nz; ++iz) {
    const double zc = grid.z_of(iz);
    const double zcov = std::clamp(std::min(zc + 0.5 * p, z1) - std::max(zc - 0.5 * p, z0), 0.0, p) / p;
    if (zcov == 0) continue;
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        const Vec3 v = grid.voxel_center(ix, iy, iz);
        const double r = std::hypot(v.x - c.x, v.y - c.y);
        double frac;
        if (r + half_diag <= radius) {
          frac = 1.0;
        } else if (r - half_diag >= radius) {
          frac = 0.0;
        } else {
          int inside = 0;
          for (int sy = 0; sy < kSub; ++sy)
            for (int sx = 0; sx < kSub; ++sx) {
              const double x = v.x - c.x + ((sx + 0.5) / kSub - 0.5) * p;
              const double y = v.y - c.y + ((sy + 0.5) / kSub - 0.5) * p;
              inside += (x * x + y * y <= radius * radius);
            }
          frac = double(inside) / (kSub * kSub);
        }
        vol.at(ix, iy, iz) = float(value * frac * zcov);
      }
    }
  }
  return vol;
}

Volume make_slab(const GridSpec& grid, double z0, double z1, double value) {
  grid.validate();
  Volume vol(grid);
  if (!(z1 > z0)) return vol;
  const double p = grid.voxel_pitch;
  for (int iz = 0; iz < grid.nz; ++iz) {
    const double zc = grid.z_of(iz);
    const double cov = std::clamp(std::min(zc + 0.5 * p, z1) - std::max(zc - 0.5 * p, z0), 0.0, p) / p;
    if (cov == 0) continue;
    const float fv = float(value * cov);
    std::fill(vol.data.begin() + std::ptrdiff_t(grid.index(0, 0, iz)),
              vol.data.begin() + std::ptrdiff_t(grid.index(0, 0, iz + 1)), fv);
  }
  return vol;
}

}  // namespace sccl
