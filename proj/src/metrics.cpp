#include "sccl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace {

void require_same_raster(const Volume& a, const Volume& b) {
  if (!a.grid.same_raster(b.grid) || a.data.size() != b.data.size()) {
    std::ostringstream os;
    os << "raster mismatch: " << a.grid.nx << "x" << a.grid.ny << "x" << a.grid.nz << " @ "
       << a.grid.voxel_pitch << " mm vs " << b.grid.nx << "x" << b.grid.ny << "x" << b.grid.nz
       << " @ " << b.grid.voxel_pitch << " mm";
    throw ValidationError(os.str());
  }
}

// Gaussian smoothing with the window clipped at the image border and
// renormalized over the in-bounds taps.
class GaussianSmoother {
 public:
  GaussianSmoother(int window, double sigma) : radius_(window / 2), taps_(std::size_t(window)) {
    for (int k = -radius_; k <= radius_; ++k)
      taps_[std::size_t(k + radius_)] = std::exp(-0.5 * k * k / (sigma * sigma));
  }

  void apply(const std::vector<double>& in, std::vector<double>& out, int nx, int ny) const {
    std::vector<double> tmp(in.size());
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        double acc = 0, wsum = 0;
        for (int k = -radius_; k <= radius_; ++k) {
          const int xx = x + k;
          if (xx < 0 || xx >= nx) continue;
          const double w = taps_[std::size_t(k + radius_)];
          acc += w * in[std::size_t(y) * nx + xx];
          wsum += w;
        }
        tmp[std::size_t(y) * nx + x] = acc / wsum;
      }
    out.resize(in.size());
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        double acc = 0, wsum = 0;
        for (int k = -radius_; k <= radius_; ++k) {
          const int yy = y + k;
          if (yy < 0 || yy >= ny) continue;
          const double w = taps_[std::size_t(k + radius_)];
          acc += w * tmp[std::size_t(yy) * nx + x];
          wsum += w;
        }
        out[std::size_t(y) * nx + x] = acc / wsum;
      }
  }

 private:
  int radius_;
  std::vector<double> taps_;
};

}  // namespace

Roi Roi::inset(const GridSpec& g, int margin) {
  auto clip = [margin](int n, int& lo, int& hi) {
    const int m = std::min(margin, (n - 1) / 2);
    lo = m;
    hi = n - m;
  };
  Roi r;
  clip(g.nx, r.x0, r.x1);
  clip(g.ny, r.y0, r.y1);
  clip(g.nz, r.z0, r.z1);
  return r;
}

void Roi::validate(const GridSpec& g) const {
  if (x0 < 0 || y0 < 0 || z0 < 0 || x1 > g.nx || y1 > g.ny || z1 > g.nz || x0 >= x1 || y0 >= y1 ||
      z0 >= z1) {
    std::ostringstream os;
    os << "roi [" << x0 << "," << x1 << ")x[" << y0 << "," << y1 << ")x[" << z0 << "," << z1
       << ") is empty or outside the " << g.nx << "x" << g.ny << "x" << g.nz << " grid";
    throw ValidationError(os.str());
  }
}

double rmse(const Volume& a, const Volume& b, const Roi& roi) {
  require_same_raster(a, b);
  roi.validate(a.grid);
  double acc = 0.0;
  for (int z = roi.z0; z < roi.z1; ++z)
    for (int y = roi.y0; y < roi.y1; ++y)
      for (int x = roi.x0; x < roi.x1; ++x) {
        const double d = double(a.at(x, y, z)) - double(b.at(x, y, z));
        acc += d * d;
      }
  return std::sqrt(acc / double(roi.count()));
}

double mssim(const Volume& a, const Volume& b, const Roi& roi, const SsimOptions& opts) {
  require_same_raster(a, b);
  roi.validate(a.grid);
  if (opts.window < 1 || opts.window % 2 == 0 || !(opts.sigma > 0))
    throw ValidationError("ssim: window must be odd and positive, sigma positive");

  double lo = b.at(roi.x0, roi.y0, roi.z0), hi = lo;
  for (int z = roi.z0; z < roi.z1; ++z)
    for (int y = roi.y0; y < roi.y1; ++y)
      for (int x = roi.x0; x < roi.x1; ++x) {
        lo = std::min(lo, double(b.at(x, y, z)));
        hi = std::max(hi, double(b.at(x, y, z)));
      }
  const double range = hi - lo;
  if (!(range > 0)) throw ValidationError("ssim: reference has zero dynamic range in the roi");
  const double c1 = (opts.k1 * range) * (opts.k1 * range);
  const double c2 = (opts.k2 * range) * (opts.k2 * range);

  const int nx = a.grid.nx, ny = a.grid.ny;
  const std::size_t plane = std::size_t(nx) * ny;
  const GaussianSmoother smooth(opts.window, opts.sigma);
  std::vector<double> slice_means(std::size_t(roi.z1 - roi.z0), 0.0);

#pragma omp parallel for schedule(dynamic)
  for (int z = roi.z0; z < roi.z1; ++z) {
    std::vector<double> xa(plane), xb(plane), xaa(plane), xbb(plane), xab(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      const double va = a.data[std::size_t(z) * plane + i];
      const double vb = b.data[std::size_t(z) * plane + i];
      xa[i] = va;
      xb[i] = vb;
      xaa[i] = va * va;
      xbb[i] = vb * vb;
      xab[i] = va * vb;
    }
    std::vector<double> ma, mb, maa, mbb, mab;
    smooth.apply(xa, ma, nx, ny);
    smooth.apply(xb, mb, nx, ny);
    smooth.apply(xaa, maa, nx, ny);
    smooth.apply(xbb, mbb, nx, ny);
    smooth.apply(xab, mab, nx, ny);
    double acc = 0.0;
    for (int y = roi.y0; y < roi.y1; ++y)
      for (int x = roi.x0; x < roi.x1; ++x) {
        const std::size_t i = std::size_t(y) * nx + x;
        const double mu_a = ma[i], mu_b = mb[i];
        const double var_a = maa[i] - mu_a * mu_a;
        const double var_b = mbb[i] - mu_b * mu_b;
        const double cov = mab[i] - mu_a * mu_b;
        acc += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      }
    slice_means[std::size_t(z - roi.z0)] = acc;
  }
  double total = 0.0;
  for (double s : slice_means) total += s;
  return total / double(roi.count());
}

MetricReport evaluate(const Volume& recon, const Volume& reference, const Roi& roi,
                      const SsimOptions& opts) {
  return {rmse(recon, reference, roi), mssim(recon, reference, roi, opts), roi};
}

std::vector<double> z_profile(const Volume& vol, int ix, int iy) {
  if (ix < 0 || ix >= vol.grid.nx || iy < 0 || iy >= vol.grid.ny)
    throw ValidationError("z_profile: column outside the grid");
  std::vector<double> out(std::size_t(vol.grid.nz));
  for (int z = 0; z < vol.grid.nz; ++z) out[std::size_t(z)] = vol.at(ix, iy, z);
  return out;
}

std::vector<double> slice_sums(const Volume& vol) {
  std::vector<double> out(std::size_t(vol.grid.nz), 0.0);
  const std::size_t plane = std::size_t(vol.grid.nx) * vol.grid.ny;
  for (int z = 0; z < vol.grid.nz; ++z)
    for (std::size_t i = 0; i < plane; ++i) out[std::size_t(z)] += vol.data[std::size_t(z) * plane + i];
  return out;
}

}  // namespace sccl
