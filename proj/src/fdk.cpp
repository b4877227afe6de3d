#include "sccl/fdk.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^{1/2} x cos(k x) dx
double ramp_cos_moment(double k) {
  return std::sin(0.5 * k) / (2.0 * k) + (std::cos(0.5 * k) - 1.0) / (k * k);
}

template <typename T>
struct FftwFree {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree<double>>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree<fftw_complex>>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

// Plans are created once per size under a lock (the planner is not
// thread-safe) and executed with the new-array interface afterwards.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FftPlans plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  RealBuffer r = alloc_real(n);
  ComplexBuffer c = alloc_complex(n / 2 + 1);
  FftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(n, r.get(), c.get(), FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(n, c.get(), r.get(), FFTW_ESTIMATE);
  cache.emplace(n, p);
  return p;
}

int fft_size(int min_size) {
  int n = 1;
  while (n < min_size) n <<= 1;
  return n;
}

// Zero-padded linear convolution of lines of a fixed length with one kernel.
class LineConvolver {
 public:
  LineConvolver(const FilterKernel& kernel, int line_length, ConvolutionMethod method)
      : kernel_(kernel), n_(line_length) {
    if (method == ConvolutionMethod::kAuto)
      method = (kernel.half_width > 32 && line_length > 32) ? ConvolutionMethod::kFft
                                                            : ConvolutionMethod::kSpatial;
    use_fft_ = method == ConvolutionMethod::kFft;
    if (!use_fft_) return;
    const int h = std::min(kernel.half_width, n_ - 1);
    nfft_ = fft_size(n_ + h + 1);
    plans_ = plans_for(nfft_);
    RealBuffer k = alloc_real(nfft_);
    std::fill(k.get(), k.get() + nfft_, 0.0);
    for (int m = 0; m <= h; ++m) {
      k[m] = kernel.tap(m);
      if (m > 0) k[nfft_ - m] = kernel.tap(m);
    }
    spectrum_.resize(nfft_ / 2 + 1);
    ComplexBuffer ks = alloc_complex(nfft_ / 2 + 1);
    fftw_execute_dft_r2c(plans_.forward, k.get(), ks.get());
    // The kernel is real and even, so its spectrum is real. Fold in the
    // measure (kernel pitch) and the unnormalized inverse transform.
    const double scale = kernel.pitch / nfft_;
    for (int i = 0; i <= nfft_ / 2; ++i) spectrum_[i] = ks[i][0] * scale;
  }

  struct Workspace {
    RealBuffer real;
    ComplexBuffer freq;
  };

  Workspace workspace() const {
    if (!use_fft_) return {};
    return {alloc_real(nfft_), alloc_complex(nfft_ / 2 + 1)};
  }

  void apply(std::span<const double> in, std::span<double> out, Workspace& ws) const {
    if (!use_fft_) {
      const int h = kernel_.half_width;
      for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        const int k0 = std::max(0, i - h), k1 = std::min(n_ - 1, i + h);
        for (int k = k0; k <= k1; ++k) acc += kernel_.tap(i - k) * in[k];
        out[i] = acc * kernel_.pitch;
      }
      return;
    }
    std::copy(in.begin(), in.end(), ws.real.get());
    std::fill(ws.real.get() + n_, ws.real.get() + nfft_, 0.0);
    fftw_execute_dft_r2c(plans_.forward, ws.real.get(), ws.freq.get());
    for (int i = 0; i <= nfft_ / 2; ++i) {
      ws.freq[i][0] *= spectrum_[i];
      ws.freq[i][1] *= spectrum_[i];
    }
    fftw_execute_dft_c2r(plans_.backward, ws.freq.get(), ws.real.get());
    std::copy(ws.real.get(), ws.real.get() + n_, out.begin());
  }

 private:
  const FilterKernel& kernel_;
  int n_;
  bool use_fft_ = false;
  int nfft_ = 0;
  FftPlans plans_;
  std::vector<double> spectrum_;
};

double linear_sample(std::span<const double> line, double x) {
  const int n = int(line.size());
  if (!(x > -1.0 && x < n)) return 0.0;
  const int i0 = int(std::floor(x));
  const double f = x - i0;
  const double a = (i0 >= 0) ? line[i0] : 0.0;
  const double b = (i0 + 1 < n) ? line[i0 + 1] : 0.0;
  return (1.0 - f) * a + f * b;
}

}  // namespace

FilterKernel ramp_kernel(int half_width, double pitch, Apodization apodization) {
  if (half_width < 1) throw ValidationError("ramp_kernel: half_width must be >= 1");
  if (!(pitch > 0)) throw ValidationError("ramp_kernel: pitch must be positive");
  FilterKernel k;
  k.pitch = pitch;
  k.half_width = half_width;
  k.taps.resize(std::size_t(2 * half_width + 1));
  const double inv_t2 = 1.0 / (pitch * pitch);
  for (int n = 0; n <= half_width; ++n) {
    double h;
    if (apodization == Apodization::kNone) {
      if (n == 0)
        h = 0.25 * inv_t2;
      else if (n % 2 == 0)
        h = 0.0;
      else
        h = -inv_t2 / (kPi * kPi * double(n) * double(n));
    } else {
      // 2/t^2 * int_0^{1/2} x cos(pi x) cos(2 pi n x) dx
      h = inv_t2 * (ramp_cos_moment(kPi * (2 * n + 1)) + ramp_cos_moment(kPi * (2 * n - 1)));
    }
    k.taps[std::size_t(half_width + n)] = h;
    k.taps[std::size_t(half_width - n)] = h;
  }
  return k;
}

Branch quadrant_of(double beta) {
  double b = std::fmod(beta, 2.0 * kPi);
  if (b < 0) b += 2.0 * kPi;
  if (b < 0.25 * kPi || b >= 1.75 * kPi) return Branch::kU;
  if (b >= 0.75 * kPi && b < 1.25 * kPi) return Branch::kU;
  return Branch::kV;
}

double FilteredView::sample(double s, double axis_index) const {
  const double line = (s - s0) / ds;
  if (!(line > -1.0 && line < n_lines && axis_index > -1.0 && axis_index < n_axis)) return 0.0;
  const int j0 = int(std::floor(line)), i0 = int(std::floor(axis_index));
  const double fj = line - j0, fi = axis_index - i0;
  auto px = [&](int j, int i) -> double {
    return (j >= 0 && j < n_lines && i >= 0 && i < n_axis) ? at(j, i) : 0.0;
  };
  return (1 - fj) * ((1 - fi) * px(j0, i0) + fi * px(j0, i0 + 1)) +
         fj * ((1 - fi) * px(j0 + 1, i0) + fi * px(j0 + 1, i0 + 1));
}

void convolve_line(std::span<const double> in, std::span<double> out, const FilterKernel& kernel,
                   ConvolutionMethod method) {
  if (in.size() != out.size()) throw ValidationError("convolve_line: size mismatch");
  if (in.empty()) return;
  LineConvolver conv(kernel, int(in.size()), method);
  auto ws = conv.workspace();
  conv.apply(in, out, ws);
}

FilteredView filter_view(std::span<const float> view, double beta, const ScanGeometry& geom,
                         const FilterKernel& kernel, ConvolutionMethod method) {
  const int rows = geom.det_rows, cols = geom.det_cols;
  if (view.size() != std::size_t(rows) * cols)
    throw ValidationError("filter_view: view size does not match detector raster");
  const double sb = std::sin(beta), cb = std::cos(beta);
  const Branch branch = quadrant_of(beta);
  const double factor = branch == Branch::kU ? std::abs(cb) : std::abs(sb);
  if (factor < 1e-6) throw NumericalError("filter_view: branch factor vanishes");
  const double axis_pitch = branch == Branch::kU ? geom.pitch_u : geom.pitch_v;
  if (std::abs(kernel.pitch - axis_pitch) > 1e-12 * axis_pitch) {
    std::ostringstream os;
    os << "filter_view: kernel pitch " << kernel.pitch << " mm does not match the filtration axis pitch "
       << axis_pitch << " mm";
    throw ValidationError(os.str());
  }

  // Preweight and branch factor, stored transposed for kU so that each
  // detector column (a line along v) is contiguous for the shear step.
  std::vector<double> weighted(std::size_t(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const double v = geom.pixel_v(r);
    for (int c = 0; c < cols; ++c) {
      const double u = geom.pixel_u(c);
      const double w = factor * preweight(geom, beta, u, v) * view[std::size_t(r) * cols + c];
      if (branch == Branch::kU)
        weighted[std::size_t(c) * rows + r] = w;
      else
        weighted[std::size_t(r) * cols + c] = w;
    }
  }

  FilteredView out;
  out.branch = branch;
  out.beta = beta;
  out.ds = std::min(geom.pitch_u, geom.pitch_v);
  const double s_max = geom.half_width_u() * std::abs(sb) + geom.half_width_v() * std::abs(cb);
  const int half_lines = int(std::ceil(s_max / out.ds - 1e-9));
  out.n_lines = 2 * half_lines + 1;
  out.s0 = -half_lines * out.ds;
  out.n_axis = branch == Branch::kU ? cols : rows;
  out.data.assign(std::size_t(out.n_lines) * out.n_axis, 0.0);

  const LineConvolver conv(kernel, out.n_axis, method);
#pragma omp parallel
  {
    auto ws = conv.workspace();
    std::vector<double> line(std::size_t(out.n_axis));
#pragma omp for schedule(static)
    for (int j = 0; j < out.n_lines; ++j) {
      const double s = out.s0 + j * out.ds;
      bool any = false;
      for (int i = 0; i < out.n_axis; ++i) {
        double val;
        if (branch == Branch::kU) {
          // v = (s - u sin b) / cos b, sampled along detector column i
          const double v = (s - geom.pixel_u(i) * sb) / cb;
          val = linear_sample({weighted.data() + std::size_t(i) * rows, std::size_t(rows)},
                              geom.row_of(v));
        } else {
          // u = (s - v cos b) / sin b, sampled along detector row i
          const double u = (s - geom.pixel_v(i) * cb) / sb;
          val = linear_sample({weighted.data() + std::size_t(i) * cols, std::size_t(cols)},
                              geom.col_of(u));
        }
        line[i] = val;
        any = any || val != 0.0;
      }
      if (!any) continue;
      conv.apply(line, {out.data.data() + std::size_t(j) * out.n_axis, std::size_t(out.n_axis)}, ws);
    }
  }
  return out;
}

double detector_unit_scale(const ScanGeometry& geom) { return geom.dist_so / geom.dist_sd; }

void backproject_filtered(const FilteredView& view, const ScanGeometry& geom, const GridSpec& grid,
                          double weight_scale, std::span<double> accum) {
  if (accum.size() != grid.size()) throw ValidationError("backproject_filtered: accumulator size");
  const Pose pose = pose_at(geom, view.beta);
  const Vec3& s = pose.source_pos;
  const double sb = std::sin(view.beta), cb = std::cos(view.beta);
  const double ca = std::cos(geom.tilt_alpha);
  const double sd_ca = geom.dist_sd * ca;

#pragma omp parallel for schedule(static)
  for (int iz = 0; iz < grid.nz; ++iz) {
    const double z = grid.z_of(iz);
    const double t = sd_ca / (z + geom.dist_so * ca);
    const double w = weight_scale * t * t;
    double* slice = accum.data() + std::size_t(iz) * grid.nx * grid.ny;
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double y = grid.origin.y + iy * grid.voxel_pitch;
      const double v = s.y + t * (y - s.y) - pose.det_center.y;
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = grid.origin.x + ix * grid.voxel_pitch;
        const double u = s.x + t * (x - s.x) - pose.det_center.x;
        const double line_s = u * sb + v * cb;
        const double axis = view.branch == Branch::kU ? geom.col_of(u) : geom.row_of(v);
        slice[std::size_t(iy) * grid.nx + ix] += w * view.sample(line_s, axis);
      }
    }
  }
}

namespace {

void warn_if_outside_fov(const ScanGeometry& geom, const GridSpec& grid,
                         std::span<const double> betas) {
  const double h = 0.5 * grid.voxel_pitch;
  const Vec3 a = grid.origin - Vec3{h, h, h};
  const Vec3 b = grid.voxel_center(grid.nx - 1, grid.ny - 1, grid.nz - 1) + Vec3{h, h, h};
  const double umax = geom.half_width_u() + 0.5 * geom.pitch_u;
  const double vmax = geom.half_width_v() + 0.5 * geom.pitch_v;
  for (double beta : betas)
    for (int corner = 0; corner < 8; ++corner) {
      const Vec3 p{(corner & 1) ? b.x : a.x, (corner & 2) ? b.y : a.y, (corner & 4) ? b.z : a.z};
      const DetCoord d = project_point(geom, beta, p);
      if (std::abs(d.u) > umax || std::abs(d.v) > vmax) {
        warn("reconstruction grid exits the square field of view; voxels near the grid corners "
             "are not seen by every view");
        return;
      }
    }
}

}  // namespace

Volume reconstruct_fdk(const ProjectionStack& stack, const ScanGeometry& geom, const GridSpec& grid,
                       const FdkOptions& opts) {
  geom.validate();
  grid.validate_against(geom);
  stack.validate_against(geom);
  const int n = stack.n_views();
  const double dbeta = 2.0 * kPi / n;
  for (int k = 0; k < n; ++k) {
    if (std::abs(stack.betas[k] - stack.betas[0] - k * dbeta) > 1e-6) {
      warn("reconstruct_fdk: views are not uniformly spaced over 2pi; quadrature assumes they are");
      break;
    }
  }
  warn_if_outside_fov(geom, grid, stack.betas);

  const int half_width =
      opts.kernel_half_width > 0 ? opts.kernel_half_width : std::max(geom.det_rows, geom.det_cols);
  const FilterKernel kernel_u = ramp_kernel(half_width, geom.pitch_u, opts.apodization);
  const FilterKernel kernel_v = ramp_kernel(half_width, geom.pitch_v, opts.apodization);
  const double weight_scale = 0.5 * dbeta * detector_unit_scale(geom);

  std::vector<double> accum(grid.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    const double beta = stack.betas[k];
    const Branch branch = quadrant_of(beta);
    if (opts.subset == ViewSubset::kUBranchOnly && branch != Branch::kU) continue;
    if (opts.subset == ViewSubset::kVBranchOnly && branch != Branch::kV) continue;
    const FilteredView fv = filter_view(stack.view(k), beta, geom,
                                        branch == Branch::kU ? kernel_u : kernel_v, opts.convolution);
    backproject_filtered(fv, geom, grid, weight_scale, accum);
  }

  Volume vol(grid);
  for (std::size_t i = 0; i < accum.size(); ++i) {
    if (!std::isfinite(accum[i])) throw NumericalError("reconstruct_fdk: non-finite voxel value");
    vol.data[i] = float(accum[i]);
  }
  return vol;
}

}  // namespace sccl
