#include "sccl/sirt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace {

double l2(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += double(x) * x;
  return std::sqrt(acc);
}

void reciprocal_in_place(std::vector<float>& v) {
  for (float& x : v) x = (x > 0.0f) ? 1.0f / x : 0.0f;
}

}  // namespace

void SirtOptions::validate() const {
  if (n_iters < 1) throw ValidationError("sirt.n_iters: must be >= 1");
  if (!(relaxation > 0 && relaxation <= 2))
    throw ValidationError("sirt.relaxation: must lie in (0, 2]");
}

SirtResult sirt_solve(const LinearOperator& op, std::span<const float> b, const SirtOptions& opts) {
  opts.validate();
  if (b.size() != op.rows) throw ValidationError("sirt: measurement size does not match operator");

  std::vector<float> row_w(op.rows), col_w(op.cols);
  {
    const std::vector<float> ones_x(op.cols, 1.0f);
    op.apply(ones_x, row_w);
    const std::vector<float> ones_y(op.rows, 1.0f);
    op.apply_adjoint(ones_y, col_w);
  }
  reciprocal_in_place(row_w);
  reciprocal_in_place(col_w);

  SirtResult res;
  res.x.assign(op.cols, 0.0f);
  res.residual_norms.reserve(std::size_t(opts.n_iters));
  std::vector<float> ax(op.rows), r(op.rows), update(op.cols);
  const float lambda = float(opts.relaxation);

  auto residual = [&] {
    op.apply(res.x, ax);
    for (std::size_t i = 0; i < op.rows; ++i) r[i] = b[i] - ax[i];
    const double norm = l2(r);
    if (!std::isfinite(norm)) {
      std::ostringstream os;
      os << "sirt: non-finite residual at iteration " << res.residual_norms.size();
      throw NumericalError(os.str());
    }
    return norm;
  };

  for (int it = 0; it < opts.n_iters; ++it) {
    res.residual_norms.push_back(residual());
    for (std::size_t i = 0; i < op.rows; ++i) r[i] *= row_w[i];
    op.apply_adjoint(r, update);
    for (std::size_t j = 0; j < op.cols; ++j) {
      float v = res.x[j] + lambda * col_w[j] * update[j];
      if (opts.nonnegativity && v < 0.0f) v = 0.0f;
      res.x[j] = v;
    }
  }
  res.final_residual = residual();
  return res;
}

LinearOperator make_projection_operator(const ScanGeometry& geom, std::span<const double> betas,
                                        const GridSpec& grid) {
  geom.validate();
  grid.validate_against(geom);
  LinearOperator op;
  op.rows = betas.size() * std::size_t(geom.det_rows) * geom.det_cols;
  op.cols = grid.size();
  std::vector<double> angles(betas.begin(), betas.end());
  op.apply = [geom, angles, grid](std::span<const float> x, std::span<float> y) {
    Volume vol(grid);
    std::copy(x.begin(), x.end(), vol.data.begin());
    // Iterates may legitimately have support outside the field of view.
    const ProjectionStack stack = forward_project(vol, geom, angles, {.check_fov = false});
    std::copy(stack.data.begin(), stack.data.end(), y.begin());
  };
  op.apply_adjoint = [geom, angles, grid](std::span<const float> y, std::span<float> x) {
    ProjectionStack stack(angles, geom);
    std::copy(y.begin(), y.end(), stack.data.begin());
    const Volume vol = back_project(stack, geom, grid, BackprojectionWeighting::kRayDensity);
    std::copy(vol.data.begin(), vol.data.end(), x.begin());
  };
  return op;
}

SirtReconstruction sirt_reconstruct(const ProjectionStack& stack, const ScanGeometry& geom,
                                    const GridSpec& grid, const SirtOptions& opts) {
  stack.validate_against(geom);
  const LinearOperator op = make_projection_operator(geom, stack.betas, grid);
  SirtResult res = sirt_solve(op, stack.data, opts);
  SirtReconstruction out{Volume(grid), std::move(res.residual_norms), res.final_residual};
  out.volume.data = std::move(res.x);
  return out;
}

}  // namespace sccl
