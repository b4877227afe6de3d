#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sccl/geometry.hpp"
#include "sccl/projector.hpp"
#include "sccl/volume.hpp"

namespace sccl {

struct SirtOptions {
  int n_iters = 200;
  double relaxation = 1.0;  // lambda, in (0, 2]
  bool nonnegativity = true;

  void validate() const;
};

/// y = A x and x = A^T y for a system with `rows` measurements and `cols` unknowns.
struct LinearOperator {
  std::size_t rows = 0, cols = 0;
  std::function<void(std::span<const float> x, std::span<float> y)> apply;
  std::function<void(std::span<const float> y, std::span<float> x)> apply_adjoint;
};

struct SirtResult {
  std::vector<float> x;
  /// residual_norms[k] = ||b - A x_k||_2 for the iterate x_k entering
  /// iteration k (x_0 = 0), so size() == n_iters.
  std::vector<double> residual_norms;
  double final_residual = 0;  // ||b - A x_n||_2
};

/// x <- x + lambda C A^T R (b - A x), with R and C the reciprocal row and
/// column sums of A (zero sums contribute nothing). Starts from x = 0.
SirtResult sirt_solve(const LinearOperator& op, std::span<const float> b, const SirtOptions& opts);

/// The projector pair as a LinearOperator: forward_project and
/// back_project(kRayDensity).
LinearOperator make_projection_operator(const ScanGeometry& geom, std::span<const double> betas,
                                        const GridSpec& grid);

struct SirtReconstruction {
  Volume volume;
  std::vector<double> residual_norms;
  double final_residual = 0;
};

SirtReconstruction sirt_reconstruct(const ProjectionStack& stack, const ScanGeometry& geom,
                                    const GridSpec& grid, const SirtOptions& opts = {});

inline const std::vector<double>& residual_norms(const SirtReconstruction& run) {
  return run.residual_norms;
}

}  // namespace sccl
