#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sccl/errors.hpp"
#include "sccl/parallel.hpp"
#include "sccl/phantom.hpp"
#include "sccl/sirt.hpp"
#include "test_support.hpp"

using namespace sccl;

namespace {

// Dense row-major matrix as a LinearOperator with the exact transpose.
LinearOperator dense(std::size_t rows, std::size_t cols, std::vector<float> a) {
  LinearOperator op;
  op.rows = rows;
  op.cols = cols;
  op.apply = [=](std::span<const float> x, std::span<float> y) {
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < cols; ++j) acc += double(a[i * cols + j]) * x[j];
      y[i] = float(acc);
    }
  };
  op.apply_adjoint = [=](std::span<const float> y, std::span<float> x) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0;
      for (std::size_t i = 0; i < rows; ++i) acc += double(a[i * cols + j]) * y[i];
      x[j] = float(acc);
    }
  };
  return op;
}

bool non_increasing(const std::vector<double>& r) {
  for (std::size_t k = 1; k < r.size(); ++k)
    if (r[k] > r[k - 1] * (1 + 1e-6)) return false;
  return true;
}

}  // namespace

TEST_CASE("sirt_solve on explicit matrices") {
  SUBCASE("scalar system is solved in one step") {
    const float b[] = {4.0f};
    const SirtResult r = sirt_solve(dense(1, 1, {2.0f}), b, {.n_iters = 1});
    CHECK(r.x[0] == 2.0f);
    REQUIRE(r.residual_norms.size() == 1);
    CHECK(r.residual_norms[0] == 4.0);
    CHECK(r.final_residual == 0.0);
  }

  SUBCASE("first iterate is lambda C A^T R b") {
    const std::vector<float> a = {1, 2, 0, 3, 1, 1, 0, 2, 4, 1, 1, 1};  // 4 x 3
    const std::vector<float> b = {1.0f, -2.0f, 0.5f, 3.0f};
    const double lambda = 0.7;
    const SirtResult r =
        sirt_solve(dense(4, 3, a), b, {.n_iters = 1, .relaxation = lambda, .nonnegativity = false});
    for (int j = 0; j < 3; ++j) {
      double col = 0, acc = 0;
      for (int i = 0; i < 4; ++i) {
        double row = 0;
        for (int k = 0; k < 3; ++k) row += a[std::size_t(i * 3 + k)];
        col += a[std::size_t(i * 3 + j)];
        acc += a[std::size_t(i * 3 + j)] * b[std::size_t(i)] / row;
      }
      CHECK(r.x[std::size_t(j)] == doctest::Approx(lambda * acc / col).epsilon(1e-6));
    }
  }

  SUBCASE("empty rows and columns are skipped") {
    // Second row and second column are zero.
    const std::vector<float> b = {3.0f, 5.0f};
    const SirtResult r = sirt_solve(dense(2, 2, {3, 0, 0, 0}), b, {.n_iters = 5});
    CHECK(r.x[0] == doctest::Approx(1.0f));
    CHECK(r.x[1] == 0.0f);
    CHECK(std::isfinite(r.final_residual));
  }

  SUBCASE("nonnegativity clamps") {
    const float b[] = {-4.0f};
    CHECK(sirt_solve(dense(1, 1, {2.0f}), b, {.n_iters = 3}).x[0] == 0.0f);
    CHECK(sirt_solve(dense(1, 1, {2.0f}), b, {.n_iters = 3, .nonnegativity = false}).x[0] == -2.0f);
  }

  SUBCASE("option validation") {
    const float b[] = {4.0f};
    CHECK_THROWS_AS(sirt_solve(dense(1, 1, {2.0f}), b, {.n_iters = 0}), ValidationError);
    CHECK_THROWS_AS(sirt_solve(dense(1, 1, {2.0f}), b, {.relaxation = 0.0}), ValidationError);
    CHECK_THROWS_AS(sirt_solve(dense(1, 1, {2.0f}), b, {.relaxation = 2.5}), ValidationError);
    const float two[] = {1.0f, 2.0f};
    CHECK_THROWS_AS(sirt_solve(dense(1, 1, {2.0f}), two, {}), ValidationError);
  }

  SUBCASE("non-finite data aborts") {
    const float b[] = {NAN};
    CHECK_THROWS_AS(sirt_solve(dense(1, 1, {2.0f}), b, {.n_iters = 2}), NumericalError);
  }
}

TEST_CASE("sirt_reconstruct with the projector pair") {
  const ScanGeometry geom = test::small_geometry(64, 0.4, 16);
  const auto betas = uniform_betas(16);

  SUBCASE("zero data gives zeros") {
    const GridSpec grid = GridSpec::centered(8, 8, 8, 0.15);
    const ProjectionStack s(betas, geom);
    const SirtReconstruction run = sirt_reconstruct(s, geom, grid, {.n_iters = 5});
    CHECK(std::all_of(run.volume.data.begin(), run.volume.data.end(), [](float x) { return x == 0.0f; }));
    CHECK(residual_norms(run).size() == 5);
    for (double r : residual_norms(run)) CHECK(r == 0.0);
  }

  SUBCASE("residual does not increase on consistent 16^3 data") {
    const GridSpec grid = GridSpec::centered(16, 16, 16, 0.15);
    const Volume truth = test::random_volume(grid, 5, 0.5);
    const ProjectionStack b = forward_project(truth, geom, betas);
    const SirtReconstruction run = sirt_reconstruct(b, geom, grid, {.n_iters = 60});
    CHECK(residual_norms(run).size() == 60);
    CHECK(non_increasing(residual_norms(run)));
    CHECK(run.final_residual <= residual_norms(run).back());
  }

  SUBCASE("deterministic across runs and thread counts") {
    const GridSpec grid = GridSpec::centered(12, 12, 12, 0.15);
    const ProjectionStack b = forward_project(test::random_volume(grid, 6), geom, betas);
    const int before = num_threads();
    set_num_threads(1);
    const SirtReconstruction one = sirt_reconstruct(b, geom, grid, {.n_iters = 8});
    set_num_threads(4);
    const SirtReconstruction four = sirt_reconstruct(b, geom, grid, {.n_iters = 8});
    set_num_threads(before);
    const SirtReconstruction again = sirt_reconstruct(b, geom, grid, {.n_iters = 8});
    CHECK(one.volume.data == four.volume.data);
    CHECK(one.volume.data == again.volume.data);
    CHECK(one.residual_norms == four.residual_norms);
  }
}

TEST_CASE("sirt converges on a consistent 32^3 problem") {
  const ScanGeometry geom = test::small_geometry(80, 0.4, 32);
  const GridSpec grid = GridSpec::centered(32, 32, 32, 0.1);
  PcbParams p;
  p.seed = 3;
  const Volume truth = make_pcb_phantom(grid, p);
  const ProjectionStack b = forward_project(truth, geom, uniform_betas(32));
  const SirtReconstruction run = sirt_reconstruct(b, geom, grid, {.n_iters = 200});
  CHECK(residual_norms(run).size() == 200);
  CHECK(run.final_residual < 0.05 * residual_norms(run).front());
  CHECK(non_increasing(residual_norms(run)));
}
