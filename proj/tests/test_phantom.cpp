#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sccl/errors.hpp"
#include "sccl/metrics.hpp"
#include "sccl/phantom.hpp"

using namespace sccl;

namespace {

double total(const Volume& v) { return std::accumulate(v.data.begin(), v.data.end(), 0.0); }

GridSpec pcb_grid() { return GridSpec::centered(96, 96, 30, 0.14); }

bool is_local_max(const std::vector<double>& p, int i) {
  const double left = i > 0 ? p[std::size_t(i - 1)] : -1e300;
  const double right = i + 1 < int(p.size()) ? p[std::size_t(i + 1)] : -1e300;
  return p[std::size_t(i)] >= left && p[std::size_t(i)] >= right;
}

}  // namespace

TEST_CASE("make_point") {
  const GridSpec g = GridSpec::centered(9, 9, 9, 0.5);
  const Volume c = make_point(g, {4, 4, 4}, 2.5);
  CHECK(total(c) == doctest::Approx(2.5));

  const Volume z = make_point(g, {4, 4, 4}, 0.0);
  CHECK(std::all_of(z.data.begin(), z.data.end(), [](float x) { return x == 0.0f; }));

  const Volume off = make_point(g, {1, 7, 3}, 1.0);
  const auto it = std::max_element(off.data.begin(), off.data.end());
  CHECK(std::size_t(it - off.data.begin()) == g.index(1, 7, 3));

  CHECK_THROWS_AS(make_point(g, {9, 0, 0}, 1.0), ValidationError);
  CHECK_THROWS_AS(make_point(g, {0, -1, 0}, 1.0), ValidationError);
}

TEST_CASE("make_cylinder") {
  const GridSpec g = GridSpec::centered(40, 40, 40, 0.1);

  SUBCASE("voxel count matches the analytic volume") {
    const double r = 1.2, h = 2.0;  // 12 voxels radius
    const Volume v = make_cylinder(g, r, h, 1.0);
    const double expected = std::numbers::pi * r * r * h / std::pow(g.voxel_pitch, 3);
    CHECK(std::abs(total(v) - expected) < 0.01 * expected);
  }

  SUBCASE("a radius beyond the grid fills the slab") {
    const Volume v = make_cylinder(g, 100.0, 1.0, 0.5);
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) CHECK(v.at(x, y, 20) == doctest::Approx(0.5));
  }

  SUBCASE("zero value gives a zero volume") {
    const Volume v = make_cylinder(g, 1.0, 1.0, 0.0);
    CHECK(total(v) == 0.0);
  }

  CHECK_THROWS_AS(make_cylinder(g, 0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(make_cylinder(g, -1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("make_slab") {
  const GridSpec g = GridSpec::centered(8, 6, 10, 0.2);

  SUBCASE("full height is uniform") {
    const Volume v = make_slab(g, g.z_min(), g.z_max(), 0.3);
    for (float x : v.data) CHECK(x == doctest::Approx(0.3f));
  }
  SUBCASE("empty interval is zero") {
    CHECK(total(make_slab(g, 0.5, 0.5, 1.0)) == 0.0);
    CHECK(total(make_slab(g, 0.5, 0.1, 1.0)) == 0.0);
  }
  SUBCASE("half height sums to value * nx * ny * nz/2") {
    const double mid = 0.5 * (g.z_min() + g.z_max());
    const Volume v = make_slab(g, g.z_min(), mid, 2.0);
    CHECK(total(v) == doctest::Approx(2.0 * g.nx * g.ny * (g.nz / 2)).epsilon(1e-6));
  }
}

TEST_CASE("make_pcb_phantom") {
  const GridSpec g = pcb_grid();
  PcbParams p;
  p.seed = 42;

  SUBCASE("deterministic for a given seed") {
    const Volume a = make_pcb_phantom(g, p);
    const Volume b = make_pcb_phantom(g, p);
    CHECK(a.data == b.data);
    PcbParams q = p;
    q.seed = 43;
    CHECK(make_pcb_phantom(g, q).data != a.data);
  }

  SUBCASE("defaults to three layers") { CHECK(resolved_layer_zs(g, p).size() == 3); }

  SUBCASE("values are finite and nonnegative") {
    const Volume v = make_pcb_phantom(g, p);
    for (float x : v.data) {
      CHECK(std::isfinite(x));
      CHECK(x >= 0.0f);
    }
  }

  SUBCASE("equal attenuations give a uniform slab") {
    PcbParams q = p;
    q.trace_attn = q.substrate_attn = 0.2;
    const Volume v = make_pcb_phantom(g, q);
    std::vector<float> distinct(v.data.begin(), v.data.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    CHECK(distinct.size() == 2);  // empty space and substrate
    CHECK(distinct.back() == doctest::Approx(0.2f));
  }

  SUBCASE("summed z-profile peaks at the layers") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      PcbParams q = p;
      q.seed = seed;
      const Volume v = make_pcb_phantom(g, q);
      const auto profile = slice_sums(v);
      for (double z : resolved_layer_zs(g, q)) {
        const int iz = int(std::lround((z - g.origin.z) / g.voxel_pitch));
        bool found = false;
        for (int d = -1; d <= 1; ++d)
          if (iz + d >= 0 && iz + d < g.nz && is_local_max(profile, iz + d)) found = true;
        CHECK_MESSAGE(found, "seed " << seed << " layer z " << z);
      }
    }
  }

  SUBCASE("center column shows exactly the layers") {
    const Volume v = make_pcb_phantom(g, p);
    const auto col = z_profile(v, g.nx / 2, g.ny / 2);
    std::vector<int> peaks;
    for (int z = 0; z < g.nz; ++z)
      if (col[std::size_t(z)] == float(p.trace_attn)) peaks.push_back(z);
    std::vector<int> want;
    for (double z : resolved_layer_zs(g, p))
      want.push_back(int(std::lround((z - g.origin.z) / g.voxel_pitch)));
    CHECK(peaks == want);
  }

  SUBCASE("layers are connected by vias") {
    const Volume v = make_pcb_phantom(g, p);
    const auto zs = resolved_layer_zs(g, p);
    const int mid = int(std::lround((0.5 * (zs[0] + zs[1]) - g.origin.z) / g.voxel_pitch));
    int copper = 0;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) copper += v.at(x, y, mid) == float(p.trace_attn);
    CHECK(copper > 0);
  }

  SUBCASE("layer outside the slab is rejected") {
    PcbParams q = p;
    q.layer_zs = {0.0, 10.0};
    CHECK_THROWS_AS(make_pcb_phantom(g, q), ValidationError);
  }

  SUBCASE("paper grid scale builds") {
    // 300 x 300 x 80 at 0.07 mm, as used for the full-size simulation
    const GridSpec big = GridSpec::centered(300, 300, 80, 0.07);
    const Volume v = make_pcb_phantom(big, p);
    CHECK(v.data.size() == std::size_t(300) * 300 * 80);
    CHECK(resolved_layer_zs(big, p).size() == 3);
  }
}
