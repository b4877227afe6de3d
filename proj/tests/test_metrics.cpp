#include <doctest.h>

#include <cmath>
#include <random>

#include "sccl/errors.hpp"
#include "sccl/metrics.hpp"
#include "sccl/phantom.hpp"
#include "test_support.hpp"

using namespace sccl;

namespace {

// Direct SSIM at one pixel with a full 2D Gaussian window, clipped to the slice
// and renormalized.
double ssim_at(const Volume& a, const Volume& b, int x, int y, int z, double c1, double c2) {
  double w_sum = 0, ma = 0, mb = 0;
  for (int dy = -5; dy <= 5; ++dy)
    for (int dx = -5; dx <= 5; ++dx) {
      const int xx = x + dx, yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= a.grid.nx || yy >= a.grid.ny) continue;
      const double w = std::exp(-(dx * dx + dy * dy) / (2 * 1.5 * 1.5));
      w_sum += w;
      ma += w * a.at(xx, yy, z);
      mb += w * b.at(xx, yy, z);
    }
  ma /= w_sum;
  mb /= w_sum;
  double va = 0, vb = 0, cov = 0;
  for (int dy = -5; dy <= 5; ++dy)
    for (int dx = -5; dx <= 5; ++dx) {
      const int xx = x + dx, yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= a.grid.nx || yy >= a.grid.ny) continue;
      const double w = std::exp(-(dx * dx + dy * dy) / (2 * 1.5 * 1.5)) / w_sum;
      const double da = a.at(xx, yy, z) - ma, db = b.at(xx, yy, z) - mb;
      va += w * da * da;
      vb += w * db * db;
      cov += w * da * db;
    }
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

double ssim_oracle(const Volume& a, const Volume& b, const Roi& roi) {
  double lo = 1e300, hi = -1e300;
  for (int z = roi.z0; z < roi.z1; ++z)
    for (int y = roi.y0; y < roi.y1; ++y)
      for (int x = roi.x0; x < roi.x1; ++x) {
        lo = std::min(lo, double(b.at(x, y, z)));
        hi = std::max(hi, double(b.at(x, y, z)));
      }
  const double l = hi - lo, c1 = (0.01 * l) * (0.01 * l), c2 = (0.03 * l) * (0.03 * l);
  double acc = 0;
  for (int z = roi.z0; z < roi.z1; ++z)
    for (int y = roi.y0; y < roi.y1; ++y)
      for (int x = roi.x0; x < roi.x1; ++x) acc += ssim_at(a, b, x, y, z, c1, c2);
  return acc / double(roi.count());
}

Volume shifted(const Volume& v, float by) {
  Volume out = v;
  for (float& x : out.data) x += by;
  return out;
}

}  // namespace

TEST_CASE("rmse") {
  SUBCASE("two-voxel example") {
    const GridSpec g{2, 1, 1, 1.0, {0, 0, 0}};
    Volume a(g), b(g);
    b.data = {3.0f, 4.0f};
    CHECK(rmse(a, b, Roi::whole(g)) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
  }

  const GridSpec g = GridSpec::centered(12, 10, 6, 0.2);
  const Volume a = test::random_volume(g, 1), b = test::random_volume(g, 2), c = test::random_volume(g, 3);
  const Roi roi = Roi::whole(g);

  CHECK(rmse(a, a, roi) == 0.0);
  CHECK(rmse(a, b, roi) == rmse(b, a, roi));
  CHECK(rmse(a, c, roi) <= rmse(a, b, roi) + rmse(b, c, roi) + 1e-12);
  CHECK(rmse(a, shifted(a, 0.25f), roi) == doctest::Approx(0.25).epsilon(1e-6));

  SUBCASE("roi restricts the average") {
    Volume d = a;
    d.at(0, 0, 0) += 100.0f;
    CHECK(rmse(a, d, Roi::inset(g, 1)) == 0.0);
    CHECK(rmse(a, d, roi) > 0.0);
  }

  SUBCASE("errors") {
    const Volume other(GridSpec::centered(12, 10, 5, 0.2));
    CHECK_THROWS_AS(rmse(a, other, roi), ValidationError);
    CHECK_THROWS_AS(rmse(a, b, Roi{0, 13, 0, 10, 0, 6}), ValidationError);
    CHECK_THROWS_AS(rmse(a, b, Roi{3, 3, 0, 10, 0, 6}), ValidationError);
  }
}

TEST_CASE("mssim") {
  const GridSpec g = GridSpec::centered(24, 20, 4, 0.2);
  const Volume a = test::random_volume(g, 4), b = test::random_volume(g, 5);
  const Roi roi = Roi::whole(g);

  CHECK(mssim(a, a, roi) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("matches a direct windowed computation") {
    CHECK(mssim(a, b, roi) == doctest::Approx(ssim_oracle(a, b, roi)).epsilon(1e-9));
    const Roi inner = Roi::inset(g, 3);
    const Volume smooth = make_cylinder(g, 1.5, 0.6, 1.0);
    const Volume noisy = shifted(smooth, 0.05f);
    CHECK(mssim(noisy, smooth, inner) == doctest::Approx(ssim_oracle(noisy, smooth, inner)).epsilon(1e-9));
  }

  SUBCASE("a constant shift lowers only the luminance term") {
    double lo = 1e300, hi = -1e300;
    for (float x : b.data) {
      lo = std::min(lo, double(x));
      hi = std::max(hi, double(x));
    }
    const double l = hi - lo;
    const Volume s = shifted(b, float(0.5 * l));
    const double m = mssim(s, b, roi);
    CHECK(m < 1.0);
    CHECK(m == doctest::Approx(ssim_oracle(s, b, roi)).epsilon(1e-9));
  }

  SUBCASE("stays in [-1, 1] on random inputs") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      Volume x(g), y(g);
      std::normal_distribution<float> d(0.0f, 1.0f);
      for (float& v : x.data) v = d(rng);
      for (float& v : y.data) v = (trial % 2 ? -1.0f : 1.0f) * d(rng);
      const double m = mssim(x, y, roi);
      CHECK(m >= -1.0);
      CHECK(m <= 1.0);
    }
    // Mirrored about mid-range: same mean, anticorrelated structure.
    Volume mirror = a;
    for (float& v : mirror.data) v = 1.0f - v;
    CHECK(mssim(mirror, a, roi) < 0.0);
  }

  SUBCASE("reference anchors the dynamic range") {
    Volume wide = b;
    for (float& v : wide.data) v *= 3.0f;
    // Swapping arguments changes L, so the values generally differ.
    CHECK(mssim(a, wide, roi) != doctest::Approx(mssim(wide, a, roi)));
  }

  SUBCASE("errors") {
    const Volume flat(g);
    CHECK_THROWS_AS(mssim(a, flat, roi), ValidationError);
    CHECK_THROWS_AS(mssim(a, Volume(GridSpec::centered(24, 20, 5, 0.2)), roi), ValidationError);
    CHECK_THROWS_AS(mssim(a, b, roi, {.window = 10}), ValidationError);
  }

  SUBCASE("evaluate bundles both measures") {
    const MetricReport r = evaluate(a, b, Roi::inset(g, 2));
    CHECK(r.rmse == rmse(a, b, Roi::inset(g, 2)));
    CHECK(r.mssim == mssim(a, b, Roi::inset(g, 2)));
    CHECK(r.roi.x0 == 2);
    CHECK(r.roi.z0 == 1);  // clamped so the roi stays non-empty
    CHECK(r.roi.z1 == 3);
  }
}

TEST_CASE("Roi::inset") {
  const GridSpec g = GridSpec::centered(150, 150, 40, 0.14);
  const Roi r = Roi::inset(g, 5);
  CHECK(r.x0 == 5);
  CHECK(r.x1 == 145);
  CHECK(r.z0 == 5);
  CHECK(r.z1 == 35);
  CHECK(r.count() == 140LL * 140 * 30);
}

TEST_CASE("profiles") {
  const GridSpec g = GridSpec::centered(5, 4, 7, 0.5);
  const Volume zero(g);
  const auto p = z_profile(zero, 2, 2);
  CHECK(p.size() == 7);
  for (double x : p) CHECK(x == 0.0);

  const Volume pt = make_point(g, {1, 2, 3}, 4.0);
  const auto q = z_profile(pt, 1, 2);
  CHECK(q[3] == 4.0);
  CHECK(slice_sums(pt)[3] == 4.0);
  CHECK(slice_sums(pt)[2] == 0.0);
  CHECK_THROWS_AS(z_profile(pt, 5, 0), ValidationError);
}
