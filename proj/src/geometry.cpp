#include "sccl/geometry.hpp"

#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace {

[[noreturn]] void fail(const char* field, const std::string& what, double got) {
  std::ostringstream os;
  os << "geometry." << field << ": " << what << ", got " << got;
  throw ValidationError(os.str());
}

}  // namespace

void ScanGeometry::validate() const {
  if (!(tilt_alpha > 0 && tilt_alpha < std::numbers::pi / 2))
    fail("tilt_alpha", "must lie strictly between 0 and 90 degrees", rad_to_deg(tilt_alpha));
  if (!(dist_so > 0)) fail("dist_so", "must be positive", dist_so);
  if (!(dist_sd > dist_so)) fail("dist_sd", "must exceed dist_so", dist_sd);
  if (n_views < 1) fail("n_views", "must be >= 1", n_views);
  if (det_rows < 2) fail("det_rows", "must be >= 2", det_rows);
  if (det_cols < 2) fail("det_cols", "must be >= 2", det_cols);
  if (!(pitch_u > 0) || !std::isfinite(pitch_u)) fail("pitch_u", "must be positive", pitch_u);
  if (!(pitch_v > 0) || !std::isfinite(pitch_v)) fail("pitch_v", "must be positive", pitch_v);
}

Pose pose_at(const ScanGeometry& geom, double beta) {
  if (!std::isfinite(beta)) throw ValidationError("pose_at: beta must be finite");
  const double sa = std::sin(geom.tilt_alpha), ca = std::cos(geom.tilt_alpha);
  const double sb = std::sin(beta), cb = std::cos(beta);
  const double so = geom.dist_so, od = geom.dist_od();
  Pose pose;
  pose.beta = beta;
  pose.source_pos = {so * sa * sb, so * sa * cb, -so * ca};
  pose.det_center = {-od * sa * sb, -od * sa * cb, od * ca};
  return pose;
}

DetCoord project_point(const ScanGeometry& geom, double beta, Vec3 p) {
  const double ca = std::cos(geom.tilt_alpha);
  const double height = p.z + geom.dist_so * ca;
  if (!(height > 0))
    throw ValidationError("project_point: point lies at or below the source plane");
  const Pose pose = pose_at(geom, beta);
  const double t = geom.dist_sd * ca / height;
  const Vec3& s = pose.source_pos;
  return {s.x + t * (p.x - s.x) - pose.det_center.x, s.y + t * (p.y - s.y) - pose.det_center.y, t};
}

double backproj_weight(const ScanGeometry& geom, double z) {
  const double ca = std::cos(geom.tilt_alpha);
  const double height = z + geom.dist_so * ca;
  if (!(height > 0))
    throw ValidationError("backproj_weight: z must lie above the source plane");
  const double r = geom.dist_sd * ca / height;
  return r * r;
}

double preweight(const ScanGeometry& geom, double beta, double u, double v) {
  const double sd = geom.dist_sd;
  const double sd_sa = sd * std::sin(geom.tilt_alpha);
  const double s = u * std::sin(beta) + v * std::cos(beta);
  const double radicand = sd * sd - 2.0 * sd_sa * s + u * u + v * v;
  if (!(radicand > 0)) throw NumericalError("preweight: degenerate geometry (radicand <= 0)");
  return (sd_sa - s) / std::sqrt(radicand);
}

std::vector<double> uniform_betas(int n_views) {
  if (n_views < 1) throw ValidationError("uniform_betas: n_views must be >= 1");
  std::vector<double> betas(n_views);
  for (int k = 0; k < n_views; ++k) betas[k] = 2.0 * std::numbers::pi * k / n_views;
  return betas;
}

}  // namespace sccl
