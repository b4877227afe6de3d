#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace sccl {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Rotational laminography scan with a horizontal detector whose u/v axes stay
/// parallel to global x/y. The rotation axis is z; the central ray runs from
/// the source through the origin O to the detector center D.
struct ScanGeometry {
  double tilt_alpha = std::numbers::pi / 4;  // rad, angle of central ray to z
  double dist_so = 0;                        // |SO|, mm
  double dist_sd = 0;                        // |SD|, mm
  int n_views = 1;
  int det_rows = 2;
  int det_cols = 2;
  double pitch_u = 1;  // mm per column
  double pitch_v = 1;  // mm per row

  double dist_od() const { return dist_sd - dist_so; }
  /// z of the source plane (below the object).
  double source_z() const { return -dist_so * std::cos(tilt_alpha); }
  /// z of the detector plane E.
  double detector_z() const { return dist_od() * std::cos(tilt_alpha); }

  /// Detector pixel centers: u = (c - (cols-1)/2) * pitch_u, same for v/rows.
  double pixel_u(double col) const { return (col - 0.5 * (det_cols - 1)) * pitch_u; }
  double pixel_v(double row) const { return (row - 0.5 * (det_rows - 1)) * pitch_v; }
  double col_of(double u) const { return u / pitch_u + 0.5 * (det_cols - 1); }
  double row_of(double v) const { return v / pitch_v + 0.5 * (det_rows - 1); }
  double half_width_u() const { return 0.5 * (det_cols - 1) * pitch_u; }
  double half_width_v() const { return 0.5 * (det_rows - 1) * pitch_v; }

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Pose {
  double beta = 0;
  Vec3 source_pos;
  Vec3 det_center;
  Vec3 u_axis{1, 0, 0};
  Vec3 v_axis{0, 1, 0};

  /// Global position of detector point (u, v).
  Vec3 detector_point(double u, double v) const {
    return {det_center.x + u, det_center.y + v, det_center.z};
  }
};

/// Detector-plane coordinates of a projected point plus the magnification
/// factor of its height (ratio of source-to-plane E over source-to-point
/// vertical distances).
struct DetCoord {
  double u = 0;
  double v = 0;
  double magnification = 1;
};

struct RotatedCoord {
  double u_prime = 0;
  double v_prime = 0;
};

/// Source and detector placement at projection angle beta. The v' axis, from
/// D toward the rotation axis, points along (sin beta, cos beta) in xy.
Pose pose_at(const ScanGeometry& geom, double beta);

/// Fixed detector frame (u, v) to the rotating frame (u', v').
inline RotatedCoord rotate_coords(double beta, double u, double v) {
  const double c = std::cos(beta), s = std::sin(beta);
  return {u * c - v * s, u * s + v * c};
}

/// Central projection of p through the source onto the detector plane.
DetCoord project_point(const ScanGeometry& geom, double beta, Vec3 p);

/// Backprojection distance weight (|SD| cos a / (z + |SO| cos a))^2.
double backproj_weight(const ScanGeometry& geom, double z);

/// Per-pixel preweight (|SD| sin a - s) / |S - pixel| with
/// s = u sin(beta) + v cos(beta), the pixel's v' coordinate. Excludes the
/// |cos beta| / |sin beta| branch factor.
double preweight(const ScanGeometry& geom, double beta, double u, double v);

/// n equally spaced angles k * 2pi / n, k = 0..n-1.
std::vector<double> uniform_betas(int n_views);

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace sccl
