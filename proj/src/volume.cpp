#include "sccl/volume.hpp"

#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

GridSpec GridSpec::centered(int nx, int ny, int nz, double pitch, Vec3 center) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.voxel_pitch = pitch;
  g.origin = {center.x - 0.5 * (nx - 1) * pitch, center.y - 0.5 * (ny - 1) * pitch,
              center.z - 0.5 * (nz - 1) * pitch};
  return g;
}

bool GridSpec::same_raster(const GridSpec& o) const {
  return nx == o.nx && ny == o.ny && nz == o.nz && voxel_pitch == o.voxel_pitch &&
         origin == o.origin;
}

void GridSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    std::ostringstream os;
    os << "grid: dimensions must be >= 1, got " << nx << "x" << ny << "x" << nz;
    throw ValidationError(os.str());
  }
  if (!(voxel_pitch > 0) || !std::isfinite(voxel_pitch))
    throw ValidationError("grid.voxel_pitch: must be positive");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(origin.z))
    throw ValidationError("grid.origin: must be finite");
}

void GridSpec::validate_against(const ScanGeometry& geom) const {
  validate();
  if (!(z_min() > geom.source_z()) || !(z_max() < geom.detector_z())) {
    std::ostringstream os;
    os << "grid: z-extent [" << z_min() << ", " << z_max()
       << "] mm must lie strictly between the source plane z=" << geom.source_z()
       << " and the detector plane z=" << geom.detector_z();
    throw ValidationError(os.str());
  }
}

}  // namespace sccl
