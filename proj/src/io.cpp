#include "sccl/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_payload(std::span<const float> values, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open " + path.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size() * 4));
  } else {
    for (float v : values) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      char bytes[4] = {char(bits), char(bits >> 8), char(bits >> 16), char(bits >> 24)};
      out.write(bytes, 4);
    }
  }
  if (!out) throw NumericalError("failed writing " + path.string());
}

std::vector<float> read_payload(const fs::path& path, std::size_t count) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw ValidationError("cannot stat payload " + path.string());
  if (bytes != count * 4) {
    std::ostringstream os;
    os << "payload " << path.string() << " holds " << bytes << " bytes, sidecar dims need "
       << count * 4;
    throw ValidationError(os.str());
  }
  std::vector<float> values(count);
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(values.data()), std::streamsize(count * 4));
  if (!in) throw NumericalError("failed reading " + path.string());
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : values) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      bits = (bits >> 24) | ((bits >> 8) & 0xff00u) | ((bits << 8) & 0xff0000u) | (bits << 24);
      v = std::bit_cast<float>(bits);
    }
  }
  return values;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw NumericalError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

fs::path payload_path_for(const fs::path& sidecar) {
  fs::path p = sidecar;
  p.replace_extension(".raw");
  return p;
}

template <typename T>
T field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw ValidationError(where.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where.string() + ": field '" + key + "': " + e.what());
  }
}

void check_kind(const json& j, const char* kind, const fs::path& where) {
  const int version = field<int>(j, "format_version", where);
  if (version != kFormatVersion)
    throw ValidationError(where.string() + ": unsupported format_version " + std::to_string(version));
  const auto k = field<std::string>(j, "kind", where);
  if (k != kind) throw ValidationError(where.string() + ": expected kind '" + kind + "', got '" + k + "'");
}

}  // namespace

json read_sidecar(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw ValidationError("cannot open " + sidecar.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(sidecar.string() + ": " + e.what());
  }
}

void write_volume(const Volume& vol, const fs::path& sidecar, const json& provenance) {
  if (vol.data.size() != vol.grid.size()) throw ValidationError("write_volume: payload size mismatch");
  const fs::path payload = payload_path_for(sidecar);
  const GridSpec& g = vol.grid;
  json j = {
      {"format_version", kFormatVersion},
      {"kind", "volume"},
      {"payload", payload.filename().string()},
      {"dtype", "float32-le"},
      {"layout", "x-fastest"},
      {"dims", {g.nx, g.ny, g.nz}},
      {"voxel_pitch", g.voxel_pitch},
      {"origin", {g.origin.x, g.origin.y, g.origin.z}},
      {"units", "mm^-1"},
      {"provenance", provenance},
  };
  write_payload(vol.data, payload);
  write_json(j, sidecar);
}

Volume read_volume(const fs::path& sidecar) {
  const json j = read_sidecar(sidecar);
  check_kind(j, "volume", sidecar);
  const auto dims = field<std::vector<int>>(j, "dims", sidecar);
  const auto origin = field<std::vector<double>>(j, "origin", sidecar);
  if (dims.size() != 3 || origin.size() != 3)
    throw ValidationError(sidecar.string() + ": dims and origin need three entries");
  GridSpec g;
  g.nx = dims[0];
  g.ny = dims[1];
  g.nz = dims[2];
  g.voxel_pitch = field<double>(j, "voxel_pitch", sidecar);
  g.origin = {origin[0], origin[1], origin[2]};
  g.validate();
  Volume vol;
  vol.grid = g;
  vol.data = read_payload(sidecar.parent_path() / field<std::string>(j, "payload", sidecar), g.size());
  return vol;
}

void write_stack(const ProjectionStack& stack, const fs::path& sidecar, const json& provenance) {
  if (stack.data.size() != stack.betas.size() * stack.view_size())
    throw ValidationError("write_stack: payload size mismatch");
  const fs::path payload = payload_path_for(sidecar);
  json j = {
      {"format_version", kFormatVersion},
      {"kind", "stack"},
      {"payload", payload.filename().string()},
      {"dtype", "float32-le"},
      {"layout", "col-fastest, then row, then view"},
      {"dims", {stack.det_cols, stack.det_rows, stack.n_views()}},
      {"pitch_u", stack.pitch_u},
      {"pitch_v", stack.pitch_v},
      {"betas", stack.betas},
      {"units", "line integral (mm^-1 * mm)"},
      {"provenance", provenance},
  };
  write_payload(stack.data, payload);
  write_json(j, sidecar);
}

ProjectionStack read_stack(const fs::path& sidecar) {
  const json j = read_sidecar(sidecar);
  check_kind(j, "stack", sidecar);
  const auto dims = field<std::vector<int>>(j, "dims", sidecar);
  if (dims.size() != 3 || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw ValidationError(sidecar.string() + ": dims must be three positive counts");
  ProjectionStack stack;
  stack.det_cols = dims[0];
  stack.det_rows = dims[1];
  stack.pitch_u = field<double>(j, "pitch_u", sidecar);
  stack.pitch_v = field<double>(j, "pitch_v", sidecar);
  stack.betas = field<std::vector<double>>(j, "betas", sidecar);
  if (int(stack.betas.size()) != dims[2])
    throw ValidationError(sidecar.string() + ": betas length does not match view count");
  stack.data = read_payload(sidecar.parent_path() / field<std::string>(j, "payload", sidecar),
                            std::size_t(dims[0]) * dims[1] * dims[2]);
  return stack;
}

void write_slice_pgm(const Volume& vol, char axis, int index, const fs::path& out) {
  const GridSpec& g = vol.grid;
  int width, height, limit;
  switch (axis) {
    case 'x': width = g.ny, height = g.nz, limit = g.nx; break;
    case 'y': width = g.nx, height = g.nz, limit = g.ny; break;
    case 'z': width = g.nx, height = g.ny, limit = g.nz; break;
    default: throw ValidationError(std::string("slice: axis must be x, y or z, got '") + axis + "'");
  }
  if (index < 0 || index >= limit) {
    std::ostringstream os;
    os << "slice: index " << index << " outside [0, " << limit << ") along " << axis;
    throw ValidationError(os.str());
  }
  std::vector<float> pixels(std::size_t(width) * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      float v;
      if (axis == 'x') v = vol.at(index, c, r);
      else if (axis == 'y') v = vol.at(c, index, r);
      else v = vol.at(c, r, index);
      pixels[std::size_t(r) * width + c] = v;
    }
  const auto [mn, mx] = std::minmax_element(pixels.begin(), pixels.end());
  const double lo = *mn, hi = *mx;
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

  std::ofstream img(out, std::ios::binary | std::ios::trunc);
  if (!img) throw NumericalError("cannot open " + out.string() + " for writing");
  img << "P5\n" << width << ' ' << height << "\n65535\n";
  for (float v : pixels) {
    const auto q = std::uint16_t(std::clamp(std::lround((v - lo) * scale), 0L, 65535L));
    const char be[2] = {char(q >> 8), char(q & 0xff)};
    img.write(be, 2);
  }
  if (!img) throw NumericalError("failed writing " + out.string());

  std::ofstream meta(fs::path(out.string() + ".txt"), std::ios::trunc);
  meta.precision(9);
  meta << "axis " << axis << "\nindex " << index << "\nwindow_min " << lo << "\nwindow_max " << hi
       << '\n';
}

}  // namespace sccl
