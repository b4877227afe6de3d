#pragma once

#include <filesystem>
#include <json.hpp>

#include "sccl/projector.hpp"
#include "sccl/volume.hpp"

namespace sccl {

inline constexpr int kFormatVersion = 1;

// On-disk layout: a JSON sidecar (the path callers pass around) plus a raw
// payload of little-endian float32 values next to it, named in the sidecar's
// "payload" field. Sidecar dimensions are authoritative.

void write_volume(const Volume& vol, const std::filesystem::path& sidecar,
                  const nlohmann::json& provenance = nlohmann::json::object());
Volume read_volume(const std::filesystem::path& sidecar);

void write_stack(const ProjectionStack& stack, const std::filesystem::path& sidecar,
                 const nlohmann::json& provenance = nlohmann::json::object());
ProjectionStack read_stack(const std::filesystem::path& sidecar);

nlohmann::json read_sidecar(const std::filesystem::path& sidecar);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples) of one slice,
/// linearly windowed min -> 0, max -> 65535. The window is written to
/// `<out>.txt`. Axis 'x' gives a ny-by-nz image, 'y' nx-by-nz, 'z' nx-by-ny.
void write_slice_pgm(const Volume& vol, char axis, int index, const std::filesystem::path& out);

}  // namespace sccl
