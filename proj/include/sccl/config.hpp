#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sccl/fdk.hpp"
#include "sccl/geometry.hpp"
#include "sccl/phantom.hpp"
#include "sccl/projector.hpp"
#include "sccl/sirt.hpp"
#include "sccl/volume.hpp"

namespace sccl {

enum class PhantomType { kPcb, kCylinder, kPoint, kSlab };

struct PhantomConfig {
  PhantomType type = PhantomType::kPcb;
  GridSpec grid;
  PcbParams pcb;
  double radius = 0, height = 0;  // cylinder
  std::array<int, 3> index{};     // point
  double z0 = 0, z1 = 0;          // slab
  double value = 1.0;             // cylinder, point, slab
};

enum class ReconMethod { kFdk, kSirt };

struct ReconBlock {
  ReconMethod method = ReconMethod::kFdk;
  GridSpec grid;
  FdkOptions fdk;
  SirtOptions sirt;
};

struct OutputBlock {
  std::filesystem::path stack = "stack.json";
  std::filesystem::path ground_truth = "truth.json";
  std::filesystem::path volume = "recon.json";
  std::filesystem::path report = "report.json";
  std::vector<int> slice_indices;  // z indices exported as PGM next to the volume
};

struct ReconConfig {
  ScanGeometry geometry;
  PhantomConfig phantom;
  ForwardOptions projector;
  double noise_sigma = 0;
  std::uint64_t noise_seed = 0;
  ReconBlock recon;
  OutputBlock output;
  std::string hash;  // FNV-1a 64 of the canonical JSON text
};

/// Parses and validates every block; throws ValidationError naming the field.
ReconConfig parse_config(const nlohmann::json& j);
/// parse_config on a file; relative output paths resolve against its directory.
ReconConfig load_config(const std::filesystem::path& path);

std::string config_hash(const nlohmann::json& j);

Volume build_phantom(const PhantomConfig& cfg);

const char* method_name(ReconMethod m);

}  // namespace sccl
