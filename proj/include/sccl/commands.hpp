#pragma once

#include <filesystem>
#include <optional>

#include "sccl/config.hpp"
#include "sccl/metrics.hpp"

namespace sccl {

/// Builds the phantom, forward projects it and writes the stack and the
/// ground-truth volume to the paths in the config's output block.
void cmd_simulate(const std::filesystem::path& config);

/// Runs the configured method on `stack` and writes the volume (plus any
/// requested z-slices as PGM). If the ground truth from the output block
/// exists on the same raster, also writes the metric report. Returns the
/// written sidecar path.
std::filesystem::path cmd_reconstruct(const std::filesystem::path& config,
                                      const std::filesystem::path& stack,
                                      const std::optional<std::filesystem::path>& out = {});

/// RMSE and MSSIM of `volume` against `reference`, written as JSON to `out`.
MetricReport cmd_evaluate(const std::filesystem::path& volume,
                          const std::filesystem::path& reference, const std::filesystem::path& out,
                          const std::optional<Roi>& roi = {});

void cmd_slice(const std::filesystem::path& volume, char axis, int index,
               const std::filesystem::path& out);

}  // namespace sccl
