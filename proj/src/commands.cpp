#include "sccl/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "sccl/errors.hpp"
#include "sccl/io.hpp"

namespace sccl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_report(const MetricReport& r, const fs::path& volume, const fs::path& reference,
                  const fs::path& out) {
  const json j = {{"rmse", r.rmse},
                  {"mssim", r.mssim},
                  {"roi", {r.roi.x0, r.roi.x1, r.roi.y0, r.roi.y1, r.roi.z0, r.roi.z1}},
                  {"volume", volume.string()},
                  {"reference", reference.string()}};
  ensure_parent(out);
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw NumericalError("cannot open " + out.string() + " for writing");
  f << j.dump(2) << '\n';
}

}  // namespace

void cmd_simulate(const fs::path& config) {
  const ReconConfig cfg = load_config(config);
  const Volume truth = build_phantom(cfg.phantom);
  const std::vector<double> betas = uniform_betas(cfg.geometry.n_views);
  ProjectionStack stack = forward_project(truth, cfg.geometry, betas, cfg.projector);
  if (cfg.noise_sigma > 0) stack = add_noise(stack, cfg.noise_sigma, cfg.noise_seed);

  const json provenance = {{"config_hash", cfg.hash}, {"config_path", config.string()}};
  ensure_parent(cfg.output.stack);
  ensure_parent(cfg.output.ground_truth);
  write_stack(stack, cfg.output.stack, provenance);
  write_volume(truth, cfg.output.ground_truth, provenance);
}

fs::path cmd_reconstruct(const fs::path& config, const fs::path& stack_path,
                         const std::optional<fs::path>& out) {
  const ReconConfig cfg = load_config(config);
  const ProjectionStack stack = read_stack(stack_path);
  try {
    stack.validate_against(cfg.geometry);
  } catch (const ValidationError& e) {
    throw ValidationError(stack_path.string() + " does not match the config geometry: " + e.what());
  }
  if (stack.n_views() != cfg.geometry.n_views)
    throw ValidationError(stack_path.string() + ": holds " + std::to_string(stack.n_views()) +
                          " views, config geometry.n_views is " + std::to_string(cfg.geometry.n_views));

  const auto start = std::chrono::steady_clock::now();
  Volume vol;
  json extra = json::object();
  if (cfg.recon.method == ReconMethod::kFdk) {
    vol = reconstruct_fdk(stack, cfg.geometry, cfg.recon.grid, cfg.recon.fdk);
  } else {
    SirtReconstruction run = sirt_reconstruct(stack, cfg.geometry, cfg.recon.grid, cfg.recon.sirt);
    vol = std::move(run.volume);
    extra["residual_norms"] = run.residual_norms;
    extra["final_residual"] = run.final_residual;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json provenance = {{"config_hash", cfg.hash},
                     {"method", method_name(cfg.recon.method)},
                     {"wall_time_s", wall},
                     {"stack", stack_path.string()}};
  provenance.update(extra);
  const fs::path target = out.value_or(cfg.output.volume);
  ensure_parent(target);
  write_volume(vol, target, provenance);
  for (int z : cfg.output.slice_indices) {
    fs::path img = target;
    img.replace_extension("");
    img += "_z" + std::to_string(z) + ".pgm";
    write_slice_pgm(vol, 'z', z, img);
  }
  // Score against the simulated truth when it is on hand and on the same raster.
  if (fs::exists(cfg.output.ground_truth)) {
    const Volume truth = read_volume(cfg.output.ground_truth);
    if (truth.grid.same_raster(vol.grid) && truth.grid.origin == vol.grid.origin)
      write_report(evaluate(vol, truth, Roi::inset(truth.grid, 5)), target, cfg.output.ground_truth,
                   cfg.output.report);
  }
  return target;
}

MetricReport cmd_evaluate(const fs::path& volume, const fs::path& reference, const fs::path& out,
                          const std::optional<Roi>& roi) {
  const Volume a = read_volume(volume);
  const Volume b = read_volume(reference);
  const MetricReport r = evaluate(a, b, roi.value_or(Roi::inset(b.grid, 5)));
  write_report(r, volume, reference, out);
  return r;
}

void cmd_slice(const fs::path& volume, char axis, int index, const fs::path& out) {
  const Volume vol = read_volume(volume);
  ensure_parent(out);
  write_slice_pgm(vol, axis, index, out);
}

}  // namespace sccl
