#include "sccl/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "sccl/errors.hpp"

namespace sccl {

using nlohmann::json;

namespace {

// Typed access to one JSON object, reporting errors as "<block>.<key>: ...".
class Block {
 public:
  Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ValidationError(name_ + ": must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

  template <typename T>
  T get(const char* key) const {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(path(key) + ": required field is missing");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(path(key) + ": has the wrong type (" + j_.at(key).dump() + ")");
    }
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : (seen_.insert(key), fallback);
  }

  Block child(const char* key) const {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(path(key) + ": required block is missing");
    return Block(j_.at(key), path(key));
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError(path(key.c_str()) + ": unknown field");
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    std::ostringstream os;
    os << path(key) << ": " << what;
    if (j_.contains(key)) os << ", got " << j_.at(key).dump();
    throw ValidationError(os.str());
  }

 private:
  const json& j_;
  std::string name_;
  mutable std::set<std::string> seen_;
};

GridSpec parse_grid(const Block& b) {
  const int nx = b.get<int>("nx"), ny = b.get<int>("ny"), nz = b.get<int>("nz");
  const double pitch = b.get<double>("voxel_pitch");
  if (nx < 1) b.fail("nx", "must be >= 1");
  if (ny < 1) b.fail("ny", "must be >= 1");
  if (nz < 1) b.fail("nz", "must be >= 1");
  if (!(pitch > 0)) b.fail("voxel_pitch", "must be positive");
  const auto c = b.get<std::vector<double>>("center", {0.0, 0.0, 0.0});
  if (c.size() != 3) b.fail("center", "needs three coordinates");
  b.reject_unknown();
  return GridSpec::centered(nx, ny, nz, pitch, {c[0], c[1], c[2]});
}

ScanGeometry parse_geometry(const Block& b) {
  ScanGeometry g;
  const double tilt = b.get<double>("tilt_deg");
  if (!(tilt > 0 && tilt < 90)) b.fail("tilt_deg", "must lie strictly between 0 and 90");
  g.tilt_alpha = deg_to_rad(tilt);
  g.dist_so = b.get<double>("dist_so");
  g.dist_sd = b.get<double>("dist_sd");
  if (!(g.dist_so > 0)) b.fail("dist_so", "must be positive");
  if (!(g.dist_sd > g.dist_so)) b.fail("dist_sd", "must exceed dist_so");
  g.n_views = b.get<int>("n_views");
  if (g.n_views < 1) b.fail("n_views", "must be >= 1");
  g.det_rows = b.get<int>("det_rows");
  g.det_cols = b.get<int>("det_cols");
  if (g.det_rows < 2) b.fail("det_rows", "must be >= 2");
  if (g.det_cols < 2) b.fail("det_cols", "must be >= 2");
  g.pitch_u = b.get<double>("pitch_u");
  g.pitch_v = b.get<double>("pitch_v");
  if (!(g.pitch_u > 0)) b.fail("pitch_u", "must be positive");
  if (!(g.pitch_v > 0)) b.fail("pitch_v", "must be positive");
  b.reject_unknown();
  g.validate();
  return g;
}

PhantomConfig parse_phantom(const Block& b) {
  PhantomConfig p;
  const auto type = b.get<std::string>("type");
  p.grid = parse_grid(b.child("grid"));
  if (type == "pcb") {
    p.type = PhantomType::kPcb;
    PcbParams& q = p.pcb;
    q.layer_zs = b.get<std::vector<double>>("layer_zs", {});
    q.board_z0 = b.get<double>("board_z0", 0.0);
    q.board_z1 = b.get<double>("board_z1", 0.0);
    q.trace_attn = b.get<double>("trace_attn", q.trace_attn);
    q.substrate_attn = b.get<double>("substrate_attn", q.substrate_attn);
    q.seed = b.get<std::uint64_t>("seed", q.seed);
    q.layer_thickness_vox = b.get<int>("layer_thickness_vox", q.layer_thickness_vox);
    q.footprint_margin_vox = b.get<int>("footprint_margin_vox", q.footprint_margin_vox);
    q.traces_per_layer = b.get<int>("traces_per_layer", q.traces_per_layer);
    q.pads_per_layer = b.get<int>("pads_per_layer", q.pads_per_layer);
    q.vias_per_gap = b.get<int>("vias_per_gap", q.vias_per_gap);
    if (q.trace_attn < 0) b.fail("trace_attn", "must be >= 0");
    if (q.substrate_attn < 0) b.fail("substrate_attn", "must be >= 0");
  } else if (type == "cylinder") {
    p.type = PhantomType::kCylinder;
    p.radius = b.get<double>("radius");
    p.height = b.get<double>("height");
    p.value = b.get<double>("value");
    if (!(p.radius > 0)) b.fail("radius", "must be positive");
    if (!(p.height > 0)) b.fail("height", "must be positive");
  } else if (type == "point") {
    p.type = PhantomType::kPoint;
    const auto idx = b.get<std::vector<int>>("index");
    if (idx.size() != 3) b.fail("index", "needs three voxel indices");
    p.index = {idx[0], idx[1], idx[2]};
    p.value = b.get<double>("value");
  } else if (type == "slab") {
    p.type = PhantomType::kSlab;
    p.z0 = b.get<double>("z0");
    p.z1 = b.get<double>("z1");
    p.value = b.get<double>("value");
  } else {
    b.fail("type", "must be one of pcb, cylinder, point, slab");
  }
  b.reject_unknown();
  return p;
}

ReconBlock parse_recon(const Block& b, const GridSpec& fallback_grid) {
  ReconBlock r;
  const auto method = b.get<std::string>("method");
  if (method == "fdk")
    r.method = ReconMethod::kFdk;
  else if (method == "sirt")
    r.method = ReconMethod::kSirt;
  else
    b.fail("method", "must be fdk or sirt");
  r.grid = b.has("grid") ? parse_grid(b.child("grid")) : fallback_grid;
  if (b.has("fdk")) {
    const Block f = b.child("fdk");
    r.fdk.kernel_half_width = f.get<int>("kernel_half_width", 0);
    if (r.fdk.kernel_half_width < 0) f.fail("kernel_half_width", "must be >= 0 (0 = automatic)");
    const auto apod = f.get<std::string>("apodization", "none");
    if (apod == "none")
      r.fdk.apodization = Apodization::kNone;
    else if (apod == "cosine")
      r.fdk.apodization = Apodization::kCosine;
    else
      f.fail("apodization", "must be none or cosine");
    f.reject_unknown();
  }
  if (b.has("sirt")) {
    const Block s = b.child("sirt");
    r.sirt.n_iters = s.get<int>("n_iters", r.sirt.n_iters);
    r.sirt.relaxation = s.get<double>("relaxation", r.sirt.relaxation);
    r.sirt.nonnegativity = s.get<bool>("nonnegativity", r.sirt.nonnegativity);
    if (r.sirt.n_iters < 1) s.fail("n_iters", "must be >= 1");
    if (!(r.sirt.relaxation > 0 && r.sirt.relaxation <= 2)) s.fail("relaxation", "must lie in (0, 2]");
    s.reject_unknown();
  }
  b.reject_unknown();
  return r;
}

OutputBlock parse_output(const Block& b) {
  OutputBlock o;
  o.stack = b.get<std::string>("stack", o.stack.string());
  o.ground_truth = b.get<std::string>("ground_truth", o.ground_truth.string());
  o.volume = b.get<std::string>("volume", o.volume.string());
  o.report = b.get<std::string>("report", o.report.string());
  o.slice_indices = b.get<std::vector<int>>("slice_indices", {});
  b.reject_unknown();
  return o;
}

}  // namespace

std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ReconConfig parse_config(const json& j) {
  const Block root(j, "");
  ReconConfig cfg;
  cfg.geometry = parse_geometry(root.child("geometry"));
  cfg.phantom = parse_phantom(root.child("phantom"));
  cfg.phantom.grid.validate_against(cfg.geometry);
  if (root.has("projector")) {
    const Block p = root.child("projector");
    cfg.projector.supersampling = p.get<int>("supersampling", 1);
    if (cfg.projector.supersampling < 1) p.fail("supersampling", "must be >= 1");
    cfg.noise_sigma = p.get<double>("noise_sigma", 0.0);
    if (!(cfg.noise_sigma >= 0)) p.fail("noise_sigma", "must be >= 0");
    cfg.noise_seed = p.get<std::uint64_t>("noise_seed", 0);
    p.reject_unknown();
  }
  cfg.recon = parse_recon(root.child("recon"), cfg.phantom.grid);
  cfg.recon.grid.validate_against(cfg.geometry);
  if (root.has("output")) cfg.output = parse_output(root.child("output"));
  for (int z : cfg.output.slice_indices)
    if (z < 0 || z >= cfg.recon.grid.nz)
      throw ValidationError("output.slice_indices: index " + std::to_string(z) +
                            " outside the reconstruction grid");
  root.reject_unknown();
  cfg.hash = config_hash(j);
  return cfg;
}

ReconConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  ReconConfig cfg = parse_config(j);
  // Relative output paths are taken relative to the config file.
  const std::filesystem::path base = path.parent_path();
  for (std::filesystem::path* p : {&cfg.output.stack, &cfg.output.ground_truth, &cfg.output.volume,
                                   &cfg.output.report})
    if (p->is_relative()) *p = base / *p;
  return cfg;
}

Volume build_phantom(const PhantomConfig& cfg) {
  switch (cfg.type) {
    case PhantomType::kPcb: return make_pcb_phantom(cfg.grid, cfg.pcb);
    case PhantomType::kCylinder: return make_cylinder(cfg.grid, cfg.radius, cfg.height, cfg.value);
    case PhantomType::kPoint: return make_point(cfg.grid, cfg.index, cfg.value);
    case PhantomType::kSlab: return make_slab(cfg.grid, cfg.z0, cfg.z1, cfg.value);
  }
  throw ValidationError("phantom.type: unsupported");
}

const char* method_name(ReconMethod m) { return m == ReconMethod::kFdk ? "fdk" : "sirt"; }

}  // namespace sccl
