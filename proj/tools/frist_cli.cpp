// frist: command-line front end for transform learning, representation,
// segmentation, denoising, inpainting and MRI reconstruction.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frist/denoising.hpp"
#include "frist/image_io.hpp"
#include "frist/inpainting.hpp"
#include "frist/kernels.hpp"
#include "frist/learning.hpp"
#include "frist/log.hpp"
#include "frist/model_io.hpp"
#include "frist/mri.hpp"
#include "frist/patches.hpp"
#include "frist/synthetic.hpp"

namespace fs = std::filesystem;
using namespace frist;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
  std::string report = "text";
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void require_readable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return fs::path(dir);
}

// Metrics go to stdout (text) or are appended to <out-dir>/report.csv.
class Reporter {
 public:
  Reporter(const Globals& g, std::string command, std::string variant)
      : csv_(g.report == "csv"), path_(fs::path(g.out_dir) / "report.csv"), command_(std::move(command)),
        variant_(std::move(variant)) {}

  void add(const std::string& metric, double value) { rows_.emplace_back(metric, fmt(value)); }

  void flush() const {
    if (!csv_) {
      for (const auto& [metric, value] : rows_) std::cout << command_ << " " << metric << " " << value << "\n";
      return;
    }
    const bool fresh = !fs::exists(path_) || fs::file_size(path_) == 0;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot write " + path_.string());
    if (fresh) out << "command,variant,metric,value\n";
    for (const auto& [metric, value] : rows_) out << command_ << "," << variant_ << "," << metric << "," << value << "\n";
  }

 private:
  bool csv_;
  fs::path path_;
  std::string command_;
  std::string variant_;
  std::vector<std::pair<std::string, std::string>> rows_;
};

void write_learn_trace(const fs::path& path, const LearnTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,objective,sparsification_error,condition_number,active_operators,cluster_sizes\n";
  for (const auto& r : trace.iterations) {
    out << r.iteration << "," << fmt(r.objective) << "," << fmt(r.sparsification_error) << ","
        << fmt(r.condition_number) << "," << r.active_operators << ",";
    for (std::size_t k = 0; k < r.cluster_sizes.size(); ++k) out << (k ? ";" : "") << r.cluster_sizes[k];
    out << "\n";
  }
}

Image error_map(const Image& reference, const Image& estimate) {
  Image e(reference.height, reference.width);
  for (std::size_t p = 0; p < e.size(); ++p) e.pixels[p] = std::abs(reference.pixels[p] - estimate.pixels[p]);
  return e;
}

// Non-overlapping anchors of every image, sampled without replacement.
Matrix sample_training_patches(const std::vector<Image>& images, int side, long count, std::uint64_t seed) {
  struct Source {
    std::size_t image;
    int row, col;
  };
  std::vector<Source> pool;
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto& img = images[k];
    if (img.height < side || img.width < side) throw ConfigError("image smaller than the patch size");
    for (int r = 0; r + side <= img.height; r += side)
      for (int c = 0; c + side <= img.width; c += side) pool.push_back({k, r, c});
  }
  const auto take = static_cast<std::size_t>(std::min<long>(count, static_cast<long>(pool.size())));
  if (take < static_cast<std::size_t>(count))
    log_warn("only " + std::to_string(pool.size()) + " non-overlapping patches available");
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  Matrix y(side * side, static_cast<Eigen::Index>(take));
  for (std::size_t i = 0; i < take; ++i) {
    const auto& s = pool[i];
    for (int dr = 0; dr < side; ++dr)
      for (int dc = 0; dc < side; ++dc)
        y(dr * side + dc, static_cast<Eigen::Index>(i)) = images[s.image].at(s.row + dr, s.col + dc);
  }
  return y;
}

// ---------------------------------------------------------------- learn

struct LearnOptions {
  std::vector<std::string> images;
  std::string patches;
  int patch_size = 8;
  long num_patches = 10000;
  int k = 2;
  int q = 0;
  int sparsity = 10;
  double lambda0 = 3.1e-3;
  std::string init = "dct";
  int iters = 100;
  double tol = 1e-8;
  bool subtract_mean = false;
  bool sst = false;
  std::string out = "model.frst";
};

int cmd_learn(const Globals& g, const LearnOptions& o) {
  if (o.images.empty() == o.patches.empty()) throw ConfigError("give exactly one of --images or --patches");
  for (const auto& p : o.images) require_readable(p);
  if (!o.patches.empty()) require_readable(o.patches);
  LearnConfig c;
  c.patch_side = o.patch_size;
  c.target_operators = o.sst ? 1 : o.k;
  c.num_angles = o.q;
  c.sparsity = o.sparsity;
  c.lambda0 = o.lambda0;
  c.init = parse_init(o.init);
  c.max_iters = o.iters;
  c.tol_objective = o.tol;
  c.seed = g.seed;
  c.identity_only = o.sst;
  if (o.num_patches < 1) throw ConfigError("--num-patches must be >= 1");
  const fs::path dir = prepare_out_dir(g.out_dir);

  Matrix y;
  if (!o.patches.empty()) {
    const Image m = read_pfm(o.patches);
    y.resize(m.height, m.width);
    for (int r = 0; r < m.height; ++r)
      for (int col = 0; col < m.width; ++col) y(r, col) = m.at(r, col);
  } else {
    std::vector<Image> images;
    for (const auto& p : o.images) images.push_back(read_image(p));
    y = sample_training_patches(images, o.patch_size, o.num_patches, g.seed);
  }
  if (o.subtract_mean) y = subtract_patch_means(y).first;

  const auto result = learn(y, c);
  const fs::path model_path = fs::path(o.out).is_absolute() ? fs::path(o.out) : dir / o.out;
  save_model(model_path, result.model);
  write_learn_trace(dir / "learn_trace.csv", result.trace);

  Reporter rep(g, "learn", o.sst ? "sst" : "frist");
  const auto& last = result.trace.iterations.back();
  rep.add("iterations", static_cast<double>(result.trace.iterations.size()));
  rep.add("objective", last.objective);
  rep.add("sparsification_error", last.sparsification_error);
  rep.add("condition_number", last.condition_number);
  rep.add("active_operators", last.active_operators);
  rep.flush();
  return 0;
}

// ------------------------------------------------------------ represent

struct RepresentOptions {
  std::string model;
  std::string image;
  int sparsity = -1;
  int patch_size = 0;
  std::string baseline;
  int iters = 100;
};

int cmd_represent(const Globals& g, const RepresentOptions& o) {
  const bool dct = o.baseline == "dct";
  if (o.baseline.empty() && o.model.empty()) throw ConfigError("--model is required unless --baseline is given");
  if (!o.model.empty()) require_readable(o.model);
  require_readable(o.image);
  const fs::path dir = prepare_out_dir(g.out_dir);

  FristModel model;
  if (!o.model.empty()) {
    model = load_model(o.model);
  } else if (!dct) {
    // sst without a model: patch size from the flag, learning defaults otherwise
    model.patch_side = o.patch_size > 0 ? o.patch_size : 8;
    model.num_angles = default_num_angles(model.patch_side);
    model.sparsity = std::min(10, model.dim());
    model.lambda0 = LearnConfig{}.lambda0;
  }
  if (dct) {
    const int side = o.patch_size > 0 ? o.patch_size : (o.model.empty() ? 8 : model.patch_side);
    FristModel base;
    base.patch_side = side;
    base.num_angles = default_num_angles(side);
    base.parent = dct_matrix(side);
    base.operators = {make_operator(0, false, base.num_angles, side)};
    base.sparsity = o.model.empty() ? 10 : model.sparsity;
    model = std::move(base);
  }
  if (o.patch_size > 0 && o.patch_size != model.patch_side)
    throw ConfigError("--patch-size " + std::to_string(o.patch_size) + " does not match the model (" +
                      std::to_string(model.patch_side) + ")");
  const int s = o.sparsity >= 0 ? o.sparsity : model.sparsity;
  if (s > model.dim()) throw ConfigError("sparsity exceeds the patch dimension");

  const Image img = read_image(o.image);
  const int side = model.patch_side;
  if (img.height < side || img.width < side) throw ConfigError("image smaller than the model patch size");
  PatchSet ps = extract(img, side, side, false);
  if (o.baseline == "sst") {
    LearnConfig c;
    c.patch_side = side;
    c.identity_only = true;
    c.sparsity = s;
    c.lambda0 = model.lambda0;
    c.max_iters = o.iters;
    c.num_angles = model.num_angles;
    model = learn(ps.data, c).model;
  }
  const auto codes = sparse_code_and_cluster(ps.data, model.parent, model.operators, s);
  ps.data = reconstruct_patches(model, codes);
  const Image recon = aggregate(ps).image;
  write_pgm(dir / "represent.pgm", recon);

  Reporter rep(g, "represent", o.baseline.empty() ? "frist" : o.baseline);
  rep.add("sparsity", s);
  rep.add("psnr", psnr(img, recon));
  rep.flush();
  return 0;
}

// -------------------------------------------------------------- segment

struct SegmentConfig {
  int patch_size = 8;
  int sparsity = 10;
  double lambda0 = 3.1e-3;
  int num_angles = 0;
  int iters = 50;
  int stride = 1;
  std::string init = "dct";
};

SegmentConfig read_segment_config(const std::string& path) {
  SegmentConfig c;
  if (path.empty()) return c;
  require_readable(path);
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid model config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "patch_size") c.patch_size = value.get<int>();
      else if (key == "sparsity") c.sparsity = value.get<int>();
      else if (key == "lambda0") c.lambda0 = value.get<double>();
      else if (key == "num_angles") c.num_angles = value.get<int>();
      else if (key == "iters") c.iters = value.get<int>();
      else if (key == "stride") c.stride = value.get<int>();
      else if (key == "init") c.init = value.get<std::string>();
      else throw ConfigError("unknown model config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid model config value: ") + e.what());
  }
  return c;
}

int cmd_segment(const Globals& g, const std::string& config_path, const std::string& image_path, int clusters) {
  if (clusters < 2) throw ConfigError("--clusters must be >= 2");
  require_readable(image_path);
  const SegmentConfig sc = read_segment_config(config_path);
  const fs::path dir = prepare_out_dir(g.out_dir);
  const Image img = read_image(image_path);
  const PatchSet ps = extract(img, sc.patch_size, sc.stride, false);
  const Matrix y = subtract_patch_means(ps.data).first;

  std::vector<int> labels(ps.count(), 0);
  int active = 1;
  if (y.squaredNorm() > 0.0) {
    LearnConfig c;
    c.patch_side = sc.patch_size;
    c.target_operators = clusters;
    c.num_angles = sc.num_angles;
    c.sparsity = sc.sparsity;
    c.lambda0 = sc.lambda0;
    c.max_iters = sc.iters;
    c.init = parse_init(sc.init);
    c.seed = g.seed;
    const auto result = learn(y, c);
    labels = result.codes.labels;
    active = static_cast<int>(result.model.operators.size());
  }

  // majority vote over the patches covering each pixel, ties to the lowest label
  const int side = sc.patch_size;
  std::vector<int> votes(img.size() * clusters, 0);
  for (long i = 0; i < ps.count(); ++i) {
    const auto [r0, c0] = ps.positions[i];
    for (int dr = 0; dr < side; ++dr)
      for (int dc = 0; dc < side; ++dc)
        ++votes[(static_cast<std::size_t>(r0 + dr) * img.width + c0 + dc) * clusters + labels[i]];
  }
  Image map(img.height, img.width);
  std::vector<long> counts(clusters, 0);
  for (std::size_t p = 0; p < img.size(); ++p) {
    const int* v = &votes[p * clusters];
    const int best = static_cast<int>(std::max_element(v, v + clusters) - v);
    ++counts[best];
    map.pixels[p] = std::round(255.0 * best / (clusters - 1));
  }
  write_pgm(dir / "segment.pgm", map);

  Reporter rep(g, "segment", "frist");
  rep.add("active_operators", active);
  for (int k = 0; k < clusters; ++k) rep.add("pixels_label_" + std::to_string(k), static_cast<double>(counts[k]));
  rep.flush();
  return 0;
}

// -------------------------------------------------------------- denoise

struct DenoiseOptions {
  std::string image;
  std::string reference;
  bool add_noise = false;
  std::string baseline;
  DenoiseConfig config;
};

int cmd_denoise(const Globals& g, DenoiseOptions o) {
  require_readable(o.image);
  if (!o.reference.empty()) require_readable(o.reference);
  if (!o.baseline.empty()) o.config.variant = parse_variant(o.baseline);
  const fs::path dir = prepare_out_dir(g.out_dir);

  Image input = read_image(o.image);
  std::optional<Image> reference;
  if (!o.reference.empty()) reference = read_image(o.reference);
  if (o.add_noise) {
    if (!reference) reference = input;
    input = add_gaussian_noise(input, o.config.sigma, g.seed);
    write_pgm(dir / "noisy.pgm", input);
  }
  if (reference && !reference->same_shape(input)) throw ConfigError("reference and input dimensions differ");

  std::vector<DenoisePassInfo> info;
  const Image out = denoise(input, o.config, &info);
  write_pgm(dir / "denoised.pgm", out);

  Reporter rep(g, "denoise", to_string(o.config.variant));
  rep.add("sigma", o.config.sigma);
  rep.add("mean_sparsity", info.back().mean_sparsity);
  rep.add("active_operators", info.back().active_operators);
  if (reference) {
    write_pgm(dir / "error.pgm", error_map(*reference, out));
    rep.add("psnr_input", psnr(*reference, input));
    rep.add("psnr", psnr(*reference, out));
  }
  rep.flush();
  return 0;
}

// -------------------------------------------------------------- inpaint

struct InpaintOptions {
  std::string image;
  std::string mask;
  std::string reference;
  double available_fraction = -1.0;
  std::string baseline;
  InpaintConfig config;
};

int cmd_inpaint(const Globals& g, InpaintOptions o) {
  require_readable(o.image);
  if (!o.mask.empty()) require_readable(o.mask);
  if (!o.reference.empty()) require_readable(o.reference);
  if (o.mask.empty() == (o.available_fraction < 0))
    throw ConfigError("give exactly one of --mask or --available-fraction");
  if (!o.baseline.empty()) o.config.variant = parse_variant(o.baseline);
  const fs::path dir = prepare_out_dir(g.out_dir);

  const Image input = read_image(o.image);
  std::optional<Image> reference;
  if (!o.reference.empty()) reference = read_image(o.reference);
  Mask mask;
  Image corrupted;
  if (!o.mask.empty()) {
    mask = read_mask(o.mask);
    if (!mask.same_shape(input)) throw ConfigError("mask and image dimensions differ");
    corrupted = apply_mask(input, mask);
  } else {
    if (!reference) reference = input;
    mask = random_mask(input.height, input.width, o.available_fraction, g.seed);
    const Image measured = o.config.sigma > 0 ? add_gaussian_noise(input, o.config.sigma, g.seed + 1) : input;
    corrupted = apply_mask(measured, mask);
    write_mask(dir / "mask.pgm", mask);
    write_pgm(dir / "corrupted.pgm", corrupted);
  }
  if (reference && !reference->same_shape(input)) throw ConfigError("reference and input dimensions differ");

  InpaintInfo info;
  const Image out = inpaint(corrupted, mask, o.config, &info);
  write_pgm(dir / "inpainted.pgm", out);

  Reporter rep(g, "inpaint", to_string(o.config.variant));
  rep.add("tau", info.tau);
  rep.add("ill_posed_patches", static_cast<double>(info.ill_posed_patches));
  rep.add("active_operators", info.active_operators);
  if (reference) {
    write_pgm(dir / "error.pgm", error_map(*reference, out));
    rep.add("psnr_corrupted", psnr(*reference, corrupted));
    rep.add("psnr", psnr(*reference, out));
  }
  rep.flush();
  return 0;
}

// ------------------------------------------------------------------ mri

struct MriOptions {
  std::string image;
  std::string kspace;
  std::string mask;
  std::string reference;
  std::string scheme = "random2d";
  double accel = 5.0;
  MriConfig config;
};

ComplexImage read_complex(const std::string& path) {
  if (fs::path(path).extension() == ".cpx") return read_cpx(path);
  return to_complex(read_image(path));
}

double peak_of(const Image& img) {
  double p = 0.0;
  for (double v : img.pixels) p = std::max(p, v);
  return p;
}

Image scaled(const Image& img, double peak) {
  Image out = img;
  const double f = peak > 0 ? 255.0 / peak : 1.0;
  for (auto& v : out.pixels) v *= f;
  return out;
}

void write_mri_trace(const fs::path& path, const std::vector<MriIteration>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,sparsity,objective,unitarity_error,rho,image_norm,active_operators\n";
  for (const auto& t : trace)
    out << t.iteration << "," << t.sparsity << "," << fmt(t.objective) << "," << fmt(t.unitarity_error) << ","
        << fmt(t.rho) << "," << fmt(t.image_norm) << "," << t.active_operators << "\n";
}

int cmd_mri(const Globals& g, const MriOptions& o) {
  if (o.image.empty() == o.kspace.empty()) throw ConfigError("give exactly one of --image or --kspace");
  if (!o.kspace.empty() && o.mask.empty()) throw ConfigError("--kspace requires --mask");
  for (const auto* p : {&o.image, &o.kspace, &o.mask, &o.reference})
    if (!p->empty()) require_readable(*p);
  const MaskScheme scheme = parse_mask_scheme(o.scheme);
  const fs::path dir = prepare_out_dir(g.out_dir);

  std::optional<ComplexImage> reference;
  if (!o.reference.empty()) reference = read_complex(o.reference);
  KSpaceData data;
  if (!o.image.empty()) {
    const ComplexImage truth = read_complex(o.image);
    if (!reference) reference = truth;
    data = sample_kspace(truth, make_mask(truth.height, truth.width, scheme, o.accel, g.seed));
  } else {
    data = from_full_kspace(read_cpx(o.kspace), read_mask(o.mask));
  }
  if (reference && (reference->height != data.height || reference->width != data.width))
    throw ConfigError("reference and k-space dimensions differ");

  const ComplexImage zf = zero_filled(data);
  const MriResult result = reconstruct(data, o.config);
  write_cpx(dir / "recon.cpx", result.image);
  write_mask(dir / "mask.pgm", sample_mask(data));
  write_mri_trace(dir / "mri_trace.csv", result.trace);

  const Image mag = magnitude(result.image);
  const Image zf_mag = magnitude(zf);
  const double peak = reference ? peak_of(magnitude(*reference)) : peak_of(mag);
  write_pgm(dir / "recon.pgm", scaled(mag, peak));
  write_pgm(dir / "zero_filled.pgm", scaled(zf_mag, peak));

  Reporter rep(g, "mri", o.config.identity_only ? "sst" : "frist");
  rep.add("samples", static_cast<double>(data.size()));
  rep.add("mu", result.mu);
  rep.add("energy_bound", result.energy_bound);
  double worst = 0.0;
  for (const auto& t : result.trace) worst = std::max(worst, t.unitarity_error);
  rep.add("max_unitarity_error", worst);
  if (reference) {
    const Image ref_mag = magnitude(*reference);
    write_pgm(dir / "error.pgm", scaled(error_map(ref_mag, mag), peak));
    rep.add("psnr_zero_filled", psnr(ref_mag, zf_mag, peak));
    rep.add("psnr", psnr(ref_mag, mag, peak));
  }
  rep.flush();
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Globals& g, const std::string& kind, int height, int width, const std::string& out) {
  const fs::path dir = prepare_out_dir(g.out_dir);
  const fs::path path = fs::path(out).is_absolute() ? fs::path(out) : dir / out;
  if (kind == "phantom") {
    if (path.extension() != ".cpx") throw ConfigError("phantom output must be a .cpx file");
    write_cpx(path, mri_phantom(height, width));
    return 0;
  }
  Image img;
  if (kind == "stripes") img = piecewise_stripes(height, width);
  else if (kind == "gradient") img = smooth_gradient(height, width);
  else if (kind == "texture") img = directional_texture(height, width, g.seed);
  else throw ConfigError("unknown synthetic image kind '" + kind + "'");
  if (path.extension() == ".pfm") write_pfm(path, img);
  else write_pgm(path, img);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flipping and rotation invariant sparsifying transforms"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for all artifacts")->capture_default_str();
  app.add_option("--report", g.report, "Metric output")->check(CLI::IsMember({"csv", "text"}))->capture_default_str();

  LearnOptions lo;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a parent transform and operators from image patches");
  learn_cmd->add_option("--images", lo.images, "Training images (PGM/PFM)");
  learn_cmd->add_option("--patches", lo.patches, "PFM matrix with one patch per column");
  learn_cmd->add_option("--patch-size", lo.patch_size)->capture_default_str();
  learn_cmd->add_option("--num-patches", lo.num_patches)->capture_default_str();
  learn_cmd->add_option("--K", lo.k, "Operators to keep")->capture_default_str();
  learn_cmd->add_option("--Q", lo.q, "Rotation angles (0 = 4 x patch size)")->capture_default_str();
  learn_cmd->add_option("--sparsity", lo.sparsity)->capture_default_str();
  learn_cmd->add_option("--lambda0", lo.lambda0)->capture_default_str();
  learn_cmd->add_option("--init", lo.init)->check(CLI::IsMember({"dct", "klt", "identity", "random"}))->capture_default_str();
  learn_cmd->add_option("--iters", lo.iters)->capture_default_str();
  learn_cmd->add_option("--tol", lo.tol, "Early-stop tolerance (<= 0 disables)")->capture_default_str();
  learn_cmd->add_flag("--subtract-mean", lo.subtract_mean, "Remove each patch mean before learning");
  learn_cmd->add_flag("--sst", lo.sst, "Single square transform (identity operator only)");
  learn_cmd->add_option("--out", lo.out, "Model file (relative to --out-dir)")->capture_default_str();

  RepresentOptions ro;
  auto* represent_cmd = app.add_subcommand("represent", "Sparse-code non-overlapping patches and report PSNR");
  represent_cmd->add_option("--model", ro.model);
  represent_cmd->add_option("--image", ro.image)->required();
  represent_cmd->add_option("--sparsity", ro.sparsity, "Nonzeros per patch (default: the model's)");
  represent_cmd->add_option("--patch-size", ro.patch_size);
  represent_cmd->add_option("--baseline", ro.baseline)->check(CLI::IsMember({"dct", "sst"}));
  represent_cmd->add_option("--iters", ro.iters, "Learning iterations for --baseline sst")->capture_default_str();

  std::string seg_config, seg_image;
  int seg_clusters = 0;
  auto* segment_cmd = app.add_subcommand("segment", "Per-pixel cluster map by majority vote");
  segment_cmd->add_option("--model-config", seg_config, "JSON learning settings");
  segment_cmd->add_option("--image", seg_image)->required();
  segment_cmd->add_option("--clusters", seg_clusters)->required();

  DenoiseOptions dn;
  auto* denoise_cmd = app.add_subcommand("denoise", "Denoise an image");
  denoise_cmd->add_option("--image", dn.image)->required();
  denoise_cmd->add_option("--reference", dn.reference, "Clean image for PSNR");
  denoise_cmd->add_flag("--add-noise", dn.add_noise, "Add Gaussian noise of --sigma to the input first");
  denoise_cmd->add_option("--sigma", dn.config.sigma)->required();
  denoise_cmd->add_option("--C", dn.config.error_constant)->capture_default_str();
  denoise_cmd->add_option("--K", dn.config.operators)->capture_default_str();
  denoise_cmd->add_option("--Q", dn.config.num_angles)->capture_default_str();
  denoise_cmd->add_option("--patch-size", dn.config.patch_side)->capture_default_str();
  denoise_cmd->add_option("--tau0", dn.config.tau0)->capture_default_str();
  denoise_cmd->add_option("--lambda0", dn.config.lambda0)->capture_default_str();
  denoise_cmd->add_option("--iters", dn.config.iters_per_pass)->capture_default_str();
  denoise_cmd->add_option("--passes", dn.config.passes)->capture_default_str();
  denoise_cmd->add_option("--sigma-decay", dn.config.sigma_decay)->capture_default_str();
  denoise_cmd->add_option("--stride", dn.config.stride)->capture_default_str();
  denoise_cmd->add_option("--baseline", dn.baseline)->check(CLI::IsMember({"dct", "sst"}));

  InpaintOptions ip;
  auto* inpaint_cmd = app.add_subcommand("inpaint", "Fill in missing pixels");
  inpaint_cmd->add_option("--image", ip.image)->required();
  inpaint_cmd->add_option("--mask", ip.mask, "Availability mask PGM (nonzero = measured)");
  inpaint_cmd->add_option("--available-fraction", ip.available_fraction, "Draw a random mask");
  inpaint_cmd->add_option("--reference", ip.reference);
  inpaint_cmd->add_option("--sigma", ip.config.sigma)->capture_default_str();
  inpaint_cmd->add_option("--tau-base", ip.config.tau_base)->capture_default_str();
  inpaint_cmd->add_option("--gamma0", ip.config.gamma0)->capture_default_str();
  inpaint_cmd->add_option("--K", ip.config.operators)->capture_default_str();
  inpaint_cmd->add_option("--Q", ip.config.num_angles)->capture_default_str();
  inpaint_cmd->add_option("--patch-size", ip.config.patch_side)->capture_default_str();
  inpaint_cmd->add_option("--lambda0", ip.config.lambda0)->capture_default_str();
  inpaint_cmd->add_option("--iters", ip.config.iters)->capture_default_str();
  inpaint_cmd->add_option("--passes", ip.config.passes)->capture_default_str();
  inpaint_cmd->add_option("--stride", ip.config.stride)->capture_default_str();
  inpaint_cmd->add_option("--baseline", ip.baseline)->check(CLI::IsMember({"dct", "sst"}));

  MriOptions mo;
  auto* mri_cmd = app.add_subcommand("mri", "Blind compressed-sensing MRI reconstruction");
  mri_cmd->add_option("--image", mo.image, "Ground-truth image (.cpx, PGM or PFM) to undersample");
  mri_cmd->add_option("--kspace", mo.kspace, "Full-grid k-space .cpx (unsampled entries zero)");
  mri_cmd->add_option("--mask", mo.mask, "Sampling mask PGM for --kspace");
  mri_cmd->add_option("--reference", mo.reference);
  mri_cmd->add_option("--scheme", mo.scheme)->check(CLI::IsMember({"cartesian", "random2d"}))->capture_default_str();
  mri_cmd->add_option("--accel", mo.accel)->capture_default_str();
  mri_cmd->add_option("--K", mo.config.operators)->capture_default_str();
  mri_cmd->add_option("--Q", mo.config.num_angles)->capture_default_str();
  mri_cmd->add_option("--patch-size", mo.config.patch_side)->capture_default_str();
  mri_cmd->add_option("--s-fraction", mo.config.s_fraction)->capture_default_str();
  mri_cmd->add_option("--mu", mo.config.mu, "Fidelity weight (0 = default)")->capture_default_str();
  mri_cmd->add_option("--L", mo.config.energy_bound, "Energy bound (0 = default)")->capture_default_str();
  mri_cmd->add_option("--iters", mo.config.iters)->capture_default_str();
  mri_cmd->add_option("--rampup", mo.config.rampup_iters, "Sparsity ramp length (0 = iters / 3)")->capture_default_str();
  mri_cmd->add_flag("--sst", mo.config.identity_only, "Single unitary transform");

  std::string synth_kind, synth_out;
  int synth_h = 64, synth_w = 64;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic test image");
  synth_cmd->add_option("--kind", synth_kind)->required()->check(CLI::IsMember({"stripes", "gradient", "texture", "phantom"}));
  synth_cmd->add_option("--height", synth_h)->capture_default_str();
  synth_cmd->add_option("--width", synth_w)->capture_default_str();
  synth_cmd->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (g.threads < 0) throw ConfigError("--threads must be >= 0");
    set_num_threads(g.threads);
    if (*learn_cmd) return cmd_learn(g, lo);
    if (*represent_cmd) return cmd_represent(g, ro);
    if (*segment_cmd) return cmd_segment(g, seg_config, seg_image, seg_clusters);
    if (*denoise_cmd) return cmd_denoise(g, dn);
    if (*inpaint_cmd) return cmd_inpaint(g, ip);
    if (*mri_cmd) return cmd_mri(g, mo);
    if (*synth_cmd) return cmd_synth(g, synth_kind, synth_h, synth_w, synth_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
