#include "frist/mri.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "frist/learning.hpp"
#include "frist/log.hpp"
#include "frist/patches.hpp"
#include "frist/sparse_transform.hpp"
#include "frist/synthetic.hpp"

namespace frist {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Buffers always come from fftw_malloc so the planner sees the same
// alignment on every call and picks the same codelets.
ComplexImage fft2(const ComplexImage& in, int sign) {
  const auto total = static_cast<std::size_t>(in.size());
  ComplexImage out(in.height, in.width);
  if (total == 0) return out;
  auto* buf_in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
  auto* buf_out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(in.height, in.width, buf_in, buf_out, sign, FFTW_ESTIMATE);
  }
  for (std::size_t p = 0; p < total; ++p) {
    buf_in[p][0] = in.pixels[p].real();
    buf_in[p][1] = in.pixels[p].imag();
  }
  fftw_execute(plan);
  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  for (std::size_t p = 0; p < total; ++p) out.pixels[p] = Complex(buf_out[p][0], buf_out[p][1]) * scale;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf_in);
  fftw_free(buf_out);
  return out;
}

void check_samples(const std::vector<long>& samples, long pixels) {
  for (std::size_t m = 0; m < samples.size(); ++m) {
    if (samples[m] < 0 || samples[m] >= pixels) throw ConfigError("sample index out of range");
    if (m > 0 && samples[m] <= samples[m - 1]) throw ConfigError("sample indices must be unique and ascending");
  }
}

// Distance of frequency index k (of `size`) from DC, in [0, 1].
double wrapped_distance(int k, int size) {
  if (size <= 1) return 0.0;
  return static_cast<double>(std::min(k, size - k)) / (size / 2.0);
}

// Weighted sampling without replacement of `count` items: keys log(u) / w,
// largest keys win. `forced` is always selected.
std::vector<long> weighted_pick(const std::vector<double>& weights, long count, long forced, Rng& rng) {
  const long total = static_cast<long>(weights.size());
  std::vector<std::pair<double, long>> keys;
  keys.reserve(total);
  for (long i = 0; i < total; ++i) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double key = i == forced ? std::numeric_limits<double>::infinity() : std::log(u) / weights[i];
    keys.emplace_back(key, i);
  }
  std::partial_sort(keys.begin(), keys.begin() + count, keys.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<long> picked;
  for (long i = 0; i < count; ++i) picked.push_back(keys[i].second);
  std::sort(picked.begin(), picked.end());
  return picked;
}

CMatrix complex_dct(int side) { return dct_matrix(side).cast<Complex>(); }

double mri_objective(const ComplexImage& y, const CMatrix& codes, const std::vector<int>& labels,
                     const CMatrix& w, const std::vector<FROperator>& ops, int side, const KSpaceData& data,
                     double mu) {
  const ComplexPatchSet ps = extract(y, side, 1, true);
  const CMatrix residual = w * rotate_columns(ps.data, ops, labels) - codes;
  const ComplexImage spectrum = dft2(y);
  double fidelity = 0.0;
  for (long m = 0; m < data.size(); ++m) fidelity += std::norm(spectrum.pixels[data.samples[m]] - data.z[m]);
  return residual.squaredNorm() + mu * fidelity;
}

}  // namespace

ComplexImage dft2(const ComplexImage& image) { return fft2(image, FFTW_FORWARD); }
ComplexImage idft2(const ComplexImage& spectrum) { return fft2(spectrum, FFTW_BACKWARD); }

KSpaceData sample_kspace(const ComplexImage& image, std::vector<long> samples) {
  KSpaceData d;
  d.height = image.height;
  d.width = image.width;
  check_samples(samples, d.pixels());
  d.samples = std::move(samples);
  const ComplexImage spectrum = dft2(image);
  d.z.resize(d.size());
  for (long m = 0; m < d.size(); ++m) d.z[m] = spectrum.pixels[d.samples[m]];
  return d;
}

ComplexImage to_full_kspace(const KSpaceData& data) {
  ComplexImage full(data.height, data.width);
  for (long m = 0; m < data.size(); ++m) full.pixels[data.samples[m]] = data.z[m];
  return full;
}

Mask sample_mask(const KSpaceData& data) {
  Mask mask(data.height, data.width, 0);
  for (long s : data.samples) mask.pixels[s] = 1;
  return mask;
}

KSpaceData from_full_kspace(const ComplexImage& full, const Mask& mask) {
  if (!full.same_shape(mask)) throw ConfigError("k-space and mask dimensions differ");
  KSpaceData d;
  d.height = full.height;
  d.width = full.width;
  for (std::size_t p = 0; p < mask.size(); ++p)
    if (mask.pixels[p]) d.samples.push_back(static_cast<long>(p));
  d.z.resize(d.size());
  for (long m = 0; m < d.size(); ++m) d.z[m] = full.pixels[d.samples[m]];
  return d;
}

ComplexImage zero_filled(const KSpaceData& data) { return idft2(to_full_kspace(data)); }

MaskScheme parse_mask_scheme(const std::string& name) {
  if (name == "cartesian") return MaskScheme::cartesian;
  if (name == "random2d") return MaskScheme::random2d;
  throw ConfigError("unknown sampling scheme: " + name);
}

std::vector<long> make_mask(int height, int width, MaskScheme scheme, double acceleration,
                            std::uint64_t seed) {
  if (!(acceleration >= 1.0)) throw ConfigError("acceleration must be >= 1");
  if (height < 1 || width < 1) throw ConfigError("empty k-space grid");
  Rng rng(seed);
  const long pixels = static_cast<long>(height) * width;
  if (scheme == MaskScheme::cartesian) {
    const auto rows = static_cast<long>(std::ceil(height / acceleration));
    std::vector<double> weights(height);
    for (int r = 0; r < height; ++r) weights[r] = std::pow(1.0 + wrapped_distance(r, height), -2.0);
    std::vector<long> out;
    for (long r : weighted_pick(weights, rows, 0, rng))
      for (int c = 0; c < width; ++c) out.push_back(r * width + c);
    return out;
  }
  const auto count = static_cast<long>(std::ceil(static_cast<double>(pixels) / acceleration));
  std::vector<double> weights(pixels);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double d = std::hypot(wrapped_distance(r, height), wrapped_distance(c, width)) / std::sqrt(2.0);
      weights[static_cast<std::size_t>(r) * width + c] = std::pow(1.0 + d, -2.0);
    }
  }
  return weighted_pick(weights, count, 0, rng);
}

double default_mu(const KSpaceData& data) { return 1e6 / static_cast<double>(data.pixels()); }

double default_energy_bound(const KSpaceData& data) {
  if (data.size() == 0) throw ConfigError("no k-space samples");
  return 1.05 * data.z.norm() * std::sqrt(static_cast<double>(data.pixels()) / static_cast<double>(data.size()));
}

std::vector<int> approximate_cluster(const CMatrix& w, const std::vector<FROperator>& ops,
                                     const CMatrix& patches, long s, Matrix* residuals, Exec exec) {
  if (ops.empty()) throw ConfigError("empty operator list");
  if (s < 0 || s > patches.size()) throw ConfigError("sparsity budget out of range");
  const long count = patches.cols();
  const auto num_ops = static_cast<long>(ops.size());
  Matrix se(num_ops, count);
  for_each_index(exec, num_ops, [&](long k) {
    const CMatrix b = w * rotate_columns(patches, ops, std::vector<int>(count, static_cast<int>(k)));
    se.row(k) = (b - global_threshold(b, s)).colwise().squaredNorm();
  });
  std::vector<int> labels(count, 0);
  for (long i = 0; i < count; ++i) {
    for (long k = 1; k < num_ops; ++k)
      if (se(k, i) < se(labels[i], i)) labels[i] = static_cast<int>(k);
  }
  if (residuals) *residuals = std::move(se);
  return labels;
}

CMatrix rotate_columns(const CMatrix& patches, const std::vector<FROperator>& ops,
                       const std::vector<int>& labels) {
  if (static_cast<long>(labels.size()) != patches.cols()) throw ConfigError("one label per patch required");
  CMatrix out(patches.rows(), patches.cols());
  for (Eigen::Index i = 0; i < patches.cols(); ++i) {
    ops[labels[i]].perm.apply(std::span<const Complex>(patches.col(i).data(), patches.rows()),
                              std::span<Complex>(out.col(i).data(), out.rows()));
  }
  return out;
}

CMatrix mri_sparse_code(const CMatrix& w, const std::vector<FROperator>& ops,
                        const std::vector<int>& labels, const CMatrix& patches, long s) {
  return global_threshold(CMatrix(w * rotate_columns(patches, ops, labels)), s);
}

CMatrix unitary_update(const CMatrix& rotated, const CMatrix& codes) {
  if (rotated.rows() != codes.rows() || rotated.cols() != codes.cols())
    throw ConfigError("patch and code matrices must have the same shape");
  const CMatrix cross = rotated * codes.adjoint();
  Eigen::JacobiSVD<CMatrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

ComplexImage back_project(const CMatrix& codes, const std::vector<int>& labels, const CMatrix& w,
                          const std::vector<FROperator>& ops, int patch_side, int height, int width) {
  const auto grid = anchor_grid(height, width, patch_side, 1, true);
  if (static_cast<long>(grid.size()) != codes.cols() || codes.cols() != static_cast<long>(labels.size()))
    throw ConfigError("codes do not match the wrap-around patch grid");
  const CMatrix rotated = w.adjoint() * codes;
  ComplexImage out(height, width);
  const int n = patch_side * patch_side;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto mapping = ops[labels[i]].perm.mapping();
    const auto [r0, c0] = grid[i];
    for (int j = 0; j < n; ++j) {
      const int r = (r0 + j / patch_side) % height;
      const int c = (c0 + j % patch_side) % width;
      out.at(r, c) += rotated(mapping[j], static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

ImageUpdateResult image_update(const CMatrix& codes, const std::vector<int>& labels, const CMatrix& w,
                               const std::vector<FROperator>& ops, int patch_side,
                               const KSpaceData& data, double mu, double energy_bound) {
  if (mu < 0) throw ConfigError("mu must be nonnegative");
  if (!(energy_bound > 0)) throw ConfigError("energy bound must be positive");
  const double n = patch_side * patch_side;
  ComplexImage rhs = dft2(back_project(codes, labels, w, ops, patch_side, data.height, data.width));
  std::vector<double> diag(rhs.size(), n);
  for (long m = 0; m < data.size(); ++m) {
    rhs.pixels[data.samples[m]] += mu * data.z[m];
    diag[data.samples[m]] += mu;
  }
  std::vector<double> energy(rhs.size());
  for (std::size_t p = 0; p < rhs.size(); ++p) energy[p] = std::norm(rhs.pixels[p]);

  // g(rho) = ||y(rho)||^2 - L^2 is convex and decreasing for rho >= 0
  const double bound2 = energy_bound * energy_bound;
  auto g = [&](double rho, double* slope) {
    double v = 0.0, dv = 0.0;
    for (std::size_t p = 0; p < energy.size(); ++p) {
      const double t = 1.0 / (diag[p] + rho);
      v += energy[p] * t * t;
      dv -= 2.0 * energy[p] * t * t * t;
    }
    if (slope) *slope = dv;
    return v - bound2;
  };

  ImageUpdateResult result;
  double rho = 0.0;
  if (g(0.0, nullptr) > 0.0) {
    result.constrained = true;
    // From rho = 0 Newton on a convex decreasing function approaches the
    // root from the left without overshooting.
    bool converged = false;
    for (int it = 1; it <= 100; ++it) {
      double slope = 0.0;
      const double value = g(rho, &slope);
      result.newton_iters = it;
      if (value <= 1e-14 * bound2 || slope == 0.0) {
        converged = value <= 1e-12 * bound2;
        break;
      }
      const double next = rho - value / slope;
      if (!(next > rho) || !std::isfinite(next)) break;
      if (next - rho <= 1e-15 * next) {
        rho = next;
        converged = true;
        break;
      }
      rho = next;
    }
    if (!converged) {
      log_warn("Newton iteration for the energy bound did not converge; using bisection");
      result.bisection = true;
      double lo = 0.0;
      double hi = std::sqrt(std::accumulate(energy.begin(), energy.end(), 0.0)) / energy_bound;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid, nullptr) > 0.0 ? lo : hi) = mid;
      }
      rho = hi;
    }
  }
  result.rho = rho;
  for (std::size_t p = 0; p < rhs.size(); ++p) rhs.pixels[p] /= diag[p] + rho;
  result.image = idft2(rhs);
  return result;
}

double unitarity_error(const CMatrix& w) {
  return (w.adjoint() * w - CMatrix::Identity(w.cols(), w.cols())).norm();
}

MriResult reconstruct(const KSpaceData& data, const MriConfig& config, Exec exec,
                      const MriObserver& observer) {
  if (!(config.s_fraction > 0 && config.s_fraction < 1)) throw ConfigError("s_fraction must lie in (0, 1)");
  if (config.iters < 0) throw ConfigError("iteration count must be >= 0");
  if (config.operators < 1) throw ConfigError("operator count must be >= 1");
  if (data.size() == 0) throw ConfigError("no k-space samples");
  check_samples(data.samples, data.pixels());
  const int side = config.patch_side;
  if (side < 1 || side > std::min(data.height, data.width)) throw ConfigError("patch side does not fit the image");
  const int n = side * side;
  const int num_angles = config.num_angles > 0 ? config.num_angles : default_num_angles(side);

  MriResult result;
  result.mu = config.mu > 0 ? config.mu : default_mu(data);
  result.energy_bound = config.energy_bound > 0 ? config.energy_bound : default_energy_bound(data);
  std::vector<FROperator> ops;
  if (config.identity_only) {
    ops.push_back(make_operator(0, false, num_angles, side));
  } else {
    ops = enumerate_candidates(side, num_angles);
  }
  const int target = std::min<int>(config.operators, static_cast<int>(ops.size()));
  CMatrix w = complex_dct(side);
  ComplexImage y = zero_filled(data);

  const long total = static_cast<long>(n) * data.pixels();
  const long s_full = std::max(1L, std::lround(config.s_fraction * static_cast<double>(total)));
  const int ramp = config.rampup_iters > 0 ? config.rampup_iters : (config.iters + 2) / 3;

  for (int t = 1; t <= config.iters; ++t) {
    const double frac = ramp > 1 ? std::min(1.0, static_cast<double>(t - 1) / (ramp - 1)) : 1.0;
    const long s = std::lround(0.25 * s_full + 0.75 * s_full * frac);

    const CMatrix patches = extract(y, side, 1, true).data;
    const auto labels = approximate_cluster(w, ops, patches, s, nullptr, exec);
    const CMatrix rotated = rotate_columns(patches, ops, labels);
    const CMatrix codes = global_threshold(CMatrix(w * rotated), s);
    w = unitary_update(rotated, codes);
    const auto upd = image_update(codes, labels, w, ops, side, data, result.mu, result.energy_bound);
    if (observer) observer(MriIterate{t, s, codes, labels, w, ops, upd});
    y = upd.image;

    MriIteration rec;
    rec.iteration = t;
    rec.sparsity = s;
    rec.unitarity_error = unitarity_error(w);
    rec.objective = mri_objective(y, codes, labels, w, ops, side, data, result.mu);
    rec.rho = upd.rho;
    double norm2 = 0.0;
    for (const auto& v : y.pixels) norm2 += std::norm(v);
    rec.image_norm = std::sqrt(norm2);
    rec.active_operators = static_cast<int>(ops.size());
    result.trace.push_back(rec);
    log_debug("mri iteration " + std::to_string(t) + " objective " + std::to_string(rec.objective));

    if (static_cast<int>(ops.size()) > target) {
      std::vector<FROperator> next;
      for (int k : eliminate_clusters(cluster_sizes(labels, ops.size()), target)) next.push_back(ops[k]);
      ops = std::move(next);
    }
  }
  result.image = std::move(y);
  result.transform = std::move(w);
  result.operators = std::move(ops);
  return result;
}

}  // namespace frist
