#include "morphkit/freq_noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "morphkit/error.hpp"
#include "morphkit/random.hpp"

namespace morphkit {
namespace {

// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double axis_frequency(int index, int n, SpectralTransform transform) {
  if (n <= 1) return 0.0;
  if (transform == SpectralTransform::dct) return double(index) / double(n - 1);
  int half = n / 2;
  int signed_index = index <= half ? index : index - n;
  return std::abs(double(signed_index)) / double(half);
}

std::vector<double> fft2(const double* plane, int h, int w, int sign, const double* imag) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  fftw_complex* in = fftw_alloc_complex(n);
  fftw_complex* out = fftw_alloc_complex(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(h, w, in, out, sign, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = plane[imag ? 2 * i : i];
    in[i][1] = imag ? plane[2 * i + 1] : 0.0;
  }
  fftw_execute(plan);
  std::vector<double> result(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    result[2 * i] = out[i][0];
    result[2 * i + 1] = out[i][1];
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return result;
}

std::vector<double> dct2(const double* plane, int h, int w, bool inverse) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  double* in = fftw_alloc_real(n);
  double* out = fftw_alloc_real(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    auto kind = inverse ? FFTW_REDFT01 : FFTW_REDFT10;
    plan = fftw_plan_r2r_2d(h, w, in, out, kind, kind, FFTW_ESTIMATE);
  }
  std::copy(plane, plane + n, in);
  fftw_execute(plan);
  std::vector<double> result(out, out + n);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return result;
}

}  // namespace

std::size_t SpectralMask::count_zeros() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{0}));
}

double normalized_radius(int y, int x, int height, int width, SpectralTransform transform) {
  double fy = axis_frequency(y, height, transform);
  double fx = axis_frequency(x, width, transform);
  return std::sqrt((fy * fy + fx * fx) / 2.0);
}

SpectralMask retain_mask(int height, int width, double cutoff, SpectralTransform transform,
                         NoiseBand band, SpectralMask::Layout layout) {
  if (!(cutoff > 0.0 && cutoff <= 1.0))
    throw Error(ErrorCode::out_of_range, "spectral cutoff must lie in (0, 1]");
  if (height < 1 || width < 1) throw Error(ErrorCode::invalid_argument, "empty spectral grid");
  SpectralMask m;
  m.height = height;
  m.width = width;
  m.cutoff = cutoff;
  m.transform = transform;
  m.layout = SpectralMask::Layout::natural;
  m.mask.resize(static_cast<std::size_t>(height) * width);
  const double threshold = 1.0 - cutoff;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool in_high_band = normalized_radius(y, x, height, width, transform) >= threshold;
      bool noised = band == NoiseBand::high ? in_high_band : !in_high_band;
      m.mask[static_cast<std::size_t>(y) * width + x] = noised ? 0 : 1;
    }
  }
  if (layout == SpectralMask::Layout::centered) return to_centered(m);
  return m;
}

SpectralMask to_centered(const SpectralMask& natural) {
  if (natural.layout != SpectralMask::Layout::natural)
    throw Error(ErrorCode::invalid_argument, "mask is already centered");
  if (natural.transform != SpectralTransform::fft) {
    SpectralMask copy = natural;  // DCT spectra have no negative frequencies to shift
    copy.layout = SpectralMask::Layout::centered;
    return copy;
  }
  SpectralMask c = natural;
  c.layout = SpectralMask::Layout::centered;
  const int h = natural.height, w = natural.width;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      c.mask[static_cast<std::size_t>((y + h / 2) % h) * w + (x + w / 2) % w] = natural.at(y, x);
  return c;
}

Tensor gaussian_field(const Shape& shape, std::uint64_t seed) {
  Tensor g(shape);
  GaussianSampler sampler(seed);
  for (auto& v : g.values()) v = static_cast<float>(sampler.next());
  return g;
}

std::vector<double> forward_spectrum(const double* plane, int height, int width,
                                     SpectralTransform transform) {
  if (transform == SpectralTransform::fft) return fft2(plane, height, width, FFTW_FORWARD, nullptr);
  std::vector<double> real = dct2(plane, height, width, false);
  std::vector<double> out(real.size() * 2, 0.0);
  for (std::size_t i = 0; i < real.size(); ++i) out[2 * i] = real[i];
  return out;
}

std::vector<double> inverse_spectrum(const std::vector<double>& spectrum, int height, int width,
                                     SpectralTransform transform, double* max_imag_residue) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (spectrum.size() != 2 * n) throw Error(ErrorCode::shape_mismatch, "spectrum size mismatch");
  std::vector<double> plane(n);
  double residue = 0.0;
  if (transform == SpectralTransform::fft) {
    std::vector<double> full = fft2(spectrum.data(), height, width, FFTW_BACKWARD, spectrum.data());
    const double scale = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
      plane[i] = full[2 * i] * scale;
      residue = std::max(residue, std::abs(full[2 * i + 1] * scale));
    }
  } else {
    std::vector<double> real(n);
    for (std::size_t i = 0; i < n; ++i) real[i] = spectrum[2 * i];
    plane = dct2(real.data(), height, width, true);
    const double scale = 1.0 / (4.0 * double(n));
    for (auto& v : plane) v *= scale;
  }
  if (max_imag_residue) *max_imag_residue = residue;
  return plane;
}

Tensor inject_noise(const Tensor& z, const SpectralMask& mask, std::uint64_t seed) {
  if (z.rank() != 3) throw Error(ErrorCode::shape_mismatch, "noise injection expects (C, H, W)");
  if (mask.layout != SpectralMask::Layout::natural)
    throw Error(ErrorCode::invalid_argument, "noise injection needs a natural-layout mask");
  const int c = static_cast<int>(z.dim(0));
  const int h = static_cast<int>(z.dim(1));
  const int w = static_cast<int>(z.dim(2));
  if (mask.height != h || mask.width != w) {
    throw Error(ErrorCode::shape_mismatch, "mask (" + std::to_string(mask.height) + ", " +
                                               std::to_string(mask.width) + ") vs latent " +
                                               shape_string(z.shape()));
  }
  if (!all_finite(z)) throw Error(ErrorCode::invalid_argument, "non-finite latent");

  const Tensor g = gaussian_field(z.shape(), seed);
  const std::size_t plane_size = static_cast<std::size_t>(h) * w;
  Tensor out(z.shape());
  std::vector<double> zp(plane_size), gp(plane_size);
  for (int ch = 0; ch < c; ++ch) {
    const std::size_t off = static_cast<std::size_t>(ch) * plane_size;
    for (std::size_t i = 0; i < plane_size; ++i) {
      zp[i] = z[off + i];
      gp[i] = g[off + i];
    }
    std::vector<double> zs = forward_spectrum(zp.data(), h, w, mask.transform);
    std::vector<double> gs = forward_spectrum(gp.data(), h, w, mask.transform);
    for (std::size_t i = 0; i < plane_size; ++i) {
      if (mask.mask[i] == 0) {
        zs[2 * i] = gs[2 * i];
        zs[2 * i + 1] = gs[2 * i + 1];
      }
    }
    std::vector<double> back = inverse_spectrum(zs, h, w, mask.transform);
    for (std::size_t i = 0; i < plane_size; ++i) out[off + i] = static_cast<float>(back[i]);
  }
  return out;
}

}  // namespace morphkit
