#pragma once

#include <cstdint>
#include <vector>

#include "morphkit/config.hpp"
#include "morphkit/types.hpp"

namespace morphkit {

// Binary spectral mask over an (H, W) frequency grid: 1 keeps the latent's
// own spectrum, 0 substitutes transformed Gaussian noise.
struct SpectralMask {
  enum class Layout { natural, centered };

  int height = 0;
  int width = 0;
  double cutoff = 0.5;
  Layout layout = Layout::natural;
  SpectralTransform transform = SpectralTransform::fft;
  std::vector<std::uint8_t> mask;  // row-major (H, W)

  std::uint8_t at(int y, int x) const { return mask[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count_zeros() const;
};

// Normalized radial frequency of bin (y, x) in [0, 1]; 1 at the highest
// representable frequency on both axes. Bins follow the transform's natural
// ordering (FFT: 0..N/2 then negative frequencies; DCT: 0..N-1).
double normalized_radius(int y, int x, int height, int width, SpectralTransform transform);

// Mask with 0 on bins whose normalized radius is >= 1 - cutoff and 1
// elsewhere. cutoff must be in (0, 1]. NoiseBand::low inverts the mask so the
// low band is replaced instead.
SpectralMask retain_mask(int height, int width, double cutoff,
                         SpectralTransform transform = SpectralTransform::fft,
                         NoiseBand band = NoiseBand::high,
                         SpectralMask::Layout layout = SpectralMask::Layout::natural);

// Re-orders a natural-layout FFT mask with DC at the centre (fftshift).
SpectralMask to_centered(const SpectralMask& natural);

// Per channel of a (C, H, W) tensor: keep the input spectrum where the mask
// is 1, substitute the spectrum of seeded unit Gaussian noise where it is 0,
// and transform back. The mask must use the natural layout.
Tensor inject_noise(const Tensor& z, const SpectralMask& mask, std::uint64_t seed);

// Seeded unit Gaussian noise field of the given shape; the `g` of
// inject_noise.
Tensor gaussian_field(const Shape& shape, std::uint64_t seed);

// Complex spectrum of one (H, W) plane, interleaved (re, im) in row-major
// order. DCT spectra have zero imaginary parts.
std::vector<double> forward_spectrum(const double* plane, int height, int width,
                                     SpectralTransform transform);
std::vector<double> inverse_spectrum(const std::vector<double>& spectrum, int height, int width,
                                     SpectralTransform transform,
                                     double* max_imag_residue = nullptr);

}  // namespace morphkit
