#include "morphkit/toy_backend.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>

#include "morphkit/error.hpp"
#include "morphkit/freq_noise.hpp"
#include "morphkit/random.hpp"

namespace morphkit {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

constexpr int kTokens1 = ToyBackend::kLatentSize * ToyBackend::kLatentSize;
constexpr int kMidSize = ToyBackend::kLatentSize / 2;
constexpr int kTokens2 = kMidSize * kMidSize;
constexpr int kHeadDim = ToyBackend::kWidth / ToyBackend::kHeads;
// Keeps the toy's noise prediction small and smooth so that deterministic
// inversion stays close to exact.
constexpr float kOutputScale = 0.01f;
// Prior precision ramps from 0 to kHighPrecision between these radii.
constexpr double kPriorRampLo = 0.3;
constexpr double kPriorRampHi = 0.55;
constexpr double kHighPrecision = 400.0;

using ComplexMatrix = Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic>;

const ComplexMatrix& dft_matrix() {
  static const ComplexMatrix d = [] {
    const int n = ToyBackend::kLatentSize;
    ComplexMatrix m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        m(r, c) = std::polar(1.0f, static_cast<float>(-2.0 * std::numbers::pi * r * c / n));
    return m;
  }();
  return d;
}

std::vector<float> gaussian_weights(std::uint64_t seed, std::size_t count, double scale) {
  GaussianSampler s(seed);
  std::vector<float> w(count);
  for (auto& v : w) v = static_cast<float>(s.next() * scale);
  return w;
}

float silu(float x) { return x / (1.0f + std::exp(-x)); }

// 3x3 same-padded convolution. in: (cin, n, n), weights (cout, cin, 3, 3).
std::vector<float> conv3x3(const float* in, int cin, int cout, int n, const std::vector<float>& w) {
  std::vector<float> out(static_cast<std::size_t>(cout) * n * n, 0.0f);
  for (int co = 0; co < cout; ++co) {
    float* o = out.data() + static_cast<std::size_t>(co) * n * n;
    for (int ci = 0; ci < cin; ++ci) {
      const float* src = in + static_cast<std::size_t>(ci) * n * n;
      const float* k = w.data() + (static_cast<std::size_t>(co) * cin + ci) * 9;
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          float acc = 0.0f;
          for (int dy = -1; dy <= 1; ++dy) {
            int yy = y + dy;
            if (yy < 0 || yy >= n) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              int xx = x + dx;
              if (xx < 0 || xx >= n) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * src[yy * n + xx];
            }
          }
          o[y * n + x] += acc;
        }
      }
    }
  }
  return out;
}

// (tokens, width) -> (heads, tokens, head_dim)
Tensor split_heads(const RowMatrix& m) {
  const auto tokens = static_cast<std::size_t>(m.rows());
  Tensor t({ToyBackend::kHeads, tokens, kHeadDim});
  for (int h = 0; h < ToyBackend::kHeads; ++h)
    for (std::size_t r = 0; r < tokens; ++r)
      for (int d = 0; d < kHeadDim; ++d)
        t[(h * tokens + r) * kHeadDim + d] = m(static_cast<Eigen::Index>(r), h * kHeadDim + d);
  return t;
}

RowMatrix merge_heads(const Tensor& t) {
  const auto tokens = t.dim(1);
  RowMatrix m(static_cast<Eigen::Index>(tokens), ToyBackend::kWidth);
  for (int h = 0; h < ToyBackend::kHeads; ++h)
    for (std::size_t r = 0; r < tokens; ++r)
      for (int d = 0; d < kHeadDim; ++d)
        m(static_cast<Eigen::Index>(r), h * kHeadDim + d) = t[(h * tokens + r) * kHeadDim + d];
  return m;
}

ConstMap as_matrix(const std::vector<float>& w, int rows, int cols) {
  return ConstMap(w.data(), rows, cols);
}

}  // namespace

BetaSpec ToyBackend::default_beta_spec() {
  return BetaSpec{BetaKind::linear, 0.00085, 0.012, 1000};
}

ToyBackend::ToyBackend(std::uint64_t seed, int steps)
    : seed_(seed), schedule_(build_schedule(steps, default_beta_spec())) {
  std::uint64_t stream = 0;
  auto next_seed = [&] { return mix_seed(seed, stream++); };

  // Encoder projection with orthonormal columns (Gram-Schmidt).
  projection_ = gaussian_weights(next_seed(), kChannels * 3, 1.0);
  for (int col = 0; col < 3; ++col) {
    for (int prev = 0; prev < col; ++prev) {
      double d = 0.0;
      for (int r = 0; r < kChannels; ++r) d += double(projection_[r * 3 + col]) * projection_[r * 3 + prev];
      for (int r = 0; r < kChannels; ++r) projection_[r * 3 + col] -= static_cast<float>(d * projection_[r * 3 + prev]);
    }
    double n = 0.0;
    for (int r = 0; r < kChannels; ++r) n += double(projection_[r * 3 + col]) * projection_[r * 3 + col];
    n = std::sqrt(n);
    for (int r = 0; r < kChannels; ++r) projection_[r * 3 + col] = static_cast<float>(projection_[r * 3 + col] / n);
  }

  const double inv_w = 1.0 / std::sqrt(double(kWidth));
  time_w1_ = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
  time_w2_ = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
  conv_in_ = gaussian_weights(next_seed(), kWidth * kChannels * 9, 1.0 / std::sqrt(kChannels * 9.0));
  conv_in_bias_ = gaussian_weights(next_seed(), kWidth, 0.1);
  for (AttentionWeights* a : {&self1_, &cross_, &self2_}) {
    a->wq = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
    a->wk = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
    a->wv = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
    a->wo = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
  }
  mid_w_ = gaussian_weights(next_seed(), kWidth * kWidth, inv_w);
  mid_bias_ = gaussian_weights(next_seed(), kWidth, 0.1);
  conv_out_ = gaussian_weights(next_seed(), kChannels * kWidth * 9,
                               kOutputScale / std::sqrt(kWidth * 9.0));

  precision_.resize(kLatentSize * kLatentSize);
  for (int y = 0; y < kLatentSize; ++y)
    for (int x = 0; x < kLatentSize; ++x) {
      double r = normalized_radius(y, x, kLatentSize, kLatentSize, SpectralTransform::fft);
      double u = std::clamp((r - kPriorRampLo) / (kPriorRampHi - kPriorRampLo), 0.0, 1.0);
      precision_[y * kLatentSize + x] = static_cast<float>(kHighPrecision * u * u * (3.0 - 2.0 * u));
    }
}

Shape ToyBackend::latent_shape() const { return {kChannels, kLatentSize, kLatentSize}; }

Tensor ToyBackend::encode(const Image& image) const {
  if (image.width != image_width() || image.height != image_height()) {
    throw Error(ErrorCode::invalid_argument,
                "toy encoder expects " + std::to_string(image_width()) + "x" +
                    std::to_string(image_height()) + " images, got " + std::to_string(image.width) +
                    "x" + std::to_string(image.height));
  }
  Tensor z(latent_shape());
  const double inv = 1.0 / (kPool * kPool);
  for (int by = 0; by < kLatentSize; ++by) {
    for (int bx = 0; bx < kLatentSize; ++bx) {
      double pooled[3] = {0.0, 0.0, 0.0};
      for (int y = by * kPool; y < (by + 1) * kPool; ++y)
        for (int x = bx * kPool; x < (bx + 1) * kPool; ++x)
          for (int c = 0; c < 3; ++c) pooled[c] += 2.0 * image.at(x, y, c) - 1.0;
      for (int ch = 0; ch < kChannels; ++ch) {
        double v = 0.0;
        for (int c = 0; c < 3; ++c) v += projection_[ch * 3 + c] * pooled[c] * inv;
        z[(static_cast<std::size_t>(ch) * kLatentSize + by) * kLatentSize + bx] = static_cast<float>(v);
      }
    }
  }
  return z;
}

Image ToyBackend::decode(const Tensor& latent) const {
  if (latent.shape() != latent_shape())
    throw Error(ErrorCode::shape_mismatch, "toy decoder expects " + shape_string(latent_shape()) +
                                               ", got " + shape_string(latent.shape()));
  Image img(image_width(), image_height());
  for (int by = 0; by < kLatentSize; ++by) {
    for (int bx = 0; bx < kLatentSize; ++bx) {
      float px[3];
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int ch = 0; ch < kChannels; ++ch)
          v += projection_[ch * 3 + c] * latent[(static_cast<std::size_t>(ch) * kLatentSize + by) * kLatentSize + bx];
        px[c] = static_cast<float>(std::clamp((v + 1.0) * 0.5, 0.0, 1.0));
      }
      for (int y = by * kPool; y < (by + 1) * kPool; ++y)
        for (int x = bx * kPool; x < (bx + 1) * kPool; ++x)
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = px[c];
    }
  }
  return img;
}

TextEmbedding ToyBackend::embed_text(const std::string& prompt) const {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : prompt) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);

  TextEmbedding e;
  e.data = Tensor({kTextTokens, kTextDim});
  const double scale = 1.0 / std::sqrt(double(kTextDim));
  for (int i = 0; i < kTextTokens; ++i) {
    std::string token = i < static_cast<int>(words.size()) ? words[static_cast<std::size_t>(i)] : "<pad>";
    GaussianSampler s(mix_seed(seed_ ^ 0x7e47ull, fnv1a(token)));
    for (int d = 0; d < kTextDim; ++d) e.data[static_cast<std::size_t>(i) * kTextDim + d] = static_cast<float>(s.next() * scale);
  }
  e.source = words.empty() ? TextEmbedding::Source::unconditional : TextEmbedding::Source::other;
  return e;
}

std::vector<std::string> ToyBackend::self_attention_layers() const {
  return {"down.attn1", "mid.attn1"};
}

Tensor ToyBackend::predict_noise(const Tensor& latent, int t, const TextEmbedding& text,
                                 AttentionHook* hook, const LatentRole& owner) const {
  if (latent.shape() != latent_shape())
    throw Error(ErrorCode::shape_mismatch, "toy denoiser expects " + shape_string(latent_shape()) +
                                               ", got " + shape_string(latent.shape()));
  if (text.data.shape() != Shape{kTextTokens, kTextDim})
    throw Error(ErrorCode::shape_mismatch, "toy denoiser expects (8, 32) text embeddings");
  if (t < 0 || t > schedule_.total_steps)
    throw Error(ErrorCode::out_of_range, "timestep " + std::to_string(t) + " outside schedule");

  constexpr int n = kLatentSize;
  const double train_t = schedule_.train_timestep[static_cast<std::size_t>(t)];

  const double train_span = schedule_.beta_spec.train_steps > 0 ? schedule_.beta_spec.train_steps
                                                                 : schedule_.total_steps;
  // Timestep embedding -> per-channel bias.
  Eigen::RowVectorXf temb(kWidth);
  for (int i = 0; i < kWidth / 2; ++i) {
    // low frequencies only: the prediction must vary slowly across steps
    double phase = std::numbers::pi * (i + 1) / 8.0 * train_t / train_span;
    temb(i) = static_cast<float>(std::sin(phase));
    temb(i + kWidth / 2) = static_cast<float>(std::cos(phase));
  }
  Eigen::RowVectorXf tb = temb * as_matrix(time_w1_, kWidth, kWidth);
  for (int i = 0; i < kWidth; ++i) tb(i) = silu(tb(i));
  tb = (tb * as_matrix(time_w2_, kWidth, kWidth)).eval();

  std::vector<float> h = conv3x3(latent.data(), kChannels, kWidth, n, conv_in_);
  RowMatrix x(kTokens1, kWidth);
  for (int c = 0; c < kWidth; ++c)
    for (int p = 0; p < kTokens1; ++p)
      x(p, c) = silu(h[static_cast<std::size_t>(c) * kTokens1 + p] + conv_in_bias_[c] + tb(c));

  auto self_attention = [&](const RowMatrix& in, const AttentionWeights& w, const char* layer) {
    AttentionSite site;
    site.layer_id = layer;
    site.q = split_heads(in * as_matrix(w.wq, kWidth, kWidth));
    site.k = split_heads(in * as_matrix(w.wk, kWidth, kWidth));
    site.v = split_heads(in * as_matrix(w.wv, kWidth, kWidth));
    site.timestep = t;
    site.owner = owner;
    Tensor out = hook ? hook->on_self_attention(site) : attention(site.q, site.k, site.v);
    if (out.shape() != site.q.shape())
      throw Error(ErrorCode::backend, std::string("attention hook returned ") +
                                          shape_string(out.shape()) + " at " + layer);
    RowMatrix merged = merge_heads(out);
    return RowMatrix(merged * as_matrix(w.wo, kWidth, kWidth));
  };

  x += self_attention(x, self1_, "down.attn1");

  // Cross-attention onto the text tokens; never hooked.
  {
    ConstMap y(text.data.data(), kTextTokens, kTextDim);
    Tensor q = split_heads(x * as_matrix(cross_.wq, kWidth, kWidth));
    Tensor k = split_heads(y * as_matrix(cross_.wk, kTextDim, kWidth));
    Tensor v = split_heads(y * as_matrix(cross_.wv, kTextDim, kWidth));
    x += merge_heads(attention(q, k, v)) * as_matrix(cross_.wo, kWidth, kWidth);
  }

  RowMatrix mid(kTokens2, kWidth);
  for (int my = 0; my < kMidSize; ++my)
    for (int mx = 0; mx < kMidSize; ++mx) {
      auto r = mid.row(my * kMidSize + mx);
      r = 0.25f * (x.row((2 * my) * n + 2 * mx) + x.row((2 * my) * n + 2 * mx + 1) +
                   x.row((2 * my + 1) * n + 2 * mx) + x.row((2 * my + 1) * n + 2 * mx + 1));
    }
  mid = (mid * as_matrix(mid_w_, kWidth, kWidth)).eval();
  for (int p = 0; p < kTokens2; ++p)
    for (int c = 0; c < kWidth; ++c) mid(p, c) = silu(mid(p, c) + mid_bias_[c]);
  mid += self_attention(mid, self2_, "mid.attn1");

  for (int y = 0; y < n; ++y)
    for (int xx = 0; xx < n; ++xx) x.row(y * n + xx) += mid.row((y / 2) * kMidSize + xx / 2);

  std::vector<float> chw(static_cast<std::size_t>(kWidth) * kTokens1);
  for (int c = 0; c < kWidth; ++c)
    for (int p = 0; p < kTokens1; ++p) chw[static_cast<std::size_t>(c) * kTokens1 + p] = x(p, c);
  std::vector<float> out = conv3x3(chw.data(), kWidth, kChannels, n, conv_out_);

  // E[eps | x_t] under a zero-mean Gaussian prior with per-bin precision p:
  // sqrt(1 - a) p / (a + (1 - a) p) applied in the Fourier domain.
  const double a = schedule_.alpha_bar_at(t);
  Eigen::MatrixXf gain(n, n);
  for (int i = 0; i < n * n; ++i) {
    double p = precision_[i];
    gain(i / n, i % n) = static_cast<float>(std::sqrt(1.0 - a) * p / (a + (1.0 - a) * p));
  }
  const ComplexMatrix& d = dft_matrix();
  const ComplexMatrix dc = d.conjugate();
  for (int c = 0; c < kChannels; ++c) {
    Eigen::Map<const RowMatrix> xc(latent.data() + static_cast<std::size_t>(c) * kTokens1, n, n);
    ComplexMatrix spec = d * xc.cast<std::complex<float>>() * d.transpose();
    spec.array() *= gain.cast<std::complex<float>>().array();
    RowMatrix back = (dc * spec * dc.transpose()).real() / float(n * n);
    Eigen::Map<RowMatrix>(out.data() + static_cast<std::size_t>(c) * kTokens1, n, n) += back;
  }
  return Tensor(latent_shape(), std::move(out));
}

TextEmbedding Backend::unconditional_embedding() const {
  TextEmbedding e = embed_text("");
  e.source = TextEmbedding::Source::unconditional;
  return e;
}

}  // namespace morphkit
