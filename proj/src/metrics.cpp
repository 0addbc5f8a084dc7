#include "morphkit/metrics.hpp"

#include <cmath>
#include <string>

#include "morphkit/error.hpp"
#include "morphkit/image_io.hpp"
#include "morphkit/random.hpp"

namespace morphkit {
namespace {

constexpr int kProjectionSide = 16;

void check_symmetric(const Eigen::MatrixXd& m, const char* name) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(ErrorCode::invalid_argument, std::string(name) + " is not symmetric");
}

// Principal square root of a symmetric PSD matrix. Eigenvalues down to
// -1e-8 (relative to the spectrum's scale) are treated as zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::invalid_argument, std::string("eigendecomposition failed for ") + name);
  Eigen::VectorXd values = eig.eigenvalues();
  const double tol = 1e-8 * std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < -tol)
      throw Error(ErrorCode::invalid_argument, std::string(name) + " is not positive semi-definite");
    values(i) = std::sqrt(std::max(values(i), 0.0));
  }
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd IdentityExtractor::features(const Image& image) const {
  if (image.width != width_ || image.height != height_) {
    throw Error(ErrorCode::shape_mismatch, "identity extractor configured for " +
                                               std::to_string(width_) + "x" + std::to_string(height_) +
                                               ", got " + std::to_string(image.width) + "x" +
                                               std::to_string(image.height));
  }
  Eigen::VectorXd f(static_cast<Eigen::Index>(image.rgb.size()));
  for (std::size_t i = 0; i < image.rgb.size(); ++i) f(static_cast<Eigen::Index>(i)) = image.rgb[i];
  return f;
}

RandomProjectionExtractor::RandomProjectionExtractor(int dimension, std::uint64_t seed) {
  if (dimension < 1) throw Error(ErrorCode::invalid_argument, "feature dimension must be positive");
  const int inputs = kProjectionSide * kProjectionSide * 3;
  projection_.resize(dimension, inputs);
  GaussianSampler s(seed);
  const double scale = 1.0 / std::sqrt(double(inputs));
  for (int r = 0; r < dimension; ++r)
    for (int c = 0; c < inputs; ++c) projection_(r, c) = s.next() * scale;
}

Eigen::VectorXd RandomProjectionExtractor::features(const Image& image) const {
  Image small = resize_bicubic(image, kProjectionSide, kProjectionSide);
  Eigen::VectorXd px(static_cast<Eigen::Index>(small.rgb.size()));
  for (std::size_t i = 0; i < small.rgb.size(); ++i) px(static_cast<Eigen::Index>(i)) = small.rgb[i];
  return projection_ * px;
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name, int width, int height) {
  if (name == "random_projection") return std::make_unique<RandomProjectionExtractor>();
  if (name == "identity") {
    if (width <= 0 || height <= 0)
      throw Error(ErrorCode::invalid_argument, "identity extractor needs an image size");
    return std::make_unique<IdentityExtractor>(width, height);
  }
  throw Error(ErrorCode::config, "unknown feature extractor '" + name +
                                     "' (expected random_projection or identity)");
}

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm();
}

double pairwise_sum(std::span<const Image> frames, const FeatureExtractor& extractor,
                    const FeatureDistance& distance) {
  if (frames.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two frames");
  double total = 0.0;
  Eigen::VectorXd prev = extractor.features(frames[0]);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    Eigen::VectorXd cur = extractor.features(frames[i]);
    total += distance(prev, cur);
    prev = std::move(cur);
  }
  return total;
}

double lpips_sum(std::span<const Image> frames, const FeatureExtractor& extractor) {
  return pairwise_sum(frames, extractor, euclidean_distance);
}

double ppl_sum(std::span<const Image> frames, const FeatureExtractor& extractor) {
  if (frames.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two frames");
  const double eps = 1.0 / double(frames.size() - 1);
  return pairwise_sum(frames, extractor, [eps](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm() / (eps * eps);
  });
}

double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                        const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2) {
  const Eigen::Index d = mu1.size();
  if (mu2.size() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d || cov2.cols() != d)
    throw Error(ErrorCode::shape_mismatch, "Frechet distance inputs disagree in dimension");
  check_symmetric(cov1, "first covariance");
  check_symmetric(cov2, "second covariance");

  // Tr((S1 S2)^{1/2}) = Tr((R S2 R)^{1/2}) with R = S1^{1/2}, which is symmetric.
  Eigen::MatrixXd root = psd_sqrt(cov1, "first covariance");
  Eigen::MatrixXd inner = root * cov2 * root;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    trace_sqrt += std::sqrt(std::max(eig.eigenvalues()(i), 0.0));

  const double traces = cov1.trace() + cov2.trace();
  double value = (mu1 - mu2).squaredNorm() + traces - 2.0 * trace_sqrt;
  if (value < 1e-12 * (1.0 + traces)) value = 0.0;  // rounding residue of equal inputs
  return value;
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n == 0 || d == 0) throw Error(ErrorCode::invalid_argument, "no samples to fit");
  GaussianFit fit;
  fit.mean = samples.colwise().mean().transpose();
  fit.cov = Eigen::MatrixXd::Zero(d, d);
  if (n >= 2) {
    Eigen::MatrixXd centred = samples.rowwise() - fit.mean.transpose();
    fit.cov = (centred.transpose() * centred) / double(n - 1);
  }
  if (n <= d) {
    const double shrink = 1e-6 * fit.cov.trace() / double(d);
    fit.cov.diagonal().array() += shrink;
  }
  return fit;
}

double fid_from_features(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorCode::invalid_argument, "empty image set");
  if (a.cols() != b.cols()) throw Error(ErrorCode::shape_mismatch, "feature widths differ");
  if (a.cols() > kMaxDenseFeatures)
    throw Error(ErrorCode::invalid_argument,
                std::to_string(a.cols()) + "-dim features are too wide for a dense covariance (limit " +
                    std::to_string(kMaxDenseFeatures) + "); use random_projection");
  GaussianFit fa = fit_gaussian(a);
  GaussianFit fb = fit_gaussian(b);
  return frechet_distance(fa.mean, fa.cov, fb.mean, fb.cov);
}

namespace {

Eigen::MatrixXd feature_rows(std::span<const Image> images, const FeatureExtractor& extractor) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(images.size()), extractor.dimension());
  for (std::size_t i = 0; i < images.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = extractor.features(images[i]).transpose();
  return rows;
}

}  // namespace

double fid(std::span<const Image> generated, std::span<const Image> reference,
           const FeatureExtractor& extractor) {
  if (generated.empty() || reference.empty())
    throw Error(ErrorCode::invalid_argument, "FID needs non-empty image sets");
  return fid_from_features(feature_rows(generated, extractor), feature_rows(reference, extractor));
}

MetricsReport evaluate_sequence(std::span<const Image> frames, std::span<const Image> references,
                                const FeatureExtractor& extractor) {
  MetricsReport r;
  r.lpips_sum = lpips_sum(frames, extractor);
  r.ppl_sum = ppl_sum(frames, extractor);
  r.fid_mean = fid(frames, references, extractor);
  r.frame_count = static_cast<int>(frames.size());
  r.extractor = extractor.name();
  return r;
}

MetricsReport aggregate(std::span<const MetricsReport> rows) {
  MetricsReport out;
  out.pair_id = "aggregate";
  if (rows.empty()) return out;
  for (const auto& r : rows) {
    out.lpips_sum += r.lpips_sum;
    out.ppl_sum += r.ppl_sum;
    out.fid_mean += r.fid_mean;
    out.frame_count += r.frame_count;
  }
  out.fid_mean /= double(rows.size());
  out.extractor = rows.front().extractor;
  return out;
}

}  // namespace morphkit
