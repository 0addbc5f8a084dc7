#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "morphkit/types.hpp"

namespace morphkit {

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd features(const Image& image) const = 0;
};

// Flattened pixels; every image must match the configured resolution.
class IdentityExtractor : public FeatureExtractor {
 public:
  IdentityExtractor(int width, int height) : width_(width), height_(height) {}
  std::string name() const override { return "identity"; }
  int dimension() const override { return width_ * height_ * 3; }
  Eigen::VectorXd features(const Image& image) const override;

 private:
  int width_;
  int height_;
};

// Area-resamples to 16x16 RGB and applies a fixed seeded Gaussian
// projection. Stand-in for learned perceptual and Inception features.
class RandomProjectionExtractor : public FeatureExtractor {
 public:
  explicit RandomProjectionExtractor(int dimension = 64, std::uint64_t seed = 0x5eed);
  std::string name() const override { return "random_projection"; }
  int dimension() const override { return static_cast<int>(projection_.rows()); }
  Eigen::VectorXd features(const Image& image) const override;

 private:
  Eigen::MatrixXd projection_;
};

// "identity" (needs the image size) or "random_projection".
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name, int width = 0,
                                                 int height = 0);

using FeatureDistance = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Sum of distance(features(f_i), features(f_{i+1})) over adjacent frames.
double pairwise_sum(std::span<const Image> frames, const FeatureExtractor& extractor,
                    const FeatureDistance& distance);

double lpips_sum(std::span<const Image> frames, const FeatureExtractor& extractor);

// Sum of d^2 / eps^2 over adjacent frames with eps = 1 / (frames - 1).
double ppl_sum(std::span<const Image> frames, const FeatureExtractor& extractor);

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}), symmetric PSD inputs.
double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                        const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2);

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Rows are samples. Unbiased covariance; diagonal shrinkage
// 1e-6 * trace / D is added when the sample count is <= D.
GaussianFit fit_gaussian(const Eigen::MatrixXd& samples);

// Widest feature vector fid_from_features accepts (dense D x D covariances).
inline constexpr int kMaxDenseFeatures = 4096;

double fid_from_features(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double fid(std::span<const Image> generated, std::span<const Image> reference,
           const FeatureExtractor& extractor);

struct MetricsReport {
  std::string pair_id;
  double lpips_sum = 0.0;
  double ppl_sum = 0.0;
  double fid_mean = 0.0;
  int frame_count = 0;
  std::string extractor;
};

// Metrics for one generated sequence against its two reference images.
MetricsReport evaluate_sequence(std::span<const Image> frames, std::span<const Image> references,
                                const FeatureExtractor& extractor);

// Dataset-level row: LPIPS and PPL sums add across pairs, FID is the
// arithmetic mean of the per-pair FIDs.
MetricsReport aggregate(std::span<const MetricsReport> rows);

}  // namespace morphkit
