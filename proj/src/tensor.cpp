#include "morphkit/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "morphkit/error.hpp"

namespace morphkit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::degenerate_input: return "degenerate input";
    case ErrorCode::shape_mismatch: return "shape mismatch";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::cache_miss: return "cache miss";
    case ErrorCode::backend: return "backend error";
    case ErrorCode::unavailable: return "unavailable";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown";
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), values_(shape_volume(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_volume(shape_)) {
    throw Error(ErrorCode::shape_mismatch, "tensor of shape " + shape_string(shape_) +
                                               " given " + std::to_string(values_.size()) +
                                               " values");
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::shape_mismatch, std::string(what) + ": " + shape_string(a.shape()) +
                                               " vs " + shape_string(b.shape()));
  }
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

double l2_norm(const Tensor& a) {
  double s = 0.0;
  for (float v : a.values()) s += double(v) * double(v);
  return std::sqrt(s);
}

double l2_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double relative_l2(const Tensor& a, const Tensor& b) {
  double denom = l2_norm(b);
  double num = l2_distance(a, b);
  return denom > 0.0 ? num / denom : num;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

bool all_finite(const Tensor& a) {
  for (float v : a.values())
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor linear_combination(double alpha, const Tensor& a, double beta, const Tensor& b) {
  require_same_shape(a, b, "linear_combination");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = static_cast<float>(alpha * double(a[i]) + beta * double(b[i]));
  return out;
}

Tensor scaled(const Tensor& a, double factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<float>(factor * double(a[i]));
  return out;
}

std::uint64_t checksum(std::span<const float> values, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (float v : values) {
    unsigned char bytes[sizeof(float)];
    std::memcpy(bytes, &v, sizeof(float));
    for (unsigned char c : bytes) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
  }
  return hash;
}

}  // namespace morphkit
