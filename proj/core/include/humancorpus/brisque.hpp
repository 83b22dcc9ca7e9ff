#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "humancorpus/image.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

struct MscnParams {
  double kernel_sigma = 7.0 / 6.0;
  int kernel_radius = 3;  // 7x7 window
  double c = 1.0;
};

/// Mean-subtracted contrast-normalized coefficients (I - mu) / (sigma + C)
/// with a Gaussian-weighted local mean and standard deviation and symmetric
/// (edge-repeating) boundary handling. Output has the input's dimensions,
/// row-major. Throws Error(kInvalidArgument) if either side is smaller than
/// the window.
std::vector<double> mscn(const GrayImage& image, const MscnParams& params = {});

struct FitOptions {
  double alpha_min = 0.1;
  double alpha_max = 10.0;
  double tolerance = 1e-6;
  std::size_t min_samples = 100;
};

struct GgdFit {
  double alpha = 0;
  double sigma2 = 0;
};

struct AggdFit {
  double alpha = 0;
  double sigma_l2 = 0;
  double sigma_r2 = 0;
  double eta = 0;
};

/// Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)); increasing in a.
double ggd_moment_ratio(double alpha);

/// Inverts ggd_moment_ratio by bisection on [alpha_min, alpha_max]; targets
/// outside the bracket's range clamp to its ends.
double invert_moment_ratio(double ratio, const FitOptions& opt = {});

/// Moment-matching GGD fit. Throws Error(kDegenerateInput) for all-zero
/// samples and Error(kInvalidArgument) for too few or non-finite samples.
GgdFit ggd_fit(std::span<const double> samples, const FitOptions& opt = {});

/// Asymmetric GGD fit from one-sided second moments. Throws
/// Error(kDegenerateInput) unless both signs are present.
AggdFit aggd_fit(std::span<const double> samples, const FitOptions& opt = {});

inline constexpr std::size_t kBrisqueFeatureCount = 36;
using BrisqueFeatures = std::array<double, kBrisqueFeatureCount>;

struct BrisqueParams {
  MscnParams mscn;
  FitOptions fit{.min_samples = 16};  // the 2nd scale of a 16x16 image is 8x8
};

/// 2x2 box average; odd trailing rows/columns are dropped.
GrayImage downsample2(const GrayImage& image);

/// Per scale (original, then downsample2): GGD alpha and sigma2 of the MSCN
/// map, then for each neighbour product H, V, D1, D2 the AGGD alpha, eta,
/// sigma_l2 and sigma_r2. Requires at least 16x16.
BrisqueFeatures brisque_features(const GrayImage& image, const BrisqueParams& params = {});

/// Pluggable regressor loaded from JSON:
///   {"dims": n, "feature_min": [...], "feature_max": [...],
///    "scale_lower": -1, "scale_upper": 1,
///    "kind": "linear", "weights": [...], "bias": b}
/// or "kind": "rbf_svr" with "gamma", "support_vectors", "coefficients",
/// "rho" (score = sum coef_i * exp(-gamma |sv_i - x|^2) - rho). The ranges
/// are optional; when present features are min-max scaled first.
class BrisqueModel {
 public:
  static BrisqueModel from_json(const Json& j);
  static BrisqueModel load(const std::string& path);

  std::size_t dims() const noexcept { return dims_; }
  /// Throws Error(kDimensionMismatch) when features.size() != dims().
  double score(std::span<const double> features) const;

 private:
  enum class Kind { kLinear, kRbfSvr };
  std::size_t dims_ = 0;
  Kind kind_ = Kind::kLinear;
  std::vector<double> fmin_, fmax_;
  double lower_ = -1, upper_ = 1;
  std::vector<double> weights_;
  double bias_ = 0;
  double gamma_ = 0;
  std::vector<std::vector<double>> sv_;
  std::vector<double> coef_;
  double rho_ = 0;
};

double brisque_score(std::span<const double> features, const BrisqueModel& model);

}  // namespace humancorpus
