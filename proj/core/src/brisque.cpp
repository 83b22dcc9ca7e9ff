#include "humancorpus/brisque.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "humancorpus/error.hpp"

namespace humancorpus {

namespace {

int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2 * sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable filter with symmetric boundaries.
std::vector<double> blur(const std::vector<double>& src, int w, int h,
                         const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * src[static_cast<std::size_t>(y) * w + reflect(x + i, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

void check_samples(std::span<const double> s, const FitOptions& opt) {
  if (s.size() < opt.min_samples) {
    throw Error(ErrorCode::kInvalidArgument, "need at least " + std::to_string(opt.min_samples) +
                                                 " samples, got " + std::to_string(s.size()));
  }
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
  }
}

}  // namespace

std::vector<double> mscn(const GrayImage& image, const MscnParams& params) {
  if (params.kernel_radius < 1 || !(params.kernel_sigma > 0) || !(params.c > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid MSCN parameters");
  }
  const int side = 2 * params.kernel_radius + 1;
  if (image.width < side || image.height < side) {
    throw Error(ErrorCode::kInvalidArgument,
                "image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " is below the " + std::to_string(side) + "x" + std::to_string(side) +
                    " minimum");
  }
  // Work relative to one pixel so a flat image yields exact zeros.
  const double ref = image.pixels.front();
  std::vector<double> centered(image.pixels.size()), sq(image.pixels.size());
  for (std::size_t i = 0; i < centered.size(); ++i) {
    centered[i] = image.pixels[i] - ref;
    sq[i] = centered[i] * centered[i];
  }
  const auto k = gaussian_kernel(params.kernel_sigma, params.kernel_radius);
  const auto mu = blur(centered, image.width, image.height, k);
  const auto mu2 = blur(sq, image.width, image.height, k);
  std::vector<double> out(centered.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double var = std::max(mu2[i] - mu[i] * mu[i], 0.0);
    out[i] = (centered[i] - mu[i]) / (std::sqrt(var) + params.c);
  }
  return out;
}

double ggd_moment_ratio(double alpha) {
  return std::exp(2 * std::lgamma(2 / alpha) - std::lgamma(1 / alpha) - std::lgamma(3 / alpha));
}

double invert_moment_ratio(double ratio, const FitOptions& opt) {
  double lo = opt.alpha_min, hi = opt.alpha_max;
  if (ratio <= ggd_moment_ratio(lo)) return lo;
  if (ratio >= ggd_moment_ratio(hi)) return hi;
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (ggd_moment_ratio(mid) < ratio) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GgdFit ggd_fit(std::span<const double> samples, const FitOptions& opt) {
  check_samples(samples, opt);
  double abs_sum = 0, sq_sum = 0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    sq_sum += v * v;
  }
  const double n = static_cast<double>(samples.size());
  const double m1 = abs_sum / n, m2 = sq_sum / n;
  if (!(m2 > 0)) throw Error(ErrorCode::kDegenerateInput, "GGD fit: all samples are zero");
  return {invert_moment_ratio(m1 * m1 / m2, opt), m2};
}

AggdFit aggd_fit(std::span<const double> samples, const FitOptions& opt) {
  check_samples(samples, opt);
  double left_sq = 0, right_sq = 0, abs_sum = 0;
  std::size_t nl = 0, nr = 0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    if (v < 0) {
      left_sq += v * v;
      ++nl;
    } else if (v > 0) {
      right_sq += v * v;
      ++nr;
    }
  }
  if (nl == 0 || nr == 0) {
    throw Error(ErrorCode::kDegenerateInput, "AGGD fit needs samples of both signs");
  }
  const double n = static_cast<double>(samples.size());
  const double sl = std::sqrt(left_sq / nl), sr = std::sqrt(right_sq / nr);
  const double g = sl / sr;
  const double m1 = abs_sum / n;
  const double m2 = (left_sq + right_sq) / n;
  const double r = m1 * m1 / m2;
  const double rn = r * (g * g * g + 1) * (g + 1) / ((g * g + 1) * (g * g + 1));
  const double alpha = invert_moment_ratio(rn, opt);
  const double scale = std::sqrt(std::exp(std::lgamma(1 / alpha) - std::lgamma(3 / alpha)));
  const double bl = sl * scale, br = sr * scale;
  const double eta = (br - bl) * std::exp(std::lgamma(2 / alpha) - std::lgamma(1 / alpha));
  return {alpha, sl * sl, sr * sr, eta};
}

GrayImage downsample2(const GrayImage& image) {
  const int w = image.width / 2, h = image.height / 2;
  if (w < 1 || h < 1) throw Error(ErrorCode::kInvalidArgument, "image too small to downsample");
  GrayImage out{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = 0.25 * (image.at(2 * x, 2 * y) + image.at(2 * x + 1, 2 * y) +
                             image.at(2 * x, 2 * y + 1) + image.at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

BrisqueFeatures brisque_features(const GrayImage& image, const BrisqueParams& params) {
  if (image.width < 16 || image.height < 16) {
    throw Error(ErrorCode::kInvalidArgument, "BRISQUE needs at least 16x16, got " +
                                                 std::to_string(image.width) + "x" +
                                                 std::to_string(image.height));
  }
  BrisqueFeatures f{};
  std::size_t k = 0;
  GrayImage scaled = image;
  for (int scale = 1; scale <= 2; ++scale) {
    if (scale == 2) scaled = downsample2(image);
    const int w = scaled.width, h = scaled.height;
    const auto m = mscn(scaled, params.mscn);
    const std::string where = "scale " + std::to_string(scale);
    try {
      const GgdFit g = ggd_fit(m, params.fit);
      f[k++] = g.alpha;
      f[k++] = g.sigma2;
    } catch (const Error& e) {
      throw Error(e.code(), where + " MSCN: " + e.what());
    }
    struct Shift {
      const char* name;
      int dx, dy;
    };
    constexpr Shift shifts[] = {{"H", 1, 0}, {"V", 0, 1}, {"D1", 1, 1}, {"D2", -1, 1}};
    for (const auto& s : shifts) {
      std::vector<double> prod;
      prod.reserve(static_cast<std::size_t>(w) * h);
      for (int y = 0; y + s.dy < h; ++y) {
        for (int x = std::max(0, -s.dx); x < w && x + s.dx < w; ++x) {
          prod.push_back(m[static_cast<std::size_t>(y) * w + x] *
                         m[static_cast<std::size_t>(y + s.dy) * w + x + s.dx]);
        }
      }
      try {
        const AggdFit a = aggd_fit(prod, params.fit);
        f[k++] = a.alpha;
        f[k++] = a.eta;
        f[k++] = a.sigma_l2;
        f[k++] = a.sigma_r2;
      } catch (const Error& e) {
        throw Error(e.code(), where + " " + s.name + " products: " + e.what());
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> number_array(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw Error(ErrorCode::kParse, std::string("BRISQUE model needs array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw Error(ErrorCode::kParse, std::string("non-number in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

double number(const Json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::kParse, std::string("BRISQUE model needs '") + key + "'");
  }
  if (!it->is_number()) throw Error(ErrorCode::kParse, std::string("'") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

BrisqueModel BrisqueModel::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "BRISQUE model must be an object");
  BrisqueModel m;
  if (!j.contains("dims") || !j["dims"].is_number_integer() || j["dims"].get<std::int64_t>() <= 0) {
    throw Error(ErrorCode::kParse, "BRISQUE model needs a positive 'dims'");
  }
  m.dims_ = j["dims"].get<std::size_t>();
  if (j.contains("feature_min") || j.contains("feature_max")) {
    m.fmin_ = number_array(j, "feature_min");
    m.fmax_ = number_array(j, "feature_max");
    if (m.fmin_.size() != m.dims_ || m.fmax_.size() != m.dims_) {
      throw Error(ErrorCode::kDimensionMismatch, "feature range length differs from dims");
    }
    m.lower_ = number(j, "scale_lower", -1.0);
    m.upper_ = number(j, "scale_upper", 1.0);
  }
  const std::string kind = j.value("kind", std::string("linear"));
  if (kind == "linear") {
    m.kind_ = Kind::kLinear;
    m.weights_ = number_array(j, "weights");
    if (m.weights_.size() != m.dims_) {
      throw Error(ErrorCode::kDimensionMismatch, "weights length differs from dims");
    }
    m.bias_ = number(j, "bias", 0.0);
  } else if (kind == "rbf_svr") {
    m.kind_ = Kind::kRbfSvr;
    m.gamma_ = number(j, "gamma");
    m.rho_ = number(j, "rho", 0.0);
    m.coef_ = number_array(j, "coefficients");
    auto sv = j.find("support_vectors");
    if (sv == j.end() || !sv->is_array() || sv->size() != m.coef_.size()) {
      throw Error(ErrorCode::kParse, "support_vectors must match coefficients");
    }
    for (const auto& row : *sv) {
      Json wrap{{"v", row}};
      auto v = number_array(wrap, "v");
      if (v.size() != m.dims_) {
        throw Error(ErrorCode::kDimensionMismatch, "support vector length differs from dims");
      }
      m.sv_.push_back(std::move(v));
    }
  } else {
    throw Error(ErrorCode::kParse, "unknown BRISQUE model kind '" + kind + "'");
  }
  return m;
}

BrisqueModel BrisqueModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, "model '" + path + "' is not JSON");
  return from_json(j);
}

double BrisqueModel::score(std::span<const double> features) const {
  if (features.size() != dims_) {
    throw Error(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(dims_) +
                                                   " features, got " +
                                                   std::to_string(features.size()));
  }
  std::vector<double> x(features.begin(), features.end());
  if (!fmin_.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double span = fmax_[i] - fmin_[i];
      x[i] = span == 0 ? 0.5 * (lower_ + upper_)
                       : lower_ + (upper_ - lower_) * (x[i] - fmin_[i]) / span;
    }
  }
  if (kind_ == Kind::kLinear) {
    double s = bias_;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
    return s;
  }
  double s = -rho_;
  for (std::size_t k = 0; k < sv_.size(); ++k) {
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (sv_[k][i] - x[i]) * (sv_[k][i] - x[i]);
    s += coef_[k] * std::exp(-gamma_ * d2);
  }
  return s;
}

double brisque_score(std::span<const double> features, const BrisqueModel& model) {
  return model.score(features);
}

}  // namespace humancorpus
