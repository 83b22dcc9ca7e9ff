#include <cstdint>
#include <span>

#include "cli.hpp"
#include "humancorpus/error.hpp"

#ifdef HUMANCORPUS_WITH_OPENCV
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace humancorpus::cli {

GrayImage load_any_image(const std::string& path) {
  if (is_native_image(path)) return read_image(path);
#ifdef HUMANCORPUS_WITH_OPENCV
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorCode::kParse, "cannot decode image '" + path + "'");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  std::span<const std::uint8_t> data(rgb.data, rgb.total() * 3);
  return from_interleaved8(data, rgb.cols, rgb.rows, 3);
#else
  throw Error(ErrorCode::kParse,
              "'" + path + "' is not PGM/PPM/GRAY8 and this build has no OpenCV decoder");
#endif
}

}  // namespace humancorpus::cli
