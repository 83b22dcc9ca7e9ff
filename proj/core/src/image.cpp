#include "humancorpus/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "humancorpus/error.hpp"

namespace humancorpus {

GrayImage make_gray(int width, int height, std::vector<double> pixels) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kInvalidArgument, "pixel count does not match dimensions");
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 255.0)) {
      throw Error(ErrorCode::kInvalidArgument, "pixel intensity outside [0, 255]");
    }
  }
  return GrayImage{width, height, std::move(pixels)};
}

GrayImage from_interleaved8(std::span<const std::uint8_t> data, int width, int height,
                            int channels, const LumaWeights& w) {
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported channel count");
  }
  if (width <= 0 || height <= 0 ||
      data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::kInvalidArgument, "buffer size does not match dimensions");
  }
  std::vector<double> px(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto* p = data.data() + i * channels;
    px[i] = channels == 1 ? p[0] : w.r * p[0] + w.g * p[1] + w.b * p[2];
  }
  return make_gray(width, height, std::move(px));
}

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, std::string path) : s_(bytes), path_(std::move(path)) {}

  long number() {
    skip();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      throw Error(ErrorCode::kParse, path_ + ": malformed image header");
    }
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 1'000'000) throw Error(ErrorCode::kParse, path_ + ": header value too large");
    }
    return v;
  }

  // Single whitespace byte separating the header from binary data.
  void end_header() {
    if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      throw Error(ErrorCode::kParse, path_ + ": malformed image header");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

bool is_native_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char head[5] = {};
  in.read(head, 5);
  if (in.gcount() < 2) return false;
  if (head[0] == 'P' && (head[1] == '2' || head[1] == '3' || head[1] == '5' || head[1] == '6')) {
    return true;
  }
  return in.gcount() == 5 && std::string_view(head, 5) == "GRAY8";
}

GrayImage read_image(const std::string& path, const LumaWeights& w) {
  const std::string bytes = slurp(path);
  if (bytes.rfind("GRAY8", 0) == 0) {
    HeaderReader h(bytes, path);
    h.seek(5);
    const long width = h.number();
    const long height = h.number();
    h.end_header();
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - h.pos() < n) throw Error(ErrorCode::kParse, path + ": truncated GRAY8 data");
    std::span<const std::uint8_t> data(reinterpret_cast<const std::uint8_t*>(bytes.data()) + h.pos(), n);
    return from_interleaved8(data, static_cast<int>(width), static_cast<int>(height), 1, w);
  }
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorCode::kParse, path + ": unsupported image format");
  }
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw Error(ErrorCode::kParse, path + ": unsupported PNM variant");
  }
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  HeaderReader h(bytes, path);
  h.seek(2);
  const long width = h.number();
  const long height = h.number();
  const long maxval = h.number();
  if (maxval < 1 || maxval > 255) throw Error(ErrorCode::kParse, path + ": maxval must be 1..255");
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  std::vector<std::uint8_t> data(n);
  if (kind == '5' || kind == '6') {
    h.end_header();
    if (bytes.size() - h.pos() < n) throw Error(ErrorCode::kParse, path + ": truncated PNM data");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(h.pos()), n, data.begin());
  } else {
    for (auto& v : data) {
      const long x = h.number();
      if (x > maxval) throw Error(ErrorCode::kParse, path + ": sample exceeds maxval");
      v = static_cast<std::uint8_t>(x);
    }
  }
  if (maxval != 255) {
    for (auto& v : data) v = static_cast<std::uint8_t>(std::lround(v * 255.0 / maxval));
  }
  return from_interleaved8(data, static_cast<int>(width), static_cast<int>(height), channels, w);
}

void write_gray8(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write image '" + path + "'");
  out << "GRAY8\n" << image.width << ' ' << image.height << '\n';
  for (double v : image.pixels) {
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L))));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace humancorpus
