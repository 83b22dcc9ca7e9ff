#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace humancorpus {

/// Single-channel image, intensities in [0, 255], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws Error(kInvalidArgument) on non-positive dims, size mismatch, or
/// values outside [0, 255].
GrayImage make_gray(int width, int height, std::vector<double> pixels);

struct LumaWeights {
  double r = 0.299;
  double g = 0.587;
  double b = 0.114;
};

/// Interleaved 8-bit samples with 1, 3 or 4 channels (alpha ignored).
GrayImage from_interleaved8(std::span<const std::uint8_t> data, int width, int height,
                            int channels, const LumaWeights& w = {});

/// Reads PGM/PPM (P2, P3, P5, P6; maxval <= 255) and the GRAY8 exchange
/// format: the line "GRAY8", then "<width> <height>", then width*height raw
/// bytes. Throws Error(kIo) or Error(kParse).
GrayImage read_image(const std::string& path, const LumaWeights& w = {});

/// Writes GRAY8, rounding and clamping to [0, 255].
void write_gray8(const GrayImage& image, const std::string& path);

/// True if the file starts with a signature read_image understands.
bool is_native_image(const std::string& path);

}  // namespace humancorpus
