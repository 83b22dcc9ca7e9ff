#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "humancorpus/image.hpp"

namespace humancorpus::cli {

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name.
int run(std::span<const std::string> args, Streams io);
int run(int argc, char** argv);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Native formats via read_image; PNG/JPEG and friends when built with
/// OpenCV.
GrayImage load_any_image(const std::string& path);

}  // namespace humancorpus::cli
