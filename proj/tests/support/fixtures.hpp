#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "humancorpus/config.hpp"
#include "humancorpus/image.hpp"
#include "humancorpus/record.hpp"

namespace fixtures {

using humancorpus::AttributeLabel;
using humancorpus::PipelineConfig;
using humancorpus::SampleRecord;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Labels with the given names at probability p.
std::vector<AttributeLabel> labels(const std::vector<std::string>& names, double p = 0.99);

/// Raw records whose face sizes, confidences, attribute probabilities and
/// counts sit on, just above and just below every gate threshold.
std::vector<SampleRecord> boundary_corpus(std::size_t n, const PipelineConfig& cfg,
                                          std::uint64_t seed);

/// Raw records with plausible global captions; most clear the selection
/// gates.
std::vector<SampleRecord> raw_corpus(std::size_t n, std::uint64_t seed);

/// Random documents over a small vocabulary so n-grams repeat.
std::vector<std::string> random_docs(std::size_t n, std::size_t max_words, std::size_t vocab,
                                     std::uint64_t seed);

/// Generalized Gaussian draws with shape alpha and variance sigma2.
std::vector<double> ggd_samples(std::size_t n, double alpha, double sigma2, std::uint64_t seed);

/// Asymmetric generalized Gaussian draws; sigma_l / sigma_r are the one-sided
/// standard deviations.
std::vector<double> aggd_samples(std::size_t n, double alpha, double sigma_l, double sigma_r,
                                 std::uint64_t seed);

/// i.i.d. Gaussian pixels around mid-gray, clamped to [0, 255].
humancorpus::GrayImage noise_image(int w, int h, double sd, std::uint64_t seed);

}  // namespace fixtures
