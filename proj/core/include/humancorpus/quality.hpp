#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "humancorpus/record.hpp"

namespace humancorpus {

/// Throws Error(kDimensionMismatch) or, for a zero-norm vector,
/// Error(kDegenerateInput).
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Positive component of softmax(scale*cos(img,pos), scale*cos(img,neg)).
double clipiqa_score(std::span<const double> image_emb, std::span<const double> pos_emb,
                     std::span<const double> neg_emb, double logit_scale = 100.0);

/// Bins are [e_i, e_{i+1}) with the last bin closed on the right.
struct ScoreHistogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::vector<double> proportions;
  std::uint64_t total = 0;
  std::uint64_t clamped = 0;  // scores moved onto the first/last edge
};

/// Mergeable counter over fixed edges.
class HistogramAccumulator {
 public:
  /// Throws Error(kInvalidArgument) unless edges are finite, strictly
  /// increasing and at least two.
  explicit HistogramAccumulator(std::vector<double> edges, bool clamp = false);

  /// Out-of-range scores throw Error(kInvalidArgument) unless clamping.
  void add(double score);
  /// Throws Error(kInvalidArgument) when edges differ.
  void merge(const HistogramAccumulator& other);
  /// Throws Error(kDegenerateInput) when nothing was added.
  ScoreHistogram finish() const;

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
  bool clamp_;
  std::uint64_t clamped_ = 0;
};

ScoreHistogram score_histogram(std::span<const double> scores, std::span<const double> edges,
                               bool clamp = false);

/// `bins` equal-width bins spanning [min, max] of the scores; a constant
/// score list gets the unit interval around its value.
std::vector<double> equal_width_edges(std::span<const double> scores, int bins);

Json to_json(const ScoreHistogram& h);

}  // namespace humancorpus
