#include "humancorpus/quality.hpp"

#include <algorithm>
#include <cmath>

#include "humancorpus/error.hpp"

namespace humancorpus {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding sizes differ (" +
                                                   std::to_string(a.size()) + " vs " +
                                                   std::to_string(b.size()) + ")");
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0) || !(nb > 0)) throw Error(ErrorCode::kDegenerateInput, "zero-norm embedding");
  if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite embedding");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double clipiqa_score(std::span<const double> image_emb, std::span<const double> pos_emb,
                     std::span<const double> neg_emb, double logit_scale) {
  if (!std::isfinite(logit_scale)) throw Error(ErrorCode::kInvalidArgument, "logit_scale must be finite");
  const double cp = cosine_similarity(image_emb, pos_emb);
  const double cn = cosine_similarity(image_emb, neg_emb);
  return 1.0 / (1.0 + std::exp(logit_scale * (cn - cp)));
}

HistogramAccumulator::HistogramAccumulator(std::vector<double> edges, bool clamp)
    : edges_(std::move(edges)), clamp_(clamp) {
  if (edges_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two bin edges");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i]) || (i > 0 && !(edges_[i] > edges_[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "bin edges must be finite and strictly increasing");
    }
  }
  counts_.assign(edges_.size() - 1, 0);
}

void HistogramAccumulator::add(double score) {
  if (std::isnan(score)) throw Error(ErrorCode::kInvalidArgument, "NaN score");
  if (score < edges_.front() || score > edges_.back()) {
    if (!clamp_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "score " + std::to_string(score) + " outside the bin range");
    }
    score = std::clamp(score, edges_.front(), edges_.back());
    ++clamped_;
  }
  auto it = std::upper_bound(edges_.begin(), edges_.end(), score);
  auto bin = static_cast<std::size_t>(it - edges_.begin());
  bin = bin == 0 ? 0 : std::min(bin - 1, counts_.size() - 1);
  ++counts_[bin];
}

void HistogramAccumulator::merge(const HistogramAccumulator& other) {
  if (other.edges_ != edges_) throw Error(ErrorCode::kInvalidArgument, "histogram edges differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  clamped_ += other.clamped_;
}

ScoreHistogram HistogramAccumulator::finish() const {
  ScoreHistogram h;
  h.edges = edges_;
  h.counts = counts_;
  for (auto c : counts_) h.total += c;
  if (h.total == 0) throw Error(ErrorCode::kDegenerateInput, "empty score list");
  h.clamped = clamped_;
  h.proportions.reserve(counts_.size());
  for (auto c : counts_) {
    h.proportions.push_back(static_cast<double>(c) / static_cast<double>(h.total));
  }
  return h;
}

ScoreHistogram score_histogram(std::span<const double> scores, std::span<const double> edges,
                               bool clamp) {
  HistogramAccumulator acc({edges.begin(), edges.end()}, clamp);
  for (double s : scores) acc.add(s);
  return acc.finish();
}

std::vector<double> equal_width_edges(std::span<const double> scores, int bins) {
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
  if (scores.empty()) throw Error(ErrorCode::kDegenerateInput, "empty score list");
  double lo = scores[0], hi = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "non-finite score");
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
  edges.back() = hi;
  return edges;
}

Json to_json(const ScoreHistogram& h) {
  return Json{{"edges", h.edges},
              {"counts", h.counts},
              {"proportions", h.proportions},
              {"total", h.total},
              {"clamped", h.clamped}};
}

}  // namespace humancorpus
