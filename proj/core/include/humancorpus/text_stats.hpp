#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "humancorpus/config.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

// Canonical word definition used by every length and n-gram statistic:
// split on ASCII whitespace, strip non-alphanumeric characters from both ends
// of each piece, lowercase ASCII, drop empties. Non-ASCII letters are kept
// as-is; common Unicode punctuation (curly quotes, dashes, ellipsis) is
// stripped like its ASCII counterpart.
std::vector<std::string> tokenize(std::string_view text);
std::size_t word_count(std::string_view text);

/// Whether document `key` falls in a `pct` percent sample. Samples for
/// increasing percentages are nested.
bool in_sample(std::uint64_t seed, std::string_view key, double pct) noexcept;

/// Exact count of distinct n-token windows over the sampled documents.
/// Document i is keyed by its decimal index for sampling.
std::size_t unique_ngrams(std::span<const std::string> docs, int n,
                          double sample_pct, std::uint64_t seed);

/// HyperLogLog distinct counter (2^14 registers, ~0.8% standard error).
class HyperLogLog {
 public:
  void add(std::string_view item) noexcept;
  void merge(const HyperLogLog& other) noexcept;
  double estimate() const noexcept;

 private:
  static constexpr int kPrecision = 14;
  std::array<std::uint8_t, (1u << kPrecision)> registers_{};
};

struct CorpusTextStats {
  std::uint64_t docs = 0;
  std::uint64_t total_words = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;  // words -> docs
  double mean_words = 0;
  // cumulative[k] = share of documents with at most k words, k = 0..max
  std::vector<double> cumulative;
  int ngram_n = 4;
  std::uint64_t unique_ngrams = 0;
  bool approximate = false;
  double sample_pct = 100;

  friend bool operator==(const CorpusTextStats&, const CorpusTextStats&) = default;
};

/// Mergeable accumulator: any split of a corpus merged back gives the same
/// statistics as one sequential pass.
class TextStatsAccumulator {
 public:
  explicit TextStatsAccumulator(int ngram_n = 4, bool approximate = false);

  void add(std::string_view text);
  void merge(const TextStatsAccumulator& other);
  CorpusTextStats finish() const;

 private:
  int n_;
  bool approximate_;
  std::uint64_t docs_ = 0;
  std::uint64_t words_ = 0;
  std::map<std::uint64_t, std::uint64_t> histogram_;
  std::unordered_set<std::string> exact_;
  std::unique_ptr<HyperLogLog> sketch_;
};

/// Single pass over `field` of the records; records are sampled by id when
/// `cfg.sample_pct` < 100. Results do not depend on `jobs`.
CorpusTextStats corpus_stats(std::span<const SampleRecord> records, TextField field,
                             const StatsConfig& cfg, std::uint64_t seed, int jobs = 1);

/// Overload taking the field by name; throws Error(kInvalidArgument) for
/// unknown names.
CorpusTextStats corpus_stats(std::span<const SampleRecord> records,
                             std::string_view field, const StatsConfig& cfg,
                             std::uint64_t seed, int jobs = 1);

struct NgramCurvePoint {
  double pct = 0;
  std::uint64_t unique = 0;
};

/// Unique n-gram counts for a series of nested sample percentages.
std::vector<NgramCurvePoint> ngram_curve(std::span<const std::string> docs, int n,
                                         std::span<const double> percentages,
                                         std::uint64_t seed);

Json to_json(const CorpusTextStats& s);

}  // namespace humancorpus
