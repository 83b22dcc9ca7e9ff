#include "humancorpus/text_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "humancorpus/error.hpp"
#include "humancorpus/parallel.hpp"
#include "humancorpus/rng.hpp"

namespace humancorpus {
namespace {

bool is_space(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alnum(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_unicode_punct(char32_t cp) noexcept {
  switch (cp) {
    case 0x00A1: case 0x00AB: case 0x00BB: case 0x00BF:
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015:
    case 0x2018: case 0x2019: case 0x201A: case 0x201C: case 0x201D: case 0x201E:
    case 0x2026: case 0x3001: case 0x3002: case 0xFF0C: case 0xFF0E:
      return true;
    default:
      return false;
  }
}

// Length of the UTF-8 sequence starting with lead byte c (1 for invalid).
std::size_t utf8_len(unsigned char c) noexcept {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

char32_t decode(std::string_view s, std::size_t pos, std::size_t len) noexcept {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[pos + i]); };
  switch (len) {
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4:
      return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) |
             (b(3) & 0x3F);
    default: return b(0);
  }
}

// Byte length of a strippable character at the front of `s`, or 0.
std::size_t strip_front(std::string_view s) noexcept {
  const auto c = static_cast<unsigned char>(s.front());
  if (c < 0x80) return is_alnum(c) ? 0 : 1;
  const std::size_t len = utf8_len(c);
  if (len > s.size()) return 0;
  return is_unicode_punct(decode(s, 0, len)) ? len : 0;
}

// Byte length of a strippable character at the back of `s`, or 0.
std::size_t strip_back(std::string_view s) noexcept {
  const auto c = static_cast<unsigned char>(s.back());
  if (c < 0x80) return is_alnum(c) ? 0 : 1;
  std::size_t start = s.size() - 1;
  while (start > 0 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80 &&
         s.size() - start < 4) {
    --start;
  }
  const std::size_t len = utf8_len(static_cast<unsigned char>(s[start]));
  if (start + len != s.size()) return 0;
  return is_unicode_punct(decode(s, start, len)) ? len : 0;
}

template <class Fn>
void for_each_token(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view piece = text.substr(i, j - i);
    i = j;
    while (!piece.empty()) {
      const std::size_t k = strip_front(piece);
      if (k == 0) break;
      piece.remove_prefix(k);
    }
    while (!piece.empty()) {
      const std::size_t k = strip_back(piece);
      if (k == 0) break;
      piece.remove_suffix(k);
    }
    if (!piece.empty()) fn(piece);
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Unambiguous key for a token window: each token length-prefixed.
void append_token(std::string& key, std::string_view token) {
  std::uint64_t len = token.size();
  do {
    unsigned char byte = len & 0x7F;
    len >>= 7;
    if (len) byte |= 0x80;
    key.push_back(static_cast<char>(byte));
  } while (len);
  key.append(token);
}

template <class Sink>
void for_each_ngram(const std::vector<std::string>& tokens, int n, Sink&& sink) {
  const auto width = static_cast<std::size_t>(n);
  if (tokens.size() < width) return;
  std::string key;
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < width; ++k) append_token(key, tokens[i + k]);
    sink(key);
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for_each_token(text, [&out](std::string_view t) { out.push_back(lower(t)); });
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  for_each_token(text, [&n](std::string_view) { ++n; });
  return n;
}

bool in_sample(std::uint64_t seed, std::string_view key, double pct) noexcept {
  if (pct >= 100.0) return true;
  return unit_hash(seed, key) * 100.0 < pct;
}

std::size_t unique_ngrams(std::span<const std::string> docs, int n,
                          double sample_pct, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  if (!(sample_pct > 0 && sample_pct <= 100)) {
    throw Error(ErrorCode::kInvalidArgument, "sample percentage must be in (0, 100]");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!in_sample(seed, std::to_string(i), sample_pct)) continue;
    for_each_ngram(tokenize(docs[i]), n, [&seen](const std::string& k) { seen.insert(k); });
  }
  return seen.size();
}

void HyperLogLog::add(std::string_view item) noexcept {
  const std::uint64_t h = splitmix64(fnv1a64(item));
  const std::size_t idx = h >> (64 - kPrecision);
  const std::uint64_t rest = (h << kPrecision) | (std::uint64_t{1} << (kPrecision - 1));
  const auto rank = static_cast<std::uint8_t>(std::countl_zero(rest) + 1);
  registers_[idx] = std::max(registers_[idx], rank);
}

void HyperLogLog::merge(const HyperLogLog& other) noexcept {
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    registers_[i] = std::max(registers_[i], other.registers_[i]);
  }
}

double HyperLogLog::estimate() const noexcept {
  const double m = static_cast<double>(registers_.size());
  double sum = 0;
  std::size_t zeros = 0;
  for (const auto r : registers_) {
    sum += std::ldexp(1.0, -static_cast<int>(r));
    if (r == 0) ++zeros;
  }
  const double alpha = 0.7213 / (1.0 + 1.079 / m);
  const double raw = alpha * m * m / sum;
  if (raw <= 2.5 * m && zeros > 0) {
    return m * std::log(m / static_cast<double>(zeros));  // linear counting
  }
  return raw;
}

TextStatsAccumulator::TextStatsAccumulator(int ngram_n, bool approximate)
    : n_(ngram_n), approximate_(approximate) {
  if (n_ < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  if (approximate_) sketch_ = std::make_unique<HyperLogLog>();
}

void TextStatsAccumulator::add(std::string_view text) {
  const auto tokens = tokenize(text);
  ++docs_;
  words_ += tokens.size();
  ++histogram_[tokens.size()];
  if (approximate_) {
    for_each_ngram(tokens, n_, [this](const std::string& k) { sketch_->add(k); });
  } else {
    for_each_ngram(tokens, n_, [this](const std::string& k) { exact_.insert(k); });
  }
}

void TextStatsAccumulator::merge(const TextStatsAccumulator& other) {
  if (other.n_ != n_ || other.approximate_ != approximate_) {
    throw Error(ErrorCode::kInvalidArgument, "cannot merge differently configured text stats");
  }
  docs_ += other.docs_;
  words_ += other.words_;
  for (const auto& [k, v] : other.histogram_) histogram_[k] += v;
  if (approximate_) {
    sketch_->merge(*other.sketch_);
  } else {
    exact_.insert(other.exact_.begin(), other.exact_.end());
  }
}

CorpusTextStats TextStatsAccumulator::finish() const {
  CorpusTextStats s;
  s.docs = docs_;
  s.total_words = words_;
  s.histogram = histogram_;
  s.ngram_n = n_;
  s.approximate = approximate_;
  s.unique_ngrams = approximate_ ? static_cast<std::uint64_t>(std::llround(sketch_->estimate()))
                                 : exact_.size();
  if (docs_ == 0) return s;
  s.mean_words = static_cast<double>(words_) / static_cast<double>(docs_);
  const std::uint64_t max_k = histogram_.rbegin()->first;
  s.cumulative.assign(max_k + 1, 0.0);
  std::uint64_t running = 0;
  auto it = histogram_.begin();
  for (std::uint64_t k = 0; k <= max_k; ++k) {
    if (it != histogram_.end() && it->first == k) {
      running += it->second;
      ++it;
    }
    s.cumulative[k] = static_cast<double>(running) / static_cast<double>(docs_);
  }
  return s;
}

CorpusTextStats corpus_stats(std::span<const SampleRecord> records, TextField field,
                             const StatsConfig& cfg, std::uint64_t seed, int jobs) {
  if (!(cfg.sample_pct > 0 && cfg.sample_pct <= 100)) {
    throw Error(ErrorCode::kInvalidArgument, "sample percentage must be in (0, 100]");
  }
  const std::size_t shards = static_cast<std::size_t>(std::max(jobs, 1));
  std::vector<TextStatsAccumulator> parts;
  parts.reserve(shards);
  for (std::size_t i = 0; i < shards; ++i) parts.emplace_back(cfg.ngram_n, cfg.approximate);
  const std::size_t block = (records.size() + shards - 1) / std::max<std::size_t>(shards, 1);
  parallel_for(
      shards, jobs,
      [&](std::size_t s) {
        const std::size_t begin = std::min(records.size(), s * block);
        const std::size_t end = std::min(records.size(), begin + block);
        for (std::size_t i = begin; i < end; ++i) {
          if (!in_sample(seed, records[i].id, cfg.sample_pct)) continue;
          parts[s].add(text_of(records[i], field));
        }
      },
      1);
  for (std::size_t s = 1; s < shards; ++s) parts[0].merge(parts[s]);
  CorpusTextStats out = parts[0].finish();
  out.sample_pct = cfg.sample_pct;
  return out;
}

CorpusTextStats corpus_stats(std::span<const SampleRecord> records,
                             std::string_view field, const StatsConfig& cfg,
                             std::uint64_t seed, int jobs) {
  const auto f = parse_text_field(field);
  if (!f) {
    throw Error(ErrorCode::kInvalidArgument, "unknown text field '" + std::string(field) + "'");
  }
  return corpus_stats(records, *f, cfg, seed, jobs);
}

std::vector<NgramCurvePoint> ngram_curve(std::span<const std::string> docs, int n,
                                         std::span<const double> percentages,
                                         std::uint64_t seed) {
  std::vector<NgramCurvePoint> out;
  out.reserve(percentages.size());
  for (const double pct : percentages) {
    out.push_back({pct, unique_ngrams(docs, n, pct, seed)});
  }
  return out;
}

Json to_json(const CorpusTextStats& s) {
  Json hist = Json::array();
  for (const auto& [k, v] : s.histogram) hist.push_back({k, v});
  return Json{{"docs", s.docs},
              {"total_words", s.total_words},
              {"mean_words", s.mean_words},
              {"word_count_histogram", std::move(hist)},
              {"max_words", s.cumulative.empty() ? 0 : s.cumulative.size() - 1},
              {"ngram_n", s.ngram_n},
              {"unique_ngrams", s.unique_ngrams},
              {"unique_ngrams_approximate", s.approximate},
              {"sample_pct", s.sample_pct}};
}

}  // namespace humancorpus
