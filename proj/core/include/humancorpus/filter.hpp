#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/config.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

/// nullopt means the record passes the gate.
using GateOutcome = std::optional<RejectReason>;

/// Passes iff at least one face is wider and taller than min_face_side and
/// more confident than min_face_conf. A failing record is face_too_small
/// unless some face met the size bar (then face_low_conf).
GateOutcome face_gate(const SampleRecord& r, const PipelineConfig& cfg);

struct AttributeGateResult {
  std::vector<AttributeLabel> retained;
  GateOutcome outcome;
};

/// Keeps labels with p above min_attr_prob; passes iff more than
/// min_valid_attrs survive.
AttributeGateResult attribute_gate(const SampleRecord& r, const PipelineConfig& cfg);

/// Case-insensitive substring match against any pattern. Typographic
/// apostrophes are folded to ASCII first. Throws if `patterns` is empty.
bool detect_refusal(std::string_view text, std::span<const std::string> patterns);

GateOutcome short_text_filter(std::string_view text, int min_words);

/// Uniform sample without replacement, in sampled order. Throws
/// Error(kInvalidArgument) when n exceeds the manifest size.
std::vector<SampleRecord> sample_inspection(std::span<const SampleRecord> manifest,
                                            std::size_t n, std::uint64_t seed);

class FilterReport {
 public:
  void count_input() { ++input_; }
  void count_pass() { ++passed_; }
  void count_reject(RejectReason r) { ++rejected_[static_cast<std::size_t>(r)]; }

  /// Associative and commutative.
  void merge(const FilterReport& other);

  std::uint64_t input() const noexcept { return input_; }
  std::uint64_t passed() const noexcept { return passed_; }
  std::uint64_t rejected(RejectReason r) const noexcept {
    return rejected_[static_cast<std::size_t>(r)];
  }
  std::uint64_t rejected_total() const noexcept;

  /// input == passed + sum of rejections.
  bool consistent() const noexcept { return input_ == passed_ + rejected_total(); }

  friend bool operator==(const FilterReport&, const FilterReport&) = default;

 private:
  std::uint64_t input_ = 0;
  std::uint64_t passed_ = 0;
  std::array<std::uint64_t, kRejectReasonCount> rejected_{};
};

Json to_json(const FilterReport& report);

/// Which gates run_filter applies. Text gates run only when `text_field` is
/// set: refusal detection first, then the short-text cutoff.
struct FilterPlan {
  bool faces = true;
  bool attributes = true;
  std::optional<TextField> text_field;

  static FilterPlan selection() { return {}; }
  static FilterPlan full(TextField f) { return {true, true, f}; }
  static FilterPlan cleaning(TextField f) { return {false, false, f}; }
};

struct FilterResult {
  std::vector<SampleRecord> passed;
  std::vector<SampleRecord> rejected;
  FilterReport report;
};

/// Applies one record's gates in order and returns the updated record.
/// Records that arrive already rejected are passed through unchanged.
SampleRecord apply_gates(SampleRecord r, const PipelineConfig& cfg, const FilterPlan& plan);

/// Gates every record (parallel over `jobs`), preserving input order within
/// each output stream. The result is independent of `jobs`.
FilterResult run_filter(std::span<const SampleRecord> records, const PipelineConfig& cfg,
                        const FilterPlan& plan = FilterPlan::selection(), int jobs = 1);

}  // namespace humancorpus
