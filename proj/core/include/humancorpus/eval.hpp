#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/llm_client.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

// ---------------------------------------------------------------- judge

enum class JudgeVariant : std::uint8_t { kP1, kP2 };

std::string_view to_string(JudgeVariant v) noexcept;
std::optional<JudgeVariant> parse_judge_variant(std::string_view s) noexcept;

/// The judge instruction with its <prediction> and <label> slots.
std::string_view judge_template(JudgeVariant v) noexcept;

struct JudgePrompt {
  JudgeVariant variant = JudgeVariant::kP1;
  std::string prediction;
  std::string label;
  std::string rendered;
};

/// Throws Error(kInvalidArgument) when either text is blank.
JudgePrompt build_judge_prompt(std::string_view prediction, std::string_view label,
                               JudgeVariant variant);

enum class ParseStatus : std::uint8_t { kOk, kParseFail };

struct JudgeScore {
  double value = 0;  // meaningful only when status == kOk
  std::string raw;
  ParseStatus status = ParseStatus::kParseFail;
  bool clamped = false;

  bool ok() const noexcept { return status == ParseStatus::kOk; }
};

/// First number bound to a "score" key inside braces, any quote style;
/// clamped to [0, 10].
JudgeScore parse_judge_score(std::string_view response);

struct CaptionPair {
  std::string id;
  std::string prediction;
  std::string label;
};

/// {"id", "prediction", "label"}
CaptionPair caption_pair_from_json(const Json& j, std::size_t line = 0);

struct JudgeItem {
  std::string id;
  JudgeScore score;
  LlmFailure failure = LlmFailure::kNone;
};

struct JudgeReport {
  JudgeVariant variant = JudgeVariant::kP1;
  double mean = 0;  // over parsed scores only
  std::uint64_t items = 0;
  std::uint64_t scored = 0;
  std::uint64_t parse_failures = 0;
  std::uint64_t request_failures = 0;
  std::vector<JudgeItem> results;

  std::uint64_t failures() const noexcept { return parse_failures + request_failures; }
  double failure_rate() const noexcept {
    return items == 0 ? 0.0 : static_cast<double>(failures()) / static_cast<double>(items);
  }
};

/// Mean of parsed scores; pure so the exclusion rule is testable offline.
/// Throws Error(kLlmFailure) when no item parsed.
JudgeReport summarize_judgments(JudgeVariant variant, std::vector<JudgeItem> results);

/// Scores every pair through the client. Unparseable or failed items are
/// counted, never averaged as zero.
JudgeReport judge_captions(std::span<const CaptionPair> pairs, LlmClient& client,
                           JudgeVariant variant, int jobs);

Json to_json(const JudgeReport& r);

// ---------------------------------------------------------------- VQA

struct VqaItem {
  std::string id;
  std::string question;
  std::vector<std::string> options;  // 4 for closed-set, empty for open-set
  std::string gold;                  // letter A-D or option text when closed
  std::string prediction;
  std::optional<std::string> context;

  bool closed() const noexcept { return !options.empty(); }
};

/// Throws SchemaError on missing or mistyped fields.
VqaItem vqa_item_from_json(const Json& j, std::size_t line = 0);

/// Index of the gold option. Throws Error(kInvalidArgument) unless there are
/// exactly four distinct non-blank options and gold names one of them.
int gold_index(const VqaItem& item);

enum class ChoiceStatus : std::uint8_t { kChosen, kAmbiguous, kUnanswered };

struct Choice {
  ChoiceStatus status = ChoiceStatus::kUnanswered;
  int index = -1;
};

/// Extraction order: a leading option letter A-D (after an optional
/// "answer:" prefix), then a parenthesized letter, then a unique
/// case-insensitive option-text match. Several distinct candidates at the
/// deciding rule make the answer ambiguous.
Choice extract_choice(std::string_view prediction, std::span<const std::string> options);

struct AccuracyReport {
  double accuracy = 0;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  std::uint64_t ambiguous = 0;
  std::uint64_t unanswered = 0;
};

AccuracyReport closed_vqa_accuracy(std::span<const VqaItem> items);
Json to_json(const AccuracyReport& r);

/// Context caption, then the question, then lettered options when closed.
/// Throws Error(kInvalidArgument) without a context.
std::string contq_prompt(const VqaItem& item);

/// Open-set answers judged with the first prompt, the question prepended to
/// both the prediction and the gold answer.
JudgeReport judge_open_vqa(std::span<const VqaItem> items, LlmClient& client, int jobs);

// ---------------------------------------------------------------- attributes

struct AttributeReport {
  double accuracy = 0;     // mean over (item, queried attribute) decisions
  double exact_match = 0;  // items with every queried decision right
  std::optional<double> macro_f1;  // over attributes with any positive
  std::uint64_t items = 0;
  std::uint64_t decisions = 0;
  std::uint64_t correct = 0;
  std::vector<std::pair<std::string, double>> per_attribute_accuracy;
};

/// Mergeable tally behind attribute_accuracy.
class AttributeTally {
 public:
  /// Throws Error(kInvalidArgument) on unknown or empty queried names.
  explicit AttributeTally(std::span<const std::string> queried);

  void add(std::span<const std::string> predicted, std::span<const std::string> gold);
  void merge(const AttributeTally& other);
  AttributeReport finish() const;

 private:
  struct Cell {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  };
  std::vector<std::string> queried_;
  std::vector<Cell> cells_;
  std::uint64_t items_ = 0;
  std::uint64_t exact_ = 0;
};

struct AttributeItem {
  std::string id;
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
};

/// {"id", "predicted": [names], "gold": [names]}
AttributeItem attribute_item_from_json(const Json& j, std::size_t line = 0);

AttributeReport attribute_accuracy(std::span<const std::vector<std::string>> predicted,
                                   std::span<const std::vector<std::string>> gold,
                                   std::span<const std::string> queried);
Json to_json(const AttributeReport& r);

// ---------------------------------------------------------------- grounding

double iou(const BBox& a, const BBox& b) noexcept;

struct GroundingItem {
  std::string id;
  std::string expression;
  BBox gold;
  std::optional<BBox> prediction;
};

GroundingItem grounding_item_from_json(const Json& j, std::size_t line = 0);

struct GroundingReport {
  double accuracy = 0;
  double threshold = 0.5;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  std::uint64_t missing = 0;
  double mean_iou = 0;
};

/// Fraction with iou >= threshold; missing predictions count wrong. Throws
/// Error(kInvalidArgument) for a threshold outside (0, 1] or a degenerate
/// gold box.
GroundingReport grounding_accuracy(std::span<const GroundingItem> items, double threshold = 0.5);
Json to_json(const GroundingReport& r);

// ---------------------------------------------------------------- preference

enum class Verdict : std::uint8_t { kWin, kTie, kLose };

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view s) noexcept;

struct PreferenceVote {
  std::string item;
  std::string rater;
  Verdict verdict = Verdict::kTie;
};

/// {"item", "rater", "verdict": "win" | "tie" | "lose"}
PreferenceVote preference_vote_from_json(const Json& j, std::size_t line = 0);

struct PreferenceReport {
  std::uint64_t votes = 0;
  double win = 0, tie = 0, lose = 0;
  std::map<std::string, Verdict> majority;
};

/// Throws Error(kDuplicateId) for a repeated (item, rater) pair and
/// Error(kDegenerateInput) with no votes. A split top count is a tie.
PreferenceReport preference_tally(std::span<const PreferenceVote> votes);
Json to_json(const PreferenceReport& r);

}  // namespace humancorpus
