#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "humancorpus/attributes.hpp"

namespace humancorpus {

using Json = nlohmann::ordered_json;

/// Axis-aligned box in pixels: top-left corner plus extent.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const noexcept { return w * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct FaceDetection {
  BBox bbox;
  double conf = 0;
  friend bool operator==(const FaceDetection&, const FaceDetection&) = default;
};

struct AttributeLabel {
  Attribute name{};
  double p = 0;
  friend bool operator==(const AttributeLabel&, const AttributeLabel&) = default;
};

// Pipeline position of a record. Declaration order is the only legal direction
// of travel; kRejected is terminal.
enum class Stage : std::uint8_t {
  kRaw,
  kFacePass,
  kAttrPass,
  kSynthesized,
  kRewritten,
  kMerged,
  kCleaned,
  kRejected,
};

enum class RejectReason : std::uint8_t {
  kFaceTooSmall,
  kFaceLowConf,
  kTooFewAttrs,
  kShortText,
  kRefusal,
  kJudgeParseFail,
};

inline constexpr std::size_t kRejectReasonCount = 6;

std::string_view to_string(Stage s) noexcept;
std::string_view to_string(RejectReason r) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;
std::optional<RejectReason> parse_reject_reason(std::string_view s) noexcept;

/// One image-text unit flowing through the pipeline.
struct SampleRecord {
  std::string id;
  std::string image_ref;
  std::int64_t width = 0;   // 0 when unknown
  std::int64_t height = 0;  // 0 when unknown
  std::vector<FaceDetection> faces;
  std::vector<AttributeLabel> attrs;
  std::string source_text;
  std::string global_caption;
  std::string facial_raw;
  std::string facial_caption;
  std::string caption;
  Stage status = Stage::kRaw;
  std::optional<RejectReason> reason;
  Json extra = Json::object();  // unknown input fields, preserved in order

  bool rejected() const noexcept { return status == Stage::kRejected; }

  /// Moves status forward to `next`. No-op when already at or past it.
  /// Throws when the record is rejected and `next` is not.
  void advance_to(Stage next);

  /// Terminal transition carrying a machine-readable reason.
  void reject(RejectReason why);

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

enum class TextField : std::uint8_t {
  kSourceText,
  kGlobalCaption,
  kFacialRaw,
  kFacialCaption,
  kCaption,
};

std::optional<TextField> parse_text_field(std::string_view name) noexcept;
std::string_view to_string(TextField f) noexcept;
const std::string& text_of(const SampleRecord& r, TextField f) noexcept;

/// JSON mapping shared by the manifest reader and writer. `line` is used only
/// for error reporting.
Json to_json(const SampleRecord& r);
SampleRecord record_from_json(const Json& j, std::size_t line = 0);

}  // namespace humancorpus
