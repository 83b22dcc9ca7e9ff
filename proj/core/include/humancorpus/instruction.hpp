#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/record.hpp"

namespace humancorpus {

inline constexpr std::string_view kImageToken = "<image>";

enum class TaskKind : std::uint8_t { kCaption, kVqa, kGrounding, kAttribute };

std::string_view to_string(TaskKind t) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view s) noexcept;

struct Turn {
  std::string role;  // system | user | assistant
  std::string content;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct InstructionRecord {
  std::string id;
  std::string image;
  std::vector<Turn> conversation;
  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

/// Builds the per-task conversation:
///   caption   - needs record.caption
///   vqa       - needs string extras "question" and "answer"
///   grounding - needs a face; the answer is the largest face box as
///               [x0, y0, x1, y1], normalized to [0, 1] when the image size
///               is known
///   attribute - needs attrs; the answer lists them in record order
/// Throws SchemaError naming the missing field. Any literal image token in
/// record text is removed so the placeholder stays unique.
InstructionRecord emit_instruction_record(const SampleRecord& record, TaskKind task);

/// Throws Error(kSchema) unless: an optional leading system turn, then
/// strictly alternating user/assistant starting with user, at least one of
/// each, and exactly one image token, located in the first user turn.
void validate(const InstructionRecord& r);

/// {"id", "image", "conversations": [{"from": "human"|"gpt"|"system", "value"}]}
Json to_json(const InstructionRecord& r);
InstructionRecord instruction_from_json(const Json& j, std::size_t line = 0);

}  // namespace humancorpus
