#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/config.hpp"
#include "humancorpus/grammar.hpp"
#include "humancorpus/llm_client.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

/// System + user messages for one rewrite; {raw} in the user template is
/// replaced by the raw text.
std::vector<ChatMessage> rewrite_messages(std::string_view raw_text,
                                          const RewritePromptConfig& prompt);

/// Rewrites one raw PCFG text. Inputs longer than max_input_chars fail with
/// kOversized without contacting the endpoint. Throws Error(kInvalidArgument)
/// on blank input.
LlmResult rewrite_caption(std::string_view raw_text, LlmClient& client,
                          const RewritePromptConfig& prompt, std::string_view key = {});

struct RewriteReport {
  std::uint64_t input = 0;
  std::uint64_t skipped = 0;    // not at the synthesized stage
  std::uint64_t attempted = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t refused = 0;     // rejected: refusal
  std::uint64_t empty = 0;       // rejected: short_text
  std::uint64_t timed_out = 0;   // left at synthesized
  std::uint64_t transport_failed = 0;
  std::uint64_t oversized = 0;
  std::uint64_t requests = 0;    // endpoint calls including retries
  int peak_in_flight = 0;
  std::vector<std::string> failed_ids;  // timeouts, transport errors, oversized

  /// input == skipped + attempted and attempted == sum of outcomes.
  bool consistent() const noexcept;
};

Json to_json(const RewriteReport& r);

/// Rewrites every record at the synthesized stage in place. Successes move to
/// rewritten; refusals and empty answers are rejected; timeouts, transport
/// failures and oversized inputs keep their stage and are listed in the
/// report. Up to `jobs` records are worked at once; the client bounds the
/// requests actually in flight.
RewriteReport rewrite_records(std::span<SampleRecord> records, LlmClient& client,
                              const RewritePromptConfig& prompt, int jobs);

/// attr_pass -> synthesized: fills facial_raw from the retained attributes
/// using a per-record seed derived from (seed, id). Other stages pass through.
void synthesize_record(SampleRecord& record, const Grammar& grammar, std::uint64_t seed,
                       PronounFallback fallback);

/// rewritten -> merged: caption = global caption + connective + facial
/// caption. Throws Error(kSchema) when the global caption is missing.
void merge_record(SampleRecord& record, std::string_view connective);

}  // namespace humancorpus
