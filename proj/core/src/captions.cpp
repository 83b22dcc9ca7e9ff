#include "humancorpus/captions.hpp"

#include "humancorpus/error.hpp"
#include "humancorpus/parallel.hpp"
#include "humancorpus/rng.hpp"
#include "humancorpus/synth.hpp"

namespace humancorpus {

namespace {

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace

std::vector<ChatMessage> rewrite_messages(std::string_view raw_text,
                                          const RewritePromptConfig& prompt) {
  std::string user;
  std::string_view tmpl = prompt.user_template;
  for (;;) {
    const auto pos = tmpl.find("{raw}");
    if (pos == std::string_view::npos) {
      user.append(tmpl);
      break;
    }
    user.append(tmpl.substr(0, pos));
    user.append(raw_text);
    tmpl.remove_prefix(pos + 5);
  }
  std::vector<ChatMessage> messages;
  if (!prompt.system.empty()) messages.push_back({"system", prompt.system});
  messages.push_back({"user", std::move(user)});
  return messages;
}

LlmResult rewrite_caption(std::string_view raw_text, LlmClient& client,
                          const RewritePromptConfig& prompt, std::string_view key) {
  if (blank(raw_text)) throw Error(ErrorCode::kInvalidArgument, "raw text is empty");
  if (raw_text.size() > prompt.max_input_chars) {
    LlmResult r;
    r.failure = LlmFailure::kOversized;
    r.detail = "input has " + std::to_string(raw_text.size()) + " chars, limit " +
               std::to_string(prompt.max_input_chars);
    return r;
  }
  return client.complete(rewrite_messages(raw_text, prompt), key.empty() ? raw_text : key);
}

bool RewriteReport::consistent() const noexcept {
  return input == skipped + attempted &&
         attempted == succeeded + refused + empty + timed_out + transport_failed + oversized;
}

Json to_json(const RewriteReport& r) {
  return Json{{"input", r.input},
              {"skipped", r.skipped},
              {"attempted", r.attempted},
              {"succeeded", r.succeeded},
              {"refused", r.refused},
              {"empty", r.empty},
              {"timed_out", r.timed_out},
              {"transport_failed", r.transport_failed},
              {"oversized", r.oversized},
              {"requests", r.requests},
              {"peak_in_flight", r.peak_in_flight},
              {"failed_ids", r.failed_ids}};
}

RewriteReport rewrite_records(std::span<SampleRecord> records, LlmClient& client,
                              const RewritePromptConfig& prompt, int jobs) {
  std::vector<LlmResult> results(records.size());
  std::vector<char> attempted(records.size(), 0);
  parallel_for(
      records.size(), jobs,
      [&](std::size_t i) {
        const SampleRecord& rec = records[i];
        if (rec.status != Stage::kSynthesized || blank(rec.facial_raw)) return;
        attempted[i] = 1;
        results[i] = rewrite_caption(rec.facial_raw, client, prompt, rec.id);
      },
      1);

  RewriteReport report;
  report.input = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!attempted[i]) {
      ++report.skipped;
      continue;
    }
    ++report.attempted;
    SampleRecord& rec = records[i];
    const LlmResult& r = results[i];
    report.requests += static_cast<std::uint64_t>(r.attempts);
    switch (r.failure) {
      case LlmFailure::kNone:
        rec.facial_caption = r.text;
        rec.advance_to(Stage::kRewritten);
        ++report.succeeded;
        break;
      case LlmFailure::kRefusal:
        rec.reject(RejectReason::kRefusal);
        ++report.refused;
        break;
      case LlmFailure::kEmpty:
        rec.reject(RejectReason::kShortText);
        ++report.empty;
        break;
      case LlmFailure::kTimeout:
        ++report.timed_out;
        report.failed_ids.push_back(rec.id);
        break;
      case LlmFailure::kTransport:
        ++report.transport_failed;
        report.failed_ids.push_back(rec.id);
        break;
      case LlmFailure::kOversized:
        ++report.oversized;
        report.failed_ids.push_back(rec.id);
        break;
    }
  }
  report.peak_in_flight = client.peak_in_flight();
  return report;
}

void synthesize_record(SampleRecord& record, const Grammar& grammar, std::uint64_t seed,
                       PronounFallback fallback) {
  if (record.status != Stage::kAttrPass) return;
  Synthesis s = synthesize_raw(record.attrs, grammar, derive_seed(seed, record.id), fallback);
  record.facial_raw = std::move(s.text);
  record.advance_to(Stage::kSynthesized);
}

void merge_record(SampleRecord& record, std::string_view connective) {
  if (record.status != Stage::kRewritten) return;
  if (blank(record.global_caption)) {
    throw Error(ErrorCode::kSchema, "record '" + record.id + "' has no global_caption");
  }
  record.caption = merge_captions(record.facial_caption, record.global_caption, connective);
  record.advance_to(Stage::kMerged);
}

}  // namespace humancorpus
