#include "humancorpus/error.hpp"
#include "humancorpus/eval.hpp"
#include "humancorpus/parallel.hpp"

namespace humancorpus {

JudgeReport judge_captions(std::span<const CaptionPair> pairs, LlmClient& client,
                           JudgeVariant variant, int jobs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no caption pairs to judge");
  // Build every prompt first so malformed pairs fail before any request.
  std::vector<JudgePrompt> prompts;
  prompts.reserve(pairs.size());
  for (const auto& p : pairs) prompts.push_back(build_judge_prompt(p.prediction, p.label, variant));

  std::vector<JudgeItem> results(pairs.size());
  parallel_for(
      pairs.size(), jobs,
      [&](std::size_t i) {
        JudgeItem& item = results[i];
        item.id = pairs[i].id;
        LlmResult r = client.complete({{"user", prompts[i].rendered}}, pairs[i].id, false);
        item.failure = r.failure;
        if (r.ok()) {
          item.score = parse_judge_score(r.text);
        } else {
          item.score.raw = r.detail;
        }
      },
      1);
  return summarize_judgments(variant, std::move(results));
}

JudgeReport judge_open_vqa(std::span<const VqaItem> items, LlmClient& client, int jobs) {
  std::vector<CaptionPair> pairs;
  pairs.reserve(items.size());
  for (const auto& item : items) {
    if (item.closed()) {
      throw Error(ErrorCode::kInvalidArgument, "item '" + item.id + "' has options; not open-set");
    }
    const std::string q = "Question: " + item.question + "\nAnswer: ";
    pairs.push_back({item.id, q + item.prediction, q + item.gold});
  }
  return judge_captions(pairs, client, JudgeVariant::kP1, jobs);
}

}  // namespace humancorpus
