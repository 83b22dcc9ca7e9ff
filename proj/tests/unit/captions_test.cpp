#include "humancorpus/captions.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "humancorpus/error.hpp"
#include "humancorpus/filter.hpp"
#include "humancorpus/synth.hpp"

namespace hc = humancorpus;

namespace {

hc::LlmEndpointConfig fast_config(int in_flight = 2) {
  hc::LlmEndpointConfig cfg;
  cfg.backoff_initial_ms = 0;
  cfg.backoff_max_ms = 0;
  cfg.max_in_flight = in_flight;
  return cfg;
}

std::vector<hc::SampleRecord> synthesized(std::size_t n) {
  const hc::PipelineConfig cfg;
  auto records = hc::run_filter(fixtures::raw_corpus(n, 21), cfg).passed;
  for (auto& r : records) {
    hc::synthesize_record(r, hc::default_grammar(), 42, cfg.synth.pronoun_fallback);
  }
  return records;
}

}  // namespace

TEST(RewriteMessages, SubstitutesRawText) {
  hc::RewritePromptConfig p;
  p.system = "sys";
  p.user_template = "Rewrite: {raw} please";
  const auto m = hc::rewrite_messages("he smiles", p);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].role, "system");
  EXPECT_EQ(m[1].content, "Rewrite: he smiles please");
  p.system.clear();
  EXPECT_EQ(hc::rewrite_messages("x", p).size(), 1u);
}

TEST(RewriteCaption, OversizedAndBlankInputs) {
  auto mock = std::make_shared<hc::MockChatTransport>();
  hc::LlmClient client(mock, fast_config(), {"i'm sorry"});
  hc::RewritePromptConfig p;
  p.max_input_chars = 5;
  const auto r = hc::rewrite_caption("far too long", client, p, "id");
  EXPECT_EQ(r.failure, hc::LlmFailure::kOversized);
  EXPECT_EQ(mock->calls(), 0u);
  EXPECT_THROW(hc::rewrite_caption("  ", client, p), hc::Error);
}

TEST(SynthesizeRecord, OnlyAttrPassRecordsChange) {
  auto records = synthesized(50);
  ASSERT_FALSE(records.empty());
  for (const auto& r : records) {
    EXPECT_EQ(r.status, hc::Stage::kSynthesized);
    EXPECT_FALSE(r.facial_raw.empty());
  }
  hc::SampleRecord raw;
  raw.id = "raw";
  hc::synthesize_record(raw, hc::default_grammar(), 1, hc::PronounFallback::kNeutral);
  EXPECT_EQ(raw.status, hc::Stage::kRaw);
  EXPECT_TRUE(raw.facial_raw.empty());
}

TEST(SynthesizeRecord, SeedDerivedPerId) {
  auto a = synthesized(30);
  auto b = synthesized(30);
  EXPECT_EQ(a, b);
}

TEST(RewriteRecords, EveryRecordAccounted) {
  auto records = synthesized(200);
  hc::SampleRecord untouched;
  untouched.id = "raw-one";
  records.push_back(untouched);

  auto mock = std::make_shared<hc::MockChatTransport>();
  mock->set_faults({0.2, 0.1, 0.05, 3, "I'm sorry, but I can't help with that."});
  mock->set_max_concurrency(3);
  hc::LlmClient client(mock, fast_config(3), {"i'm sorry", "i can't"});
  const auto report = hc::rewrite_records(records, client, {}, 8);

  EXPECT_TRUE(report.consistent());
  EXPECT_EQ(report.input, records.size());
  EXPECT_EQ(report.skipped, 1u);
  EXPECT_FALSE(mock->concurrency_violated());
  EXPECT_LE(report.peak_in_flight, 3);
  EXPECT_EQ(report.requests, mock->calls());

  std::size_t rewritten = 0, refused = 0, short_text = 0, still = 0;
  for (const auto& r : records) {
    if (r.status == hc::Stage::kRewritten) {
      ++rewritten;
      EXPECT_EQ(r.facial_caption, r.facial_raw);
    } else if (r.rejected()) {
      (r.reason == hc::RejectReason::kRefusal ? refused : short_text)++;
    } else if (r.status == hc::Stage::kSynthesized) {
      ++still;
    }
  }
  EXPECT_EQ(rewritten, report.succeeded);
  EXPECT_EQ(refused, report.refused);
  EXPECT_EQ(short_text, report.empty);
  EXPECT_EQ(still, report.failed_ids.size());
  EXPECT_EQ(still, report.timed_out + report.transport_failed + report.oversized);
  const auto j = hc::to_json(report);
  EXPECT_EQ(j["input"], records.size());
}

TEST(MergeRecord, BuildsCaptionAndNeedsGlobal) {
  hc::SampleRecord r;
  r.id = "m";
  r.global_caption = "A woman stands on a beach at sunset.";
  r.facial_caption = "She has wavy hair and is smiling.";
  r.status = hc::Stage::kRewritten;
  hc::merge_record(r, "");
  EXPECT_EQ(r.status, hc::Stage::kMerged);
  EXPECT_EQ(r.caption, "A woman stands on a beach at sunset. She has wavy hair and is smiling.");

  hc::SampleRecord bad = r;
  bad.status = hc::Stage::kRewritten;
  bad.global_caption.clear();
  try {
    hc::merge_record(bad, "");
    FAIL();
  } catch (const hc::Error& e) {
    EXPECT_EQ(e.code(), hc::ErrorCode::kSchema);
  }
}
