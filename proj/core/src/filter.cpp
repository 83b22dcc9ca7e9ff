#include "humancorpus/filter.hpp"

#include <numeric>

#include "humancorpus/error.hpp"
#include "humancorpus/parallel.hpp"
#include "humancorpus/rng.hpp"
#include "humancorpus/text_stats.hpp"

namespace humancorpus {
namespace {

bool above(double value, double threshold, bool inclusive) noexcept {
  return inclusive ? value >= threshold : value > threshold;
}

std::string fold_for_match(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    // U+2018 / U+2019 (E2 80 98 / E2 80 99) fold to '
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x98 ||
         static_cast<unsigned char>(s[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : s[i]);
  }
  return out;
}

}  // namespace

GateOutcome face_gate(const SampleRecord& r, const PipelineConfig& cfg) {
  const bool inc = cfg.inclusive_gates;
  bool any_large = false;
  for (const auto& f : r.faces) {
    const bool large = above(f.bbox.w, cfg.min_face_side, inc) &&
                       above(f.bbox.h, cfg.min_face_side, inc);
    if (!large) continue;
    any_large = true;
    if (above(f.conf, cfg.min_face_conf, inc)) return std::nullopt;
  }
  return any_large ? RejectReason::kFaceLowConf : RejectReason::kFaceTooSmall;
}

AttributeGateResult attribute_gate(const SampleRecord& r, const PipelineConfig& cfg) {
  AttributeGateResult out;
  for (const auto& a : r.attrs) {
    if (above(a.p, cfg.min_attr_prob, cfg.inclusive_gates)) out.retained.push_back(a);
  }
  const auto kept = static_cast<double>(out.retained.size());
  if (!above(kept, cfg.min_valid_attrs, cfg.inclusive_gates)) {
    out.outcome = RejectReason::kTooFewAttrs;
  }
  return out;
}

bool detect_refusal(std::string_view text, std::span<const std::string> patterns) {
  if (patterns.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "refusal pattern list is empty");
  }
  if (text.empty()) return false;
  const std::string hay = fold_for_match(text);
  for (const auto& p : patterns) {
    if (p.empty()) continue;
    if (hay.find(fold_for_match(p)) != std::string::npos) return true;
  }
  return false;
}

GateOutcome short_text_filter(std::string_view text, int min_words) {
  if (static_cast<long long>(word_count(text)) < min_words) return RejectReason::kShortText;
  return std::nullopt;
}

std::vector<SampleRecord> sample_inspection(std::span<const SampleRecord> manifest,
                                            std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto idx = sample_indices(manifest.size(), n, rng);
  std::vector<SampleRecord> out;
  out.reserve(n);
  for (const auto i : idx) out.push_back(manifest[i]);
  return out;
}

void FilterReport::merge(const FilterReport& other) {
  input_ += other.input_;
  passed_ += other.passed_;
  for (std::size_t i = 0; i < rejected_.size(); ++i) rejected_[i] += other.rejected_[i];
}

std::uint64_t FilterReport::rejected_total() const noexcept {
  return std::accumulate(rejected_.begin(), rejected_.end(), std::uint64_t{0});
}

Json to_json(const FilterReport& report) {
  Json rejected = Json::object();
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    const auto r = static_cast<RejectReason>(i);
    rejected[std::string(to_string(r))] = report.rejected(r);
  }
  return Json{{"input", report.input()},
              {"passed", report.passed()},
              {"rejected_total", report.rejected_total()},
              {"rejected", std::move(rejected)}};
}

SampleRecord apply_gates(SampleRecord r, const PipelineConfig& cfg, const FilterPlan& plan) {
  if (r.rejected()) return r;
  if (plan.faces) {
    if (const auto why = face_gate(r, cfg)) {
      r.reject(*why);
      return r;
    }
    r.advance_to(Stage::kFacePass);
  }
  if (plan.attributes) {
    auto gate = attribute_gate(r, cfg);
    if (gate.outcome) {
      r.reject(*gate.outcome);
      return r;
    }
    r.attrs = std::move(gate.retained);
    r.advance_to(Stage::kAttrPass);
  }
  if (plan.text_field) {
    const std::string& text = text_of(r, *plan.text_field);
    if (detect_refusal(text, cfg.refusal_patterns)) {
      r.reject(RejectReason::kRefusal);
      return r;
    }
    if (const auto why = short_text_filter(text, cfg.min_caption_words)) {
      r.reject(*why);
      return r;
    }
    if (r.status == Stage::kMerged) r.advance_to(Stage::kCleaned);
  }
  return r;
}

FilterResult run_filter(std::span<const SampleRecord> records, const PipelineConfig& cfg,
                        const FilterPlan& plan, int jobs) {
  std::vector<SampleRecord> gated(records.size());
  parallel_for(records.size(), jobs,
               [&](std::size_t i) { gated[i] = apply_gates(records[i], cfg, plan); });

  FilterResult out;
  for (auto& r : gated) {
    out.report.count_input();
    if (r.rejected()) {
      out.report.count_reject(*r.reason);
      out.rejected.push_back(std::move(r));
    } else {
      out.report.count_pass();
      out.passed.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace humancorpus
