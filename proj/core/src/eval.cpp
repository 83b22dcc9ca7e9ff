#include "humancorpus/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include "humancorpus/attributes.hpp"
#include "humancorpus/error.hpp"

namespace humancorpus {

namespace {

constexpr std::string_view kPrompt1 =
    "The following two sentences are descriptions of the same picture; give them a semantic "
    "similarity score out of 10. Provide your score in the format { score: value } and include "
    "an explanation immediately afterward: 1.<prediction> 2.<label>.";

constexpr std::string_view kPrompt2 =
    "Analyze the following two sentences that describe the same picture and determine whether "
    "the `prediction' has successfully expressed the content depicted in the `label', "
    "particularly focusing on details of the human face and descriptions of body postures and "
    "clothing. Score their semantic similarity out of a total of 10. Present your score in the "
    "format of {`score': value } and immediately explain the reason behind "
    "yourjudgment:1.<prediction>2.<label>.";

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string string_field(const Json& j, const char* key, std::size_t line, bool required = true) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw SchemaError(line, key, "missing");
    return {};
  }
  if (!it->is_string()) throw SchemaError(line, key, "must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw SchemaError(line, key, "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw SchemaError(line, key, "must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

BBox box_field(const Json& v, const char* key, std::size_t line) {
  if (!v.is_array() || v.size() != 4) throw SchemaError(line, key, "must be [x, y, w, h]");
  BBox b;
  double* dst[] = {&b.x, &b.y, &b.w, &b.h};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw SchemaError(line, key, "must be [x, y, w, h]");
    *dst[i] = v[i].get<double>();
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------- judge

std::string_view to_string(JudgeVariant v) noexcept { return v == JudgeVariant::kP1 ? "p1" : "p2"; }

std::optional<JudgeVariant> parse_judge_variant(std::string_view s) noexcept {
  const std::string l = lower(s);
  if (l == "p1" || l == "1") return JudgeVariant::kP1;
  if (l == "p2" || l == "2") return JudgeVariant::kP2;
  return std::nullopt;
}

std::string_view judge_template(JudgeVariant v) noexcept {
  return v == JudgeVariant::kP1 ? kPrompt1 : kPrompt2;
}

JudgePrompt build_judge_prompt(std::string_view prediction, std::string_view label,
                               JudgeVariant variant) {
  if (blank(prediction)) throw Error(ErrorCode::kInvalidArgument, "judge prediction is empty");
  if (blank(label)) throw Error(ErrorCode::kInvalidArgument, "judge label is empty");
  const std::string_view tmpl = judge_template(variant);
  const auto p = tmpl.find("<prediction>");
  const auto l = tmpl.find("<label>");
  std::string out;
  out.reserve(tmpl.size() + prediction.size() + label.size());
  out.append(tmpl.substr(0, p));
  out.append(prediction);
  out.append(tmpl.substr(p + 12, l - p - 12));
  out.append(label);
  out.append(tmpl.substr(l + 7));
  return {variant, std::string(prediction), std::string(label), std::move(out)};
}

JudgeScore parse_judge_score(std::string_view response) {
  static const std::regex re(
      R"(\{[^{}]*?(?:['"`]|‘|’|“|”)?\s*\bscore\b\s*(?:['"`]|‘|’|“|”)?\s*[:=]\s*(?:['"]|‘|’|“|”)?\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)))",
      std::regex::ECMAScript | std::regex::icase);
  JudgeScore s;
  s.raw = std::string(response);
  std::smatch m;
  if (!std::regex_search(s.raw, m, re)) return s;
  double v = std::strtod(m[1].str().c_str(), nullptr);
  if (!std::isfinite(v)) return s;
  if (v < 0 || v > 10) {
    v = std::clamp(v, 0.0, 10.0);
    s.clamped = true;
  }
  s.value = v;
  s.status = ParseStatus::kOk;
  return s;
}

CaptionPair caption_pair_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "not a JSON object");
  return {string_field(j, "id", line), string_field(j, "prediction", line),
          string_field(j, "label", line)};
}

JudgeReport summarize_judgments(JudgeVariant variant, std::vector<JudgeItem> results) {
  JudgeReport r;
  r.variant = variant;
  r.items = results.size();
  double sum = 0;
  for (const auto& item : results) {
    if (item.failure != LlmFailure::kNone) {
      ++r.request_failures;
    } else if (!item.score.ok()) {
      ++r.parse_failures;
    } else {
      ++r.scored;
      sum += item.score.value;
    }
  }
  if (r.scored == 0) {
    throw Error(ErrorCode::kLlmFailure, "no judge response could be scored (" +
                                            std::to_string(r.items) + " items)");
  }
  r.mean = sum / static_cast<double>(r.scored);
  r.results = std::move(results);
  return r;
}

Json to_json(const JudgeReport& r) {
  Json items = Json::array();
  for (const auto& it : r.results) {
    Json j{{"id", it.id}};
    if (it.failure != LlmFailure::kNone) {
      j["status"] = std::string("request_") + std::string(to_string(it.failure));
    } else if (it.score.ok()) {
      j["status"] = "ok";
      j["score"] = it.score.value;
      if (it.score.clamped) j["clamped"] = true;
    } else {
      j["status"] = std::string(to_string(RejectReason::kJudgeParseFail));
    }
    items.push_back(std::move(j));
  }
  return Json{{"variant", to_string(r.variant)},
              {"mean", r.mean},
              {"items", r.items},
              {"scored", r.scored},
              {"parse_failures", r.parse_failures},
              {"request_failures", r.request_failures},
              {"failure_rate", r.failure_rate()},
              {"results", std::move(items)}};
}

// ---------------------------------------------------------------- VQA

VqaItem vqa_item_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "not a JSON object");
  VqaItem item;
  item.id = string_field(j, "id", line);
  item.question = string_field(j, "question", line);
  if (j.contains("options") && !j["options"].is_null()) item.options = string_list(j, "options", line);
  item.gold = string_field(j, "gold", line);
  item.prediction = string_field(j, "prediction", line, false);
  if (j.contains("context") && !j["context"].is_null()) item.context = string_field(j, "context", line);
  return item;
}

namespace {

void check_options(std::span<const std::string> options) {
  if (options.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "closed-set item needs 4 options, has " + std::to_string(options.size()));
  }
  std::set<std::string> seen;
  for (const auto& o : options) {
    if (blank(o)) throw Error(ErrorCode::kInvalidArgument, "blank option text");
    if (!seen.insert(lower(trim(o))).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate option '" + o + "'");
    }
  }
}

int letter_index(char c) { return c >= 'A' && c <= 'D' ? c - 'A' : -1; }

}  // namespace

int gold_index(const VqaItem& item) {
  check_options(item.options);
  const std::string g = trim(item.gold);
  if (g.size() == 1 && letter_index(g[0]) >= 0) return letter_index(g[0]);
  if (g.size() == 3 && g[0] == '(' && g[2] == ')' && letter_index(g[1]) >= 0) {
    return letter_index(g[1]);
  }
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    if (lower(trim(item.options[i])) == lower(g)) return static_cast<int>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "gold '" + item.gold + "' is not among the options of '" +
                                               item.id + "'");
}

Choice extract_choice(std::string_view prediction, std::span<const std::string> options) {
  check_options(options);
  static const std::regex prefix(R"(^(?:the\s+)?(?:correct\s+)?(?:answer|option|choice)(?:\s+is)?\s*[:\-]?\s*)",
                                 std::regex::ECMAScript | std::regex::icase);
  std::string text = trim(prediction);
  if (text.empty()) return {};
  std::smatch m;
  if (std::regex_search(text, m, prefix)) text = text.substr(m.length(0));

  if (!text.empty() && letter_index(text[0]) >= 0 &&
      (text.size() == 1 || !std::isalnum(static_cast<unsigned char>(text[1])))) {
    return {ChoiceStatus::kChosen, letter_index(text[0])};
  }
  for (std::size_t i = 0; i + 2 < text.size(); ++i) {
    if (text[i] == '(' && text[i + 2] == ')' && letter_index(text[i + 1]) >= 0) {
      return {ChoiceStatus::kChosen, letter_index(text[i + 1])};
    }
  }
  const std::string hay = lower(text);
  int found = -1, hits = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (hay.find(lower(trim(options[i]))) != std::string::npos) {
      found = static_cast<int>(i);
      ++hits;
    }
  }
  if (hits == 1) return {ChoiceStatus::kChosen, found};
  if (hits > 1) return {ChoiceStatus::kAmbiguous, -1};
  return {};
}

AccuracyReport closed_vqa_accuracy(std::span<const VqaItem> items) {
  AccuracyReport r;
  for (const auto& item : items) {
    const int gold = gold_index(item);
    const Choice c = extract_choice(item.prediction, item.options);
    ++r.total;
    if (c.status == ChoiceStatus::kAmbiguous) ++r.ambiguous;
    if (c.status == ChoiceStatus::kUnanswered) ++r.unanswered;
    if (c.status == ChoiceStatus::kChosen && c.index == gold) ++r.correct;
  }
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

Json to_json(const AccuracyReport& r) {
  return Json{{"accuracy", r.accuracy},     {"correct", r.correct},
              {"total", r.total},           {"ambiguous", r.ambiguous},
              {"unanswered", r.unanswered}};
}

std::string contq_prompt(const VqaItem& item) {
  if (!item.context || blank(*item.context)) {
    throw Error(ErrorCode::kInvalidArgument, "item '" + item.id + "' has no context caption");
  }
  if (blank(item.question)) throw Error(ErrorCode::kInvalidArgument, "item '" + item.id + "' has no question");
  std::string out = "Context: " + trim(*item.context) + "\nQuestion: " + trim(item.question);
  if (item.closed()) {
    check_options(item.options);
    out += "\nOptions:";
    for (std::size_t i = 0; i < item.options.size(); ++i) {
      out += "\n(";
      out += static_cast<char>('A' + i);
      out += ") " + trim(item.options[i]);
    }
    out += "\nAnswer with the letter of the correct option.";
  }
  return out;
}

// ---------------------------------------------------------------- attributes

AttributeTally::AttributeTally(std::span<const std::string> queried) {
  if (queried.empty()) throw Error(ErrorCode::kInvalidArgument, "no queried attributes");
  std::set<std::string> seen;
  for (const auto& q : queried) {
    if (!parse_attribute(q)) throw Error(ErrorCode::kInvalidArgument, "unknown attribute '" + q + "'");
    if (!seen.insert(q).second) throw Error(ErrorCode::kInvalidArgument, "attribute '" + q + "' queried twice");
    queried_.push_back(q);
  }
  cells_.resize(queried_.size());
}

void AttributeTally::add(std::span<const std::string> predicted, std::span<const std::string> gold) {
  const auto to_set = [](std::span<const std::string> names) {
    std::set<std::string> s;
    for (const auto& n : names) {
      if (!parse_attribute(n)) throw Error(ErrorCode::kInvalidArgument, "unknown attribute '" + n + "'");
      s.insert(n);
    }
    return s;
  };
  const auto p = to_set(predicted);
  const auto g = to_set(gold);
  bool all = true;
  for (std::size_t i = 0; i < queried_.size(); ++i) {
    const bool pp = p.count(queried_[i]) > 0;
    const bool gg = g.count(queried_[i]) > 0;
    Cell& c = cells_[i];
    if (pp && gg) ++c.tp;
    else if (pp) ++c.fp;
    else if (gg) ++c.fn;
    else ++c.tn;
    all = all && pp == gg;
  }
  ++items_;
  if (all) ++exact_;
}

void AttributeTally::merge(const AttributeTally& other) {
  if (other.queried_ != queried_) throw Error(ErrorCode::kInvalidArgument, "attribute tallies differ");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].tp += other.cells_[i].tp;
    cells_[i].fp += other.cells_[i].fp;
    cells_[i].fn += other.cells_[i].fn;
    cells_[i].tn += other.cells_[i].tn;
  }
  items_ += other.items_;
  exact_ += other.exact_;
}

AttributeReport AttributeTally::finish() const {
  if (items_ == 0) throw Error(ErrorCode::kDegenerateInput, "no attribute items");
  AttributeReport r;
  r.items = items_;
  double f1_sum = 0;
  int f1_n = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    r.correct += c.tp + c.tn;
    r.decisions += c.tp + c.fp + c.fn + c.tn;
    r.per_attribute_accuracy.emplace_back(
        queried_[i], static_cast<double>(c.tp + c.tn) / static_cast<double>(items_));
    if (c.tp + c.fp + c.fn > 0) {
      f1_sum += 2.0 * c.tp / static_cast<double>(2 * c.tp + c.fp + c.fn);
      ++f1_n;
    }
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.decisions);
  r.exact_match = static_cast<double>(exact_) / static_cast<double>(items_);
  if (f1_n > 0) r.macro_f1 = f1_sum / f1_n;
  return r;
}

AttributeItem attribute_item_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "not a JSON object");
  return {string_field(j, "id", line), string_list(j, "predicted", line), string_list(j, "gold", line)};
}

AttributeReport attribute_accuracy(std::span<const std::vector<std::string>> predicted,
                                   std::span<const std::vector<std::string>> gold,
                                   std::span<const std::string> queried) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "predicted and gold item counts differ");
  }
  AttributeTally tally(queried);
  for (std::size_t i = 0; i < predicted.size(); ++i) tally.add(predicted[i], gold[i]);
  return tally.finish();
}

Json to_json(const AttributeReport& r) {
  Json per = Json::object();
  for (const auto& [name, acc] : r.per_attribute_accuracy) per[name] = acc;
  return Json{{"accuracy", r.accuracy},
              {"exact_match", r.exact_match},
              {"macro_f1", r.macro_f1 ? Json(*r.macro_f1) : Json()},
              {"items", r.items},
              {"decisions", r.decisions},
              {"correct", r.correct},
              {"per_attribute_accuracy", std::move(per)}};
}

// ---------------------------------------------------------------- grounding

double iou(const BBox& a, const BBox& b) noexcept {
  const double aw = std::max(a.w, 0.0), ah = std::max(a.h, 0.0);
  const double bw = std::max(b.w, 0.0), bh = std::max(b.h, 0.0);
  const double iw = std::min(a.x + aw, b.x + bw) - std::max(a.x, b.x);
  const double ih = std::min(a.y + ah, b.y + bh) - std::max(a.y, b.y);
  if (!(iw > 0) || !(ih > 0)) return 0.0;
  const double inter = iw * ih;
  const double uni = aw * ah + bw * bh - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

GroundingItem grounding_item_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "not a JSON object");
  GroundingItem item;
  item.id = string_field(j, "id", line);
  item.expression = string_field(j, "expression", line, false);
  if (!j.contains("gold")) throw SchemaError(line, "gold", "missing");
  item.gold = box_field(j["gold"], "gold", line);
  if (j.contains("prediction") && !j["prediction"].is_null()) {
    item.prediction = box_field(j["prediction"], "prediction", line);
  }
  return item;
}

GroundingReport grounding_accuracy(std::span<const GroundingItem> items, double threshold) {
  if (!(threshold > 0 && threshold <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "IoU threshold must lie in (0, 1]");
  }
  GroundingReport r;
  r.threshold = threshold;
  double iou_sum = 0;
  for (const auto& item : items) {
    if (!(item.gold.w > 0 && item.gold.h > 0)) {
      throw Error(ErrorCode::kInvalidArgument, "degenerate gold box for '" + item.id + "'");
    }
    ++r.total;
    if (!item.prediction) {
      ++r.missing;
      continue;
    }
    const double v = iou(item.gold, *item.prediction);
    iou_sum += v;
    if (v >= threshold) ++r.correct;
  }
  if (r.total > 0) {
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    r.mean_iou = iou_sum / static_cast<double>(r.total);
  }
  return r;
}

Json to_json(const GroundingReport& r) {
  return Json{{"accuracy", r.accuracy}, {"threshold", r.threshold}, {"correct", r.correct},
              {"total", r.total},       {"missing", r.missing},     {"mean_iou", r.mean_iou}};
}

// ---------------------------------------------------------------- preference

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kWin: return "win";
    case Verdict::kTie: return "tie";
    case Verdict::kLose: return "lose";
  }
  return "tie";
}

std::optional<Verdict> parse_verdict(std::string_view s) noexcept {
  const std::string l = lower(s);
  if (l == "win") return Verdict::kWin;
  if (l == "tie") return Verdict::kTie;
  if (l == "lose" || l == "loss") return Verdict::kLose;
  return std::nullopt;
}

PreferenceVote preference_vote_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "not a JSON object");
  PreferenceVote v;
  v.item = string_field(j, "item", line);
  v.rater = string_field(j, "rater", line);
  const auto verdict = parse_verdict(string_field(j, "verdict", line));
  if (!verdict) throw SchemaError(line, "verdict", "must be win, tie or lose");
  v.verdict = *verdict;
  return v;
}

PreferenceReport preference_tally(std::span<const PreferenceVote> votes) {
  if (votes.empty()) throw Error(ErrorCode::kDegenerateInput, "no preference votes");
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, std::array<std::uint64_t, 3>> per_item;
  std::array<std::uint64_t, 3> total{};
  for (const auto& v : votes) {
    if (!seen.emplace(v.item, v.rater).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate vote by '" + v.rater + "' on '" + v.item + "'");
    }
    const auto k = static_cast<std::size_t>(v.verdict);
    ++total[k];
    ++per_item[v.item][k];
  }
  PreferenceReport r;
  r.votes = votes.size();
  const double n = static_cast<double>(r.votes);
  r.win = static_cast<double>(total[0]) / n;
  r.tie = static_cast<double>(total[1]) / n;
  r.lose = static_cast<double>(total[2]) / n;
  for (const auto& [item, c] : per_item) {
    const auto top = *std::max_element(c.begin(), c.end());
    const auto leaders = std::count(c.begin(), c.end(), top);
    if (leaders > 1) {
      r.majority[item] = Verdict::kTie;
    } else {
      r.majority[item] = static_cast<Verdict>(std::max_element(c.begin(), c.end()) - c.begin());
    }
  }
  return r;
}

Json to_json(const PreferenceReport& r) {
  Json majority = Json::object();
  for (const auto& [item, v] : r.majority) majority[item] = to_string(v);
  return Json{{"votes", r.votes},
              {"win", r.win},
              {"tie", r.tie},
              {"lose", r.lose},
              {"majority", std::move(majority)}};
}

}  // namespace humancorpus
