#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "humancorpus/attributes.hpp"
#include "humancorpus/brisque.hpp"
#include "humancorpus/captions.hpp"
#include "humancorpus/error.hpp"
#include "humancorpus/eval.hpp"
#include "humancorpus/filter.hpp"
#include "humancorpus/grammar.hpp"
#include "humancorpus/manifest.hpp"
#include "humancorpus/mixture.hpp"
#include "humancorpus/parallel.hpp"
#include "humancorpus/quality.hpp"
#include "humancorpus/text_stats.hpp"

namespace humancorpus::cli {

namespace {

TextField field_or(const std::string& name, TextField fallback) {
  if (name.empty()) return fallback;
  const auto f = parse_text_field(name);
  if (!f) throw Error(ErrorCode::kConfig, "unknown text field '" + name + "'");
  return *f;
}

std::vector<std::pair<std::size_t, Json>> parse_jsonl(const std::string& bytes) {
  std::vector<std::pair<std::size_t, Json>> out;
  std::istringstream in(bytes);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(n, "", "not valid JSON");
    out.emplace_back(n, std::move(j));
  }
  return out;
}

Json stage_counts(const std::vector<SampleRecord>& records) {
  std::map<std::string, std::uint64_t> stages;
  for (const auto& r : records) ++stages[std::string(to_string(r.status))];
  Json j = Json::object();
  for (const auto& [k, v] : stages) j[k] = v;
  return j;
}

Json split_output(RunContext& ctx, FilterResult& res) {
  ctx.write_output(records_to_jsonl(res.passed));
  if (!ctx.opt().rejects.empty()) {
    ctx.write_file(ctx.opt().rejects, records_to_jsonl(res.rejected), "rejects");
  }
  ctx.log(std::to_string(res.report.input()) + " in, " + std::to_string(res.report.passed()) +
          " passed, " + std::to_string(res.report.rejected_total()) + " rejected");
  return to_json(res.report);
}

}  // namespace

Json cmd_filter(RunContext& ctx) {
  const auto records = ctx.read_records();
  FilterPlan plan = FilterPlan::selection();
  if (ctx.opt().plan == "full") plan = FilterPlan::full(field_or(ctx.opt().field, TextField::kCaption));
  if (ctx.opt().plan == "cleaning") {
    plan = FilterPlan::cleaning(field_or(ctx.opt().field, TextField::kCaption));
  }
  FilterResult res = run_filter(records, ctx.cfg(), plan, ctx.jobs());
  return split_output(ctx, res);
}

Json cmd_clean(RunContext& ctx) {
  const auto records = ctx.read_records();
  FilterResult res = run_filter(
      records, ctx.cfg(), FilterPlan::cleaning(field_or(ctx.opt().field, TextField::kCaption)),
      ctx.jobs());
  return split_output(ctx, res);
}

Json cmd_synth(RunContext& ctx) {
  auto records = ctx.read_records();
  const SynthConfig& sc = ctx.cfg().synth;
  std::optional<Grammar> custom;
  if (!sc.grammar_file.empty() || !sc.phrases_file.empty()) {
    const PhraseTable phrases = sc.phrases_file.empty()
                                    ? PhraseTable::builtin()
                                    : parse_phrase_table(ctx.read_file(sc.phrases_file, "phrases"));
    const std::string rules = sc.grammar_file.empty()
                                  ? std::string(builtin_rules())
                                  : ctx.read_file(sc.grammar_file, "grammar");
    custom = build_grammar(phrases, rules);
  }
  const Grammar& grammar = custom ? *custom : default_grammar();
  parallel_for(records.size(), ctx.jobs(), [&](std::size_t i) {
    synthesize_record(records[i], grammar, ctx.seed(), sc.pronoun_fallback);
  });
  std::uint64_t done = 0;
  for (const auto& r : records) done += r.status == Stage::kSynthesized && !r.facial_raw.empty();
  ctx.write_output(records_to_jsonl(records));
  ctx.log(std::to_string(records.size()) + " in, " + std::to_string(done) + " synthesized");
  return Json{{"input", records.size()}, {"synthesized", done}, {"stages", stage_counts(records)}};
}

Json cmd_rewrite(RunContext& ctx) {
  auto records = ctx.read_records();
  LlmClient client(make_transport(ctx.cfg().llm), ctx.cfg().llm, ctx.cfg().refusal_patterns);
  const RewriteReport report = rewrite_records(records, client, ctx.cfg().rewrite, ctx.jobs());
  ctx.write_output(records_to_jsonl(records));
  ctx.log(std::to_string(report.attempted) + " attempted, " + std::to_string(report.succeeded) +
          " rewritten, " + std::to_string(report.failed_ids.size()) + " left for retry");
  Json j = to_json(report);
  j["prompt_version"] = ctx.cfg().rewrite.version;
  return j;
}

Json cmd_merge(RunContext& ctx) {
  auto records = ctx.read_records();
  std::uint64_t merged = 0;
  for (auto& r : records) {
    merge_record(r, ctx.cfg().synth.connective);
    merged += r.status == Stage::kMerged;
  }
  ctx.write_output(records_to_jsonl(records));
  ctx.log(std::to_string(records.size()) + " in, " + std::to_string(merged) + " merged");
  return Json{{"input", records.size()}, {"merged", merged}, {"stages", stage_counts(records)}};
}

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Json cmd_stats(RunContext& ctx) {
  const auto records = ctx.read_records();
  const TextField field = field_or(ctx.opt().field, TextField::kCaption);
  const CorpusTextStats stats = corpus_stats(records, field, ctx.cfg().stats, ctx.seed(), ctx.jobs());
  Json j = to_json(stats);
  j["field"] = to_string(field);
  if (!ctx.opt().curve.empty()) {
    std::vector<double> pcts;
    std::stringstream ss(ctx.opt().curve);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        pcts.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kConfig, "bad --curve percentage '" + tok + "'");
      }
    }
    std::vector<std::string> docs;
    for (const auto& r : records) {
      if (!r.rejected()) docs.push_back(text_of(r, field));
    }
    Json curve = Json::array();
    std::string csv = "pct,unique_ngrams\n";
    for (const auto& p : ngram_curve(docs, ctx.cfg().stats.ngram_n, pcts, ctx.seed())) {
      curve.push_back(Json{{"pct", p.pct}, {"unique", p.unique}});
      csv += format_number(p.pct) + "," + std::to_string(p.unique) + "\n";
    }
    j["ngram_curve"] = std::move(curve);
    if (!ctx.opt().csv_prefix.empty()) {
      ctx.write_file(ctx.opt().csv_prefix + ".ngrams.csv", csv, "ngram_csv");
    }
  }
  if (!ctx.opt().csv_prefix.empty()) {
    std::string csv = "words,cumulative_share\n";
    for (std::size_t k = 0; k < stats.cumulative.size(); ++k) {
      csv += std::to_string(k) + "," + format_number(stats.cumulative[k]) + "\n";
    }
    ctx.write_file(ctx.opt().csv_prefix + ".cumulative.csv", csv, "cumulative_csv");
  }
  ctx.write_output(j.dump(2) + "\n");
  ctx.log(std::to_string(stats.docs) + " docs, mean " + std::to_string(stats.mean_words) + " words");
  return j;
}

Json cmd_quality(RunContext& ctx) {
  const auto records = ctx.read_records();
  const QualityConfig& q = ctx.cfg().quality;
  std::filesystem::path root = ctx.opt().image_root;
  if (root.empty() && ctx.opt().input != "-") root = std::filesystem::path(ctx.opt().input).parent_path();

  std::optional<BrisqueModel> model;
  if (!ctx.opt().model.empty()) {
    model = BrisqueModel::from_json(Json::parse(ctx.read_file(ctx.opt().model, "model")));
  }
  std::map<std::string, std::vector<double>> embeddings;
  std::vector<double> pos, neg;
  const bool clip = !ctx.opt().embeddings.empty();
  if (clip != !ctx.opt().prompt_embeddings.empty()) {
    throw Error(ErrorCode::kConfig, "--embeddings and --prompt-embeddings go together");
  }
  if (clip) {
    for (auto& [line, j] : parse_jsonl(ctx.read_file(ctx.opt().embeddings, "embeddings"))) {
      if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("embedding")) {
        throw SchemaError(line, "embedding", "expected {\"id\", \"embedding\"}");
      }
      embeddings[j["id"].get<std::string>()] = j["embedding"].get<std::vector<double>>();
    }
    const Json p = Json::parse(ctx.read_file(ctx.opt().prompt_embeddings, "prompt_embeddings"));
    pos = p.at("positive").get<std::vector<double>>();
    neg = p.at("negative").get<std::vector<double>>();
  }

  BrisqueParams bp;
  bp.mscn = {q.kernel_sigma, q.kernel_radius, q.c};
  bp.fit.alpha_min = q.alpha_min;
  bp.fit.alpha_max = q.alpha_max;

  struct Row {
    Json out;
    std::optional<double> brisque, clipiqa;
    std::string error;
  };
  std::vector<Row> rows(records.size());
  parallel_for(
      records.size(), ctx.jobs(),
      [&](std::size_t i) {
        const SampleRecord& r = records[i];
        Row& row = rows[i];
        row.out = Json{{"id", r.id}};
        try {
          if (r.image_ref.empty()) throw Error(ErrorCode::kSchema, "record has no image");
          std::filesystem::path path = r.image_ref;
          if (path.is_relative() && !root.empty()) path = root / path;
          const auto features = brisque_features(load_any_image(path.string()), bp);
          row.out["brisque_features"] = features;
          if (model) {
            row.brisque = model->score(features);
            row.out["brisque"] = *row.brisque;
          }
          if (clip) {
            auto it = embeddings.find(r.id);
            if (it == embeddings.end()) throw Error(ErrorCode::kSchema, "no embedding for record");
            row.clipiqa = clipiqa_score(it->second, pos, neg, q.logit_scale);
            row.out["clipiqa"] = *row.clipiqa;
          }
        } catch (const Error& e) {
          row.error = e.what();
        }
      },
      1);

  std::string body;
  Json failures = Json::array();
  std::vector<double> bscores, cscores;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      failures.push_back(Json{{"id", row.out["id"]}, {"error", row.error}});
      continue;
    }
    body += row.out.dump() + "\n";
    if (row.brisque) bscores.push_back(*row.brisque);
    if (row.clipiqa) cscores.push_back(*row.clipiqa);
  }
  ctx.write_output(body);
  const int bins = ctx.opt().bins > 0 ? ctx.opt().bins : q.bins;
  Json result{{"input", records.size()},
              {"scored", records.size() - failures.size()},
              {"failures", failures}};
  if (!bscores.empty()) {
    result["brisque_histogram"] = to_json(score_histogram(bscores, equal_width_edges(bscores, bins)));
  }
  if (!cscores.empty()) {
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[i] = static_cast<double>(i) / bins;
    result["clipiqa_histogram"] = to_json(score_histogram(cscores, edges));
  }
  ctx.log(std::to_string(records.size()) + " images, " + std::to_string(failures.size()) +
          " failed");
  return result;
}

Json cmd_mix(RunContext& ctx) {
  const std::string spec_path = ctx.opt().spec;
  MixtureSpec spec = parse_mixture_spec(Json::parse(ctx.read_file(spec_path, "spec")),
                                        std::filesystem::path(spec_path).parent_path().string());
  if (ctx.opt().seed) spec.seed = *ctx.opt().seed;
  std::map<std::string, std::vector<std::string>> manifests;
  for (const auto& src : spec.sources) {
    std::istringstream in(ctx.read_file(src.path, "source"));
    auto& lines = manifests[src.name];
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(std::move(line));
    }
  }
  const MixtureResult res = assemble_mixture(spec, manifests);
  std::string body;
  for (const auto& l : res.lines) body += l + "\n";
  ctx.write_output(body);
  Json counts = Json::object();
  for (const auto& [name, n] : res.counts) counts[name] = n;
  ctx.log(std::to_string(res.lines.size()) + " records from " +
          std::to_string(spec.sources.size()) + " sources");
  return Json{{"spec", to_json(spec)}, {"total", res.lines.size()}, {"counts", counts}};
}

Json cmd_eval(RunContext& ctx) {
  const std::string& task = ctx.opt().task;
  const auto items = parse_jsonl(ctx.read_input());
  Json result;
  if (task == "caption" || task == "vqa-open") {
    LlmClient client(make_transport(ctx.cfg().llm), ctx.cfg().llm, ctx.cfg().refusal_patterns);
    if (task == "caption") {
      std::vector<CaptionPair> pairs;
      for (const auto& [line, j] : items) pairs.push_back(caption_pair_from_json(j, line));
      result = to_json(judge_captions(pairs, client, *parse_judge_variant(ctx.opt().variant),
                                      ctx.jobs()));
    } else {
      std::vector<VqaItem> vqa;
      for (const auto& [line, j] : items) vqa.push_back(vqa_item_from_json(j, line));
      result = to_json(judge_open_vqa(vqa, client, ctx.jobs()));
    }
  } else if (task == "vqa-closed") {
    std::vector<VqaItem> vqa;
    for (const auto& [line, j] : items) vqa.push_back(vqa_item_from_json(j, line));
    result = to_json(closed_vqa_accuracy(vqa));
  } else if (task == "contq") {
    std::vector<VqaItem> vqa;
    for (const auto& [line, j] : items) vqa.push_back(vqa_item_from_json(j, line));
    std::string body;
    bool scorable = !vqa.empty();
    for (const auto& v : vqa) {
      body += Json{{"id", v.id}, {"prompt", contq_prompt(v)}}.dump() + "\n";
      scorable = scorable && v.closed() && !v.prediction.empty();
    }
    ctx.write_output(body);
    result = Json{{"prompts", vqa.size()}};
    if (scorable) result["accuracy"] = to_json(closed_vqa_accuracy(vqa));
    result["task"] = task;
    result["items"] = items.size();
    ctx.log(task + ": " + std::to_string(items.size()) + " prompts");
    return result;
  } else if (task == "attr") {
    std::vector<std::string> queried;
    if (ctx.opt().attributes.empty()) {
      for (auto a : all_attributes()) queried.emplace_back(attribute_name(a));
    } else {
      std::stringstream ss(ctx.opt().attributes);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        const auto b = tok.find_first_not_of(' ');
        const auto e = tok.find_last_not_of(' ');
        if (b != std::string::npos) queried.push_back(tok.substr(b, e - b + 1));
      }
    }
    AttributeTally tally(queried);
    for (const auto& [line, j] : items) {
      const AttributeItem item = attribute_item_from_json(j, line);
      tally.add(item.predicted, item.gold);
    }
    result = to_json(tally.finish());
  } else if (task == "ground") {
    std::vector<GroundingItem> g;
    for (const auto& [line, j] : items) g.push_back(grounding_item_from_json(j, line));
    result = to_json(grounding_accuracy(g, ctx.opt().threshold));
  } else {
    std::vector<PreferenceVote> votes;
    for (const auto& [line, j] : items) votes.push_back(preference_vote_from_json(j, line));
    result = to_json(preference_tally(votes));
  }
  result["task"] = task;
  result["items"] = items.size();
  ctx.write_output(result.dump(2) + "\n");
  ctx.log(task + ": " + std::to_string(items.size()) + " items");
  return result;
}

Json cmd_inspect(RunContext& ctx) {
  const auto records = ctx.read_records();
  const std::size_t n = std::min(ctx.opt().n, records.size());
  const auto sample = sample_inspection(records, n, ctx.seed());
  ctx.write_output(records_to_jsonl(sample));
  std::map<std::string, std::uint64_t> reasons;
  for (const auto& r : records) {
    if (r.reason) ++reasons[std::string(to_string(*r.reason))];
  }
  Json rj = Json::object();
  for (const auto& [k, v] : reasons) rj[k] = v;
  ctx.log(std::to_string(records.size()) + " records, sampled " + std::to_string(n));
  return Json{{"records", records.size()}, {"sampled", n}, {"stages", stage_counts(records)},
              {"reasons", rj}};
}

}  // namespace humancorpus::cli
