#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/record.hpp"

namespace humancorpus {

struct LlmEndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "qwen-7b-chat";
  double temperature = 0.7;
  int max_in_flight = 4;
  int retry_budget = 3;
  int timeout_ms = 60000;
  int backoff_initial_ms = 250;
  int backoff_max_ms = 8000;
  std::string api_key_env;  // name of the env var holding a bearer token
  // Non-empty selects the offline transport: "echo" returns the last user
  // message, "upper" returns it upper-cased (handy for spotting rewrites).
  std::string mock;

  friend bool operator==(const LlmEndpointConfig&, const LlmEndpointConfig&) = default;
};

struct RewritePromptConfig {
  std::string version = "facial-rewrite-v1";
  std::string system =
      "You rewrite short attribute sentences about one person into a single "
      "fluent, natural paragraph. Keep every fact, merge repeated subjects, "
      "and do not add details that are not stated.";
  std::string user_template = "{raw}";  // {raw} is replaced by the PCFG text
  std::size_t max_input_chars = 16000;

  friend bool operator==(const RewritePromptConfig&, const RewritePromptConfig&) = default;
};

enum class PronounFallback : std::uint8_t { kNeutral, kFemale };

struct SynthConfig {
  PronounFallback pronoun_fallback = PronounFallback::kNeutral;
  std::string connective;     // inserted between global and facial caption
  std::string grammar_file;   // empty: built-in rules
  std::string phrases_file;   // empty: built-in phrase table

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct QualityConfig {
  double kernel_sigma = 7.0 / 6.0;
  int kernel_radius = 3;  // 7x7 window
  double c = 1.0;
  double alpha_min = 0.1;
  double alpha_max = 10.0;
  double logit_scale = 100.0;
  int bins = 10;
  std::string positive_prompt = "Good photo.";
  std::string negative_prompt = "Bad photo.";

  friend bool operator==(const QualityConfig&, const QualityConfig&) = default;
};

struct StatsConfig {
  int ngram_n = 4;
  double sample_pct = 100.0;
  bool approximate = false;

  friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

/// Every tunable of the pipeline. Numeric gates are strict (`>`) unless
/// `inclusive_gates` is set.
struct PipelineConfig {
  double min_face_side = 128;
  double min_face_conf = 0.98;
  double min_attr_prob = 0.85;
  int min_valid_attrs = 5;
  int min_caption_words = 10;
  bool inclusive_gates = false;
  std::vector<std::string> refusal_patterns = {
      "i cannot", "i can't", "i'm sorry", "as an ai", "unable to assist"};
  std::uint64_t rng_seed = 42;
  int jobs = 1;

  LlmEndpointConfig llm;
  RewritePromptConfig rewrite;
  SynthConfig synth;
  QualityConfig quality;
  StatsConfig stats;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws Error(kConfig) naming the first out-of-domain setting.
void validate(const PipelineConfig& cfg);

// Config files are a TOML subset: [section] headers, `key = value` lines,
// values are quoted strings, integers, floats, true/false or single-line
// arrays of strings. '#' starts a comment.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);
std::string format_config(const PipelineConfig& cfg);

/// Applies one "section.key=value" override using config-file value syntax;
/// bare words are accepted as strings.
void apply_override(PipelineConfig& cfg, std::string_view assignment);

Json to_json(const PipelineConfig& cfg);

}  // namespace humancorpus
