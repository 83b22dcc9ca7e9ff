#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cli.hpp"
#include "humancorpus/config.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus::cli {

struct Options {
  std::string command;
  std::string input;
  std::string output = "-";
  std::string config;
  std::string report;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::vector<std::string> overrides;
  bool quiet = false;

  std::string plan = "selection";  // filter
  std::string field;               // filter, clean, stats
  std::string rejects;             // filter, clean
  std::string mock;                // rewrite, eval
  std::string curve;               // stats
  std::string csv_prefix;          // stats
  std::string image_root;          // quality
  std::string model;
  std::string embeddings;
  std::string prompt_embeddings;
  int bins = 0;
  std::string spec;                // mix
  std::string task;                // eval
  std::string variant = "p1";
  std::string attributes;
  double threshold = 0.5;
  std::size_t n = 10;              // inspect
};

/// Per-invocation I/O and bookkeeping shared by every subcommand.
class RunContext {
 public:
  RunContext(const Options& opt, PipelineConfig cfg, Streams io);

  const Options& opt() const noexcept { return opt_; }
  const PipelineConfig& cfg() const noexcept { return cfg_; }
  PipelineConfig& cfg() noexcept { return cfg_; }
  int jobs() const noexcept { return cfg_.jobs; }
  std::uint64_t seed() const noexcept { return cfg_.rng_seed; }

  /// Reads --input ("-" is stdin) and records its digest.
  std::string read_input();
  /// Reads an auxiliary input file and records its digest.
  std::string read_file(const std::string& path, const char* role);
  std::vector<SampleRecord> read_records();

  void write_output(const std::string& bytes);
  void write_file(const std::string& path, const std::string& bytes, const char* role);

  void log(const std::string& line);

  /// Writes the sidecar report with the command result.
  void finish(Json result);

 private:
  Options opt_;
  PipelineConfig cfg_;
  Streams io_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
};

std::string records_to_jsonl(const std::vector<SampleRecord>& records);

Json cmd_filter(RunContext& ctx);
Json cmd_synth(RunContext& ctx);
Json cmd_rewrite(RunContext& ctx);
Json cmd_merge(RunContext& ctx);
Json cmd_clean(RunContext& ctx);
Json cmd_stats(RunContext& ctx);
Json cmd_quality(RunContext& ctx);
Json cmd_mix(RunContext& ctx);
Json cmd_eval(RunContext& ctx);
Json cmd_inspect(RunContext& ctx);

}  // namespace humancorpus::cli
