#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "commands.hpp"
#include "humancorpus/error.hpp"
#include "humancorpus/manifest.hpp"

namespace humancorpus::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("-i,--input", o.input, "input file, '-' for stdin");
  sub->add_option("-o,--output", o.output, "output file, '-' for stdout")->capture_default_str();
  sub->add_option("-c,--config", o.config, "config file (default: $HUMANCORPUS_CONFIG)");
  sub->add_option("--seed", o.seed, "override run.seed");
  sub->add_option("-j,--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--set", o.overrides, "config override section.key=value (repeatable)");
  sub->add_option("--report", o.report, "report path (default: <output>.report.json)");
  sub->add_flag("-q,--quiet", o.quiet, "no progress lines on stderr");
}

struct Command {
  const char* name;
  const char* help;
  Json (*fn)(RunContext&);
  bool needs_input;
};

constexpr Command kCommands[] = {
    {"filter", "face and attribute gates (plus text gates with --plan)", cmd_filter, true},
    {"synth", "PCFG facial descriptions for attr_pass records", cmd_synth, true},
    {"rewrite", "LLM rewrite of synthesized descriptions", cmd_rewrite, true},
    {"merge", "global caption + facial caption", cmd_merge, true},
    {"clean", "refusal and short-text removal on merged captions", cmd_clean, true},
    {"stats", "word counts, cumulative curve and unique n-grams", cmd_stats, true},
    {"quality", "BRISQUE features/scores and CLIPIQA from embeddings", cmd_quality, true},
    {"mix", "instruction-mixture assembly from a JSON spec", cmd_mix, false},
    {"eval", "caption judging, VQA, attribute, grounding and preference scoring", cmd_eval, true},
    {"inspect", "stage summary and a seeded sample of records", cmd_inspect, true},
};

PipelineConfig effective_config(const Options& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("HUMANCORPUS_CONFIG"); env && *env) path = env;
  }
  PipelineConfig cfg = path.empty() ? PipelineConfig{} : load_config(path);
  for (const auto& s : o.overrides) apply_override(cfg, s);
  if (o.seed) cfg.rng_seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.mock.empty()) cfg.llm.mock = o.mock;
  validate(cfg);
  return cfg;
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(std::span<const std::string> args, Streams io) {
  Options o;
  CLI::App app{"humancorpus: face-centric caption corpus construction and evaluation",
               "humancorpus"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    subs.emplace_back(sub, &c);
  }
  auto* filter = app.get_subcommand("filter");
  filter->add_option("--plan", o.plan, "selection | full | cleaning")
      ->check(CLI::IsMember({"selection", "full", "cleaning"}))
      ->capture_default_str();
  filter->add_option("--field", o.field, "text field for full/cleaning plans (default caption)");
  filter->add_option("--rejects", o.rejects, "write rejected records here");
  auto* clean = app.get_subcommand("clean");
  clean->add_option("--field", o.field, "text field to clean (default caption)");
  clean->add_option("--rejects", o.rejects, "write rejected records here");
  app.get_subcommand("rewrite")->add_option("--mock", o.mock, "offline transport: echo | upper")
      ->check(CLI::IsMember({"echo", "upper"}));
  auto* stats = app.get_subcommand("stats");
  stats->add_option("--field", o.field, "text field (default caption)");
  stats->add_option("--curve", o.curve, "comma-separated sample percentages for an n-gram curve");
  stats->add_option("--csv-prefix", o.csv_prefix,
                    "also write <prefix>.cumulative.csv and, with --curve, <prefix>.ngrams.csv");
  auto* quality = app.get_subcommand("quality");
  quality->add_option("--image-root", o.image_root, "directory for relative image paths");
  quality->add_option("--model", o.model, "BRISQUE model JSON");
  quality->add_option("--embeddings", o.embeddings, "JSONL of {id, embedding} for CLIPIQA");
  quality->add_option("--prompt-embeddings", o.prompt_embeddings,
                      "JSON {positive: [...], negative: [...]}");
  quality->add_option("--bins", o.bins, "histogram bins (default quality.bins)")
      ->check(CLI::PositiveNumber);
  app.get_subcommand("mix")->add_option("--spec", o.spec, "mixture spec JSON")->required();
  auto* eval = app.get_subcommand("eval");
  eval->add_option("--task", o.task, "caption | vqa-closed | vqa-open | contq | attr | ground | pref")
      ->required()
      ->check(CLI::IsMember({"caption", "vqa-closed", "vqa-open", "contq", "attr", "ground", "pref"}));
  eval->add_option("--variant", o.variant, "judge prompt p1 | p2")
      ->check(CLI::IsMember({"p1", "p2"}))
      ->capture_default_str();
  eval->add_option("--threshold", o.threshold, "IoU threshold")->capture_default_str();
  eval->add_option("--attributes", o.attributes, "comma-separated queried attributes (default all)");
  eval->add_option("--mock", o.mock, "offline transport: echo | upper")
      ->check(CLI::IsMember({"echo", "upper"}));
  app.get_subcommand("inspect")->add_option("-n,--count", o.n, "records to sample")
      ->capture_default_str();

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
      std::none_of(std::begin(kCommands), std::end(kCommands),
                   [&](const Command& c) { return args[0] == c.name; })) {
    print_error(io.err, "usage", "unknown subcommand '" + args[0] + "'");
    io.err << app.help();
    return kExitUsage;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    io.out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(io.err, "usage", e.what());
    io.err << app.help();
    return kExitUsage;
  }

  const Command* chosen = nullptr;
  CLI::App* chosen_app = nullptr;
  for (auto& [sub, c] : subs) {
    if (sub->parsed()) {
      chosen = c;
      chosen_app = sub;
    }
  }
  o.command = chosen->name;
  if (chosen->needs_input && o.input.empty()) {
    print_error(io.err, "usage", "--input is required");
    io.err << chosen_app->help();
    return kExitUsage;
  }

  PipelineConfig cfg;
  try {
    cfg = effective_config(o);
  } catch (const Error& e) {
    print_error(io.err, to_string(e.code()), e.what());
    return kExitUsage;
  }

  try {
    RunContext ctx(o, std::move(cfg), io);
    Json result = chosen->fn(ctx);
    ctx.finish(std::move(result));
    return kExitOk;
  } catch (const Error& e) {
    print_error(io.err, to_string(e.code()), e.what());
    return e.code() == ErrorCode::kConfig ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    print_error(io.err, "internal", e.what());
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, Streams{std::cin, std::cout, std::cerr});
}

// ---------------------------------------------------------------------------

RunContext::RunContext(const Options& opt, PipelineConfig cfg, Streams io)
    : opt_(opt), cfg_(std::move(cfg)), io_(io) {}

std::string RunContext::read_input() {
  std::string bytes;
  if (opt_.input == "-") {
    bytes.assign(std::istreambuf_iterator<char>(io_.in), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(opt_.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open input '" + opt_.input + "'");
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  inputs_.push_back(Json{{"role", "input"},
                         {"path", opt_.input},
                         {"bytes", bytes.size()},
                         {"sha256", sha256_hex(bytes)}});
  return bytes;
}

std::string RunContext::read_file(const std::string& path, const char* role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + std::string(role) + " '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  inputs_.push_back(
      Json{{"role", role}, {"path", path}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  return bytes;
}

std::vector<SampleRecord> RunContext::read_records() {
  std::istringstream in(read_input());
  return read_manifest(in);
}

void RunContext::write_output(const std::string& bytes) {
  if (opt_.output == "-") {
    io_.out << bytes;
    io_.out.flush();
  } else {
    std::ofstream out(opt_.output, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write output '" + opt_.output + "'");
    out << bytes;
    if (!out) throw Error(ErrorCode::kIo, "write failed for '" + opt_.output + "'");
  }
  outputs_.push_back(Json{{"role", "output"},
                          {"path", opt_.output},
                          {"bytes", bytes.size()},
                          {"sha256", sha256_hex(bytes)}});
}

void RunContext::write_file(const std::string& path, const std::string& bytes, const char* role) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + std::string(role) + " '" + path + "'");
  out << bytes;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
  outputs_.push_back(
      Json{{"role", role}, {"path", path}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
}

void RunContext::log(const std::string& line) {
  if (!opt_.quiet) io_.err << "[" << opt_.command << "] " << line << '\n';
}

void RunContext::finish(Json result) {
  Json report{{"command", opt_.command},
              {"version", kVersion},
              {"seed", cfg_.rng_seed},
              {"jobs", cfg_.jobs},
              {"config", to_json(cfg_)},
              {"inputs", inputs_},
              {"outputs", outputs_},
              {"result", std::move(result)}};
  const std::string text = report.dump(2) + "\n";
  std::string path = opt_.report;
  if (path.empty() && opt_.output != "-") path = opt_.output + ".report.json";
  if (path.empty()) {
    io_.err << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write report '" + path + "'");
  out << text;
}

std::string records_to_jsonl(const std::vector<SampleRecord>& records) {
  std::ostringstream out;
  write_manifest(records, out);
  return out.str();
}

}  // namespace humancorpus::cli
