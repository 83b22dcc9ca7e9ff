#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "humancorpus/attributes.hpp"
#include "humancorpus/brisque.hpp"
#include "humancorpus/config.hpp"
#include "humancorpus/eval.hpp"
#include "humancorpus/filter.hpp"
#include "humancorpus/grammar.hpp"
#include "humancorpus/synth.hpp"
#include "humancorpus/text_stats.hpp"

namespace hc = humancorpus;

namespace {

std::vector<hc::SampleRecord> make_records(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> side(40, 200), conf(0.9, 1.0), p(0.5, 1.0);
  const auto attrs = hc::all_attributes();
  std::vector<hc::SampleRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.id = "b" + std::to_string(i);
    r.width = 640;
    r.height = 480;
    const double s = side(rng);
    r.faces.push_back({{10, 10, s, s}, conf(rng)});
    for (std::size_t a = 0; a < attrs.size(); a += 1 + rng() % 5) r.attrs.push_back({attrs[a], p(rng)});
  }
  return out;
}

hc::GrayImage noise(int w, int h) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(128, 25);
  hc::GrayImage img{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
  for (auto& v : img.pixels) v = std::clamp(d(rng), 0.0, 255.0);
  return img;
}

void BM_Filter(benchmark::State& state) {
  const auto records = make_records(static_cast<std::size_t>(state.range(0)));
  const hc::PipelineConfig cfg;
  for (auto _ : state) {
    auto res = hc::run_filter(records, cfg, hc::FilterPlan::selection(), 1);
    benchmark::DoNotOptimize(res.report);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Filter)->Arg(1000)->Arg(10000);

void BM_SynthesizeRaw(benchmark::State& state) {
  const auto& grammar = hc::default_grammar();
  std::vector<hc::AttributeLabel> labels;
  const auto attrs = hc::all_attributes();
  for (std::size_t a = 0; a < attrs.size(); a += 3) labels.push_back({attrs[a], 0.99});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto s = hc::synthesize_raw(labels, grammar, ++seed);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SynthesizeRaw);

void BM_Mscn(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = noise(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(hc::mscn(img));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Mscn)->Arg(256)->Arg(512);

void BM_BrisqueFeatures(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = noise(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(hc::brisque_features(img));
}
BENCHMARK(BM_BrisqueFeatures)->Arg(256)->Arg(512);

void BM_UniqueNgrams(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::vector<std::string> docs(static_cast<std::size_t>(state.range(0)));
  for (auto& d : docs) {
    for (int w = 0; w < 30; ++w) d += "w" + std::to_string(rng() % 500) + ' ';
  }
  for (auto _ : state) benchmark::DoNotOptimize(hc::unique_ngrams(docs, 4, 100, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UniqueNgrams)->Arg(1000)->Arg(10000);

void BM_ParseJudgeScore(benchmark::State& state) {
  const std::string response =
      "The prediction covers most details of the label but misses the hat. {'score': 7.5}";
  for (auto _ : state) benchmark::DoNotOptimize(hc::parse_judge_score(response));
}
BENCHMARK(BM_ParseJudgeScore);

}  // namespace

BENCHMARK_MAIN();
