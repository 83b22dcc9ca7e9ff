#include "humancorpus/mixture.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "humancorpus/error.hpp"
#include "humancorpus/rng.hpp"

namespace humancorpus {

void validate(const MixtureSpec& spec) {
  std::set<std::string> seen;
  for (const auto& s : spec.sources) {
    if (s.name.empty()) throw Error(ErrorCode::kConfig, "mixture source without a name");
    if (!seen.insert(s.name).second) {
      throw Error(ErrorCode::kConfig, "duplicate mixture source '" + s.name + "'");
    }
  }
}

MixtureSpec parse_mixture_spec(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "mixture spec must be an object");
  MixtureSpec spec;
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) throw Error(ErrorCode::kConfig, "mixture seed must be >= 0");
    spec.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("allow_replacement"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ErrorCode::kConfig, "allow_replacement must be a bool");
    spec.allow_replacement = it->get<bool>();
  }
  auto sources = j.find("sources");
  if (sources == j.end() || !sources->is_array()) {
    throw Error(ErrorCode::kConfig, "mixture spec needs a 'sources' array");
  }
  for (const auto& s : *sources) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) {
      throw Error(ErrorCode::kConfig, "mixture source needs a string 'name'");
    }
    MixtureSource src;
    src.name = s["name"].get<std::string>();
    if (!s.contains("count") || !s["count"].is_number_integer()) {
      throw Error(ErrorCode::kConfig, "source '" + src.name + "' needs an integer 'count'");
    }
    if (s["count"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::kConfig, "source '" + src.name + "' has a negative count");
    }
    src.count = s["count"].get<std::uint64_t>();
    if (auto p = s.find("path"); p != s.end()) {
      if (!p->is_string()) throw Error(ErrorCode::kConfig, "source path must be a string");
      std::filesystem::path path = p->get<std::string>();
      if (!base_dir.empty() && path.is_relative()) path = std::filesystem::path(base_dir) / path;
      src.path = path.string();
    }
    spec.sources.push_back(std::move(src));
  }
  validate(spec);
  return spec;
}

MixtureSpec load_mixture_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open mixture spec '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, "mixture spec '" + path + "' is not JSON");
  return parse_mixture_spec(j, std::filesystem::path(path).parent_path().string());
}

Json to_json(const MixtureSpec& spec) {
  Json sources = Json::array();
  for (const auto& s : spec.sources) {
    sources.push_back(Json{{"name", s.name}, {"path", s.path}, {"count", s.count}});
  }
  return Json{{"seed", spec.seed},
              {"allow_replacement", spec.allow_replacement},
              {"sources", std::move(sources)}};
}

MixtureResult assemble_mixture(const MixtureSpec& spec,
                               const std::map<std::string, std::vector<std::string>>& manifests) {
  validate(spec);
  MixtureResult out;
  for (std::size_t s = 0; s < spec.sources.size(); ++s) {
    const auto& src = spec.sources[s];
    auto it = manifests.find(src.name);
    if (it == manifests.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no manifest for source '" + src.name + "'");
    }
    const auto& lines = it->second;
    Rng rng(derive_seed(spec.seed, src.name));
    if (src.count > lines.size() && !(spec.allow_replacement && !lines.empty())) {
      throw Error(ErrorCode::kShortfall, "source '" + src.name + "' has " +
                                             std::to_string(lines.size()) + " records, " +
                                             std::to_string(src.count) + " requested");
    }
    if (spec.allow_replacement) {
      for (std::uint64_t k = 0; k < src.count; ++k) {
        out.entries.push_back({s, static_cast<std::size_t>(rng.below(lines.size()))});
      }
    } else {
      for (std::size_t idx : sample_indices(lines.size(), src.count, rng)) {
        out.entries.push_back({s, idx});
      }
    }
    out.counts.emplace_back(src.name, src.count);
  }
  Rng rng(derive_seed(spec.seed, "\x1fshuffle"));
  shuffle(out.entries, rng);
  out.lines.reserve(out.entries.size());
  for (const auto& e : out.entries) {
    out.lines.push_back(manifests.at(spec.sources[e.source].name)[e.index]);
  }
  return out;
}

MixtureResult assemble_mixture(const MixtureSpec& spec) {
  validate(spec);
  std::map<std::string, std::vector<std::string>> manifests;
  for (const auto& src : spec.sources) {
    std::ifstream in(src.path);
    if (!in) {
      throw Error(ErrorCode::kIo, "cannot open manifest '" + src.path + "' for '" + src.name + "'");
    }
    auto& lines = manifests[src.name];
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      lines.push_back(std::move(line));
    }
  }
  return assemble_mixture(spec, manifests);
}

const std::vector<InstructionMixRow>& instruction_mix_rows() {
  static const std::vector<InstructionMixRow> rows{
      {"Image Caption", "HumanCaption-HQ", 311663},
      {"Image Caption", "ShareGPT4V", 48053},
      {"VQA", "LLaVA_Instruct_zh", 87350},
      {"VQA", "ShareGPT4V(SFT)", 362908},
      {"Grounding", "Ref3Rec", 187001},
      {"Grounding", "Rec3Ref", 187001},
      {"Grounding", "Shikra", 5576},
      {"Face Attribute", "CelebA", 50000},
      {"Face Attribute", "FaceCaptionA", 50000},
  };
  return rows;
}

std::vector<MixtureSource> instruction_mix_sources(double scale) {
  if (!(scale >= 0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "scale must be finite and >= 0");
  }
  std::vector<MixtureSource> out;
  for (const auto& row : instruction_mix_rows()) {
    const double scaled = std::floor(static_cast<double>(row.count) * scale + 0.5);
    out.push_back({std::string(row.dataset), {}, static_cast<std::uint64_t>(scaled)});
  }
  return out;
}

}  // namespace humancorpus
