#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "humancorpus/record.hpp"

namespace humancorpus {

struct MixtureSource {
  std::string name;
  std::string path;
  std::uint64_t count = 0;
  friend bool operator==(const MixtureSource&, const MixtureSource&) = default;
};

struct MixtureSpec {
  std::vector<MixtureSource> sources;
  std::uint64_t seed = 0;
  bool allow_replacement = false;
  friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;
};

/// Throws Error(kConfig) on empty or duplicate names.
void validate(const MixtureSpec& spec);

/// {"seed": n, "allow_replacement": b, "sources": [{"name", "path", "count"}]}
/// Relative paths are resolved against `base_dir` when it is non-empty.
MixtureSpec parse_mixture_spec(const Json& j, const std::string& base_dir = {});
MixtureSpec load_mixture_spec(const std::string& path);
Json to_json(const MixtureSpec& spec);

struct MixtureEntry {
  std::size_t source = 0;  // index into spec.sources
  std::size_t index = 0;   // line index within that source
};

struct MixtureResult {
  std::vector<std::string> lines;  // verbatim source lines, shuffled
  std::vector<MixtureEntry> entries;  // parallel to lines
  std::vector<std::pair<std::string, std::uint64_t>> counts;  // spec order
};

/// Samples `count` lines per source (without replacement unless allowed)
/// with a per-source stream derived from (seed, name), then shuffles the
/// union with the spec seed. Throws Error(kShortfall) when a source is too
/// small and replacement is off.
MixtureResult assemble_mixture(const MixtureSpec& spec,
                               const std::map<std::string, std::vector<std::string>>& manifests);

/// Reads every source path (non-blank lines) and assembles.
MixtureResult assemble_mixture(const MixtureSpec& spec);

struct InstructionMixRow {
  std::string_view task;
  std::string_view dataset;
  std::uint64_t count;
};

/// Second-stage instruction data sizes per (task, dataset).
const std::vector<InstructionMixRow>& instruction_mix_rows();

/// The rows as mixture sources with counts scaled by `scale` (round half
/// up); paths are left empty.
std::vector<MixtureSource> instruction_mix_sources(double scale = 1.0);

}  // namespace humancorpus
