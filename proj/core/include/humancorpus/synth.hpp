#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "humancorpus/config.hpp"
#include "humancorpus/grammar.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

/// Pronoun set used consistently across one synthesized text.
struct SubjectForm {
  std::string subject;     // he / she / they
  std::string object;      // him / her / them
  std::string possessive;  // his / her / their
  bool plural_verbs = false;

  static SubjectForm male();
  static SubjectForm female();
  static SubjectForm neutral();

  /// "Male" among the labels selects male forms; otherwise the fallback.
  static SubjectForm from_labels(std::span<const AttributeLabel> labels,
                                 PronounFallback fallback);

  friend bool operator==(const SubjectForm&, const SubjectForm&) = default;
};

/// Resolves slot markers in one template. Throws Error(kGrammar) on an
/// unknown marker.
std::string realize_template(std::string_view tmpl, const SubjectForm& subject);

struct Synthesis {
  std::string text;
  Derivation derivation;
};

/// Raw facial description: one sentence per attribute cluster, clusters in
/// grammar order and attributes alphabetical within a cluster, each label's
/// clause exactly once. Pure function of (labels, grammar, seed, fallback).
/// Throws Error(kInvalidArgument) for empty labels.
Synthesis synthesize_raw(std::span<const AttributeLabel> labels, const Grammar& grammar,
                         std::uint64_t seed,
                         PronounFallback fallback = PronounFallback::kNeutral);

/// Global caption first, then the optional connective, then the facial
/// caption. Each segment is trimmed, loses any leading [.,;:] run, and ends
/// in exactly one terminal mark;
/// segments are joined by single spaces. Throws Error(kInvalidArgument) if
/// either caption is blank.
std::string merge_captions(std::string_view facial_caption,
                           std::string_view global_caption,
                           std::string_view connective = {});

/// Trim plus boundary repair used by merge_captions: strips trailing
/// whitespace and [.,;:] runs, then appends '.' unless the text ends in '!'
/// or '?'. Idempotent.
std::string repair_sentence_end(std::string_view text);

}  // namespace humancorpus
