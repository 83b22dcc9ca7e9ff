#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "humancorpus/attributes.hpp"
#include "humancorpus/rng.hpp"

namespace humancorpus {

// ---- phrase table -----------------------------------------------------------
//
// Each attribute maps to weighted clause templates. Templates use slot
// markers that are resolved against the subject's pronoun set:
//   {S} subject  {O} object  {P} possessive
//   {is} {has} {was} {looks} {wears} {appears} {seems} {does}  agreeing verbs
// Every template must contain at least one of {S}, {O}, {P}.

struct PhraseTemplate {
  std::string text;
  double weight = 1;
};

class PhraseTable {
 public:
  /// Throws Error(kGrammar) for a non-positive weight or a template without a
  /// subject slot or with an unknown marker.
  void add(Attribute a, std::string text, double weight);

  std::span<const PhraseTemplate> templates(Attribute a) const noexcept {
    return entries_[index_of(a)];
  }

  /// Ships 2-4 variants for each of the 40 attributes.
  static PhraseTable builtin();

 private:
  std::array<std::vector<PhraseTemplate>, kAttributeCount> entries_;
};

/// Lines of `Attribute Name | template | weight`; '#' comments and blank
/// lines are ignored. A missing weight defaults to 1.
PhraseTable parse_phrase_table(std::string_view text);

// ---- rules ------------------------------------------------------------------
//
// Rule files hold one production per line:
//   NONTERM -> sym sym ... @ weight
// Symbols that appear on some left-hand side are nonterminals; everything
// else is a terminal. "Quoted text" is always a single terminal. Directives:
//   %start NAME
//   %cluster NAME = Attribute, Attribute, ...
// Attribute-bound grammars use two special symbols: $CLUSTERS (only in start
// productions) expands to one sentence per cluster that has attributes, and
// $ATTRS (only in cluster productions) expands to that cluster's clauses.

struct RuleProduction {
  std::string lhs;
  std::vector<std::string> rhs;
  std::vector<bool> quoted;  // parallel to rhs
  double weight = 1;
  std::size_t line = 0;
};

struct RuleCluster {
  std::string name;
  std::vector<Attribute> members;
};

struct RuleSet {
  std::string start;
  std::vector<RuleProduction> productions;
  std::vector<RuleCluster> clusters;
};

RuleSet parse_rules(std::string_view text);
std::string_view builtin_rules() noexcept;
std::string_view builtin_phrases() noexcept;

// ---- grammar ----------------------------------------------------------------

struct GrammarSymbol {
  enum class Kind : std::uint8_t { kTerminal, kNonterminal, kAttrs, kClusters };
  Kind kind = Kind::kTerminal;
  int id = -1;  // terminal index or nonterminal id
};

struct GrammarProduction {
  std::vector<GrammarSymbol> rhs;
  double weight = 0;
  double probability = 0;
  double log_probability = 0;
};

class Grammar {
 public:
  struct Cluster {
    int nonterminal = -1;
    std::vector<Attribute> members;  // alphabetical by name
  };

  int start() const noexcept { return start_; }
  std::size_t nonterminal_count() const noexcept { return names_.size(); }
  std::optional<int> find(std::string_view name) const;
  const std::string& name(int nt) const { return names_.at(static_cast<std::size_t>(nt)); }
  std::span<const GrammarProduction> productions(int nt) const {
    return productions_.at(static_cast<std::size_t>(nt));
  }
  const std::string& terminal(int id) const {
    return terminals_.at(static_cast<std::size_t>(id));
  }

  bool attribute_bound() const noexcept { return attribute_bound_; }
  std::span<const Cluster> clusters() const noexcept { return clusters_; }
  /// Index into clusters(), or -1 for plain grammars.
  int cluster_of(Attribute a) const noexcept { return cluster_of_[index_of(a)]; }
  /// Nonterminal whose productions are the attribute's templates.
  int attribute_nonterminal(Attribute a) const noexcept {
    return attribute_nt_[index_of(a)];
  }

  /// Samples a production index of `nt` proportionally to its weight.
  std::size_t choose(int nt, Rng& rng) const;

 private:
  friend Grammar build_grammar(const PhraseTable&, const RuleSet&);
  friend Grammar build_plain_grammar(const RuleSet&);
  friend class GrammarBuilder;

  int start_ = -1;
  bool attribute_bound_ = false;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<GrammarProduction>> productions_;
  std::vector<std::vector<double>> cumulative_;  // per nonterminal
  std::vector<std::string> terminals_;
  std::vector<Cluster> clusters_;
  std::array<int, kAttributeCount> cluster_of_{};
  std::array<int, kAttributeCount> attribute_nt_{};
};

/// Validated attribute-bound grammar. Errors (Error(kGrammar)) name the
/// offending attribute or nonterminal: attribute without templates or
/// cluster, non-positive weight, non-terminating or unreachable nonterminal,
/// misplaced $ATTRS / $CLUSTERS.
Grammar build_grammar(const PhraseTable& table, const RuleSet& rules);
Grammar build_grammar(const PhraseTable& table, std::string_view rules_text);

/// Built-in phrase table and rules.
const Grammar& default_grammar();

/// Generic PCFG without attribute binding; $ATTRS / $CLUSTERS are rejected.
Grammar build_plain_grammar(const RuleSet& rules);
Grammar build_plain_grammar(std::string_view rules_text);

// ---- derivations ------------------------------------------------------------

struct DerivationStep {
  std::string nonterminal;
  std::size_t production = 0;
  friend bool operator==(const DerivationStep&, const DerivationStep&) = default;
};

/// Leftmost derivation, one step per expanded nonterminal.
using Derivation = std::vector<DerivationStep>;

/// Sum of log production probabilities; <= 0. Throws Error(kGrammar) for a
/// step naming an unknown nonterminal or production.
double derivation_logprob(const Derivation& derivation, const Grammar& grammar);

struct PlainSample {
  std::vector<std::string> yield;  // terminals in order
  Derivation derivation;
};

/// Samples a derivation rooted at `root` of a plain grammar. Throws
/// Error(kGrammar) if the expansion exceeds `max_steps`.
PlainSample sample_plain(const Grammar& grammar, std::string_view root, Rng& rng,
                         std::size_t max_steps = 100000);

}  // namespace humancorpus
