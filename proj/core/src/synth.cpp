#include "humancorpus/synth.hpp"

#include <algorithm>
#include <array>

#include "humancorpus/error.hpp"

namespace humancorpus {
namespace {

struct VerbForm {
  std::string_view marker;
  std::string_view singular;
  std::string_view plural;
};

constexpr std::array<VerbForm, 8> kVerbs = {{
    {"is", "is", "are"},
    {"has", "has", "have"},
    {"was", "was", "were"},
    {"looks", "looks", "look"},
    {"wears", "wears", "wear"},
    {"appears", "appears", "appear"},
    {"seems", "seems", "seem"},
    {"does", "does", "do"},
}};

constexpr std::size_t kMaxSteps = 100000;

bool is_punct_piece(std::string_view piece) {
  return !piece.empty() && std::string_view(".,;:!?").find(piece.front()) != std::string_view::npos;
}

char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

// Joins pieces with single spaces, attaching punctuation to the left, then
// capitalizes the first letter of every sentence.
std::string render(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    if (p.empty()) continue;
    if (!out.empty() && !is_punct_piece(p)) out.push_back(' ');
    out += p;
  }
  bool sentence_start = true;
  for (char& c : out) {
    if (sentence_start && ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9'))) {
      c = upper(c);
      sentence_start = false;
    } else if (c == '.' || c == '!' || c == '?') {
      sentence_start = true;
    }
  }
  return out;
}

class Expander {
 public:
  Expander(const Grammar& g, std::span<const AttributeLabel> labels, const SubjectForm& subject,
           std::uint64_t seed)
      : g_(g), subject_(subject), rng_(seed) {
    for (const auto& l : labels) present_[index_of(l.name)] = true;
  }

  Synthesis run() {
    expand_nonterminal(g_.start(), -1);
    return {render(pieces_), std::move(derivation_)};
  }

 private:
  std::size_t step(int nt) {
    if (derivation_.size() >= kMaxSteps) {
      throw Error(ErrorCode::kGrammar, "synthesis exceeded " + std::to_string(kMaxSteps) +
                                           " derivation steps");
    }
    const std::size_t k = g_.choose(nt, rng_);
    derivation_.push_back({g_.name(nt), k});
    return k;
  }

  void expand_nonterminal(int nt, int cluster) {
    const std::size_t k = step(nt);
    for (const auto& s : g_.productions(nt)[k].rhs) expand_symbol(s, cluster);
  }

  void expand_symbol(const GrammarSymbol& s, int cluster) {
    switch (s.kind) {
      case GrammarSymbol::Kind::kTerminal:
        pieces_.push_back(g_.terminal(s.id));
        return;
      case GrammarSymbol::Kind::kNonterminal:
        expand_nonterminal(s.id, cluster);
        return;
      case GrammarSymbol::Kind::kClusters: {
        const auto clusters = g_.clusters();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
          if (has_members(clusters[c])) {
            expand_nonterminal(clusters[c].nonterminal, static_cast<int>(c));
          }
        }
        return;
      }
      case GrammarSymbol::Kind::kAttrs:
        expand_attrs(cluster);
        return;
    }
  }

  bool has_members(const Grammar::Cluster& c) const {
    return std::any_of(c.members.begin(), c.members.end(),
                       [this](Attribute a) { return present_[index_of(a)]; });
  }

  void expand_attrs(int cluster) {
    if (cluster < 0) throw Error(ErrorCode::kGrammar, "$ATTRS expanded outside a cluster");
    std::vector<std::string> clauses;
    for (const Attribute a : g_.clusters()[static_cast<std::size_t>(cluster)].members) {
      if (!present_[index_of(a)]) continue;
      const int nt = g_.attribute_nonterminal(a);
      const std::size_t k = step(nt);
      const auto& rhs = g_.productions(nt)[k].rhs;
      clauses.push_back(realize_template(g_.terminal(rhs.front().id), subject_));
    }
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (i > 0) pieces_.emplace_back(i + 1 == clauses.size() ? "and" : ",");
      pieces_.push_back(std::move(clauses[i]));
    }
  }

  const Grammar& g_;
  const SubjectForm& subject_;
  Rng rng_;
  std::array<bool, kAttributeCount> present_{};
  std::vector<std::string> pieces_;
  Derivation derivation_;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

SubjectForm SubjectForm::male() { return {"he", "him", "his", false}; }
SubjectForm SubjectForm::female() { return {"she", "her", "her", false}; }
SubjectForm SubjectForm::neutral() { return {"they", "them", "their", true}; }

SubjectForm SubjectForm::from_labels(std::span<const AttributeLabel> labels,
                                     PronounFallback fallback) {
  const bool male_present = std::any_of(labels.begin(), labels.end(), [](const auto& l) {
    return l.name == Attribute::kMale;
  });
  if (male_present) return male();
  return fallback == PronounFallback::kFemale ? female() : neutral();
}

std::string realize_template(std::string_view tmpl, const SubjectForm& subject) {
  std::string out;
  out.reserve(tmpl.size() + 8);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kGrammar, "unterminated slot marker in '" + std::string(tmpl) + "'");
    }
    const auto marker = tmpl.substr(open + 1, close - open - 1);
    if (marker == "S") {
      out += subject.subject;
    } else if (marker == "O") {
      out += subject.object;
    } else if (marker == "P") {
      out += subject.possessive;
    } else {
      const auto verb = std::find_if(kVerbs.begin(), kVerbs.end(),
                                     [&](const VerbForm& v) { return v.marker == marker; });
      if (verb == kVerbs.end()) {
        throw Error(ErrorCode::kGrammar, "unknown slot marker {" + std::string(marker) + "}");
      }
      out += subject.plural_verbs ? verb->plural : verb->singular;
    }
    pos = close + 1;
  }
  return out;
}

Synthesis synthesize_raw(std::span<const AttributeLabel> labels, const Grammar& grammar,
                         std::uint64_t seed, PronounFallback fallback) {
  if (labels.empty()) throw Error(ErrorCode::kInvalidArgument, "no attribute labels to describe");
  if (!grammar.attribute_bound()) {
    throw Error(ErrorCode::kInvalidArgument, "synthesis needs an attribute-bound grammar");
  }
  for (const auto& l : labels) {
    if (grammar.cluster_of(l.name) < 0 || grammar.attribute_nonterminal(l.name) < 0) {
      throw Error(ErrorCode::kGrammar,
                  "attribute '" + std::string(attribute_name(l.name)) + "' is not covered by the grammar");
    }
  }
  const SubjectForm subject = SubjectForm::from_labels(labels, fallback);
  return Expander(grammar, labels, subject, seed).run();
}

std::string repair_sentence_end(std::string_view text) {
  std::string_view t = trim(text);
  // Keep a closing quote or bracket that already follows a terminal mark.
  if (t.size() >= 2 && std::string_view("\")'").find(t.back()) != std::string_view::npos &&
      std::string_view(".!?").find(t[t.size() - 2]) != std::string_view::npos) {
    return std::string(t);
  }
  while (!t.empty() && std::string_view(" \t\r\n.,;:").find(t.back()) != std::string_view::npos) {
    t.remove_suffix(1);
  }
  if (t.empty()) return {};
  std::string out(t);
  if (out.back() != '!' && out.back() != '?') out.push_back('.');
  return out;
}

namespace {

std::string_view strip_leading_marks(std::string_view t) {
  while (!t.empty() && std::string_view(" \t\r\n.,;:").find(t.front()) != std::string_view::npos) {
    t.remove_prefix(1);
  }
  return t;
}

}  // namespace

std::string merge_captions(std::string_view facial_caption, std::string_view global_caption,
                           std::string_view connective) {
  const std::string global = repair_sentence_end(strip_leading_marks(global_caption));
  const std::string facial = repair_sentence_end(strip_leading_marks(facial_caption));
  if (global.empty()) throw Error(ErrorCode::kInvalidArgument, "global caption is empty");
  if (facial.empty()) throw Error(ErrorCode::kInvalidArgument, "facial caption is empty");
  std::string out = global;
  const auto conn = trim(connective);
  if (!conn.empty()) {
    out.push_back(' ');
    out.append(conn);
  }
  out.push_back(' ');
  out += facial;
  return out;
}

}  // namespace humancorpus
