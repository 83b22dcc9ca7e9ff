#include "humancorpus/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "humancorpus/error.hpp"

namespace humancorpus {
namespace {

#include "grammar_builtin.inc"

constexpr std::string_view kAttrsSymbol = "$ATTRS";
constexpr std::string_view kClustersSymbol = "$CLUSTERS";

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::kGrammar, msg); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// Strips a '#' comment that is not inside double quotes.
std::string_view strip_comment(std::string_view line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

double parse_weight(std::string_view s, const std::string& ctx) {
  const std::string buf(trim(s));
  char* end = nullptr;
  const double w = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) fail(ctx + ": bad weight '" + buf + "'");
  return w;
}

void check_weight(double w, const std::string& ctx) {
  if (!(std::isfinite(w) && w > 0)) fail(ctx + ": weight must be positive and finite");
}

const std::unordered_set<std::string_view>& slot_markers() {
  static const std::unordered_set<std::string_view> markers = {
      "S", "O", "P", "is", "has", "was", "looks", "wears", "appears", "seems", "does"};
  return markers;
}

void check_template(std::string_view text, const std::string& ctx) {
  bool subject_slot = false;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto close = text.find('}', pos);
    if (close == std::string_view::npos) fail(ctx + ": unterminated slot marker");
    const auto marker = text.substr(pos + 1, close - pos - 1);
    if (!slot_markers().contains(marker)) {
      fail(ctx + ": unknown slot marker {" + std::string(marker) + "}");
    }
    if (marker == "S" || marker == "O" || marker == "P") subject_slot = true;
    pos = close + 1;
  }
  if (!subject_slot) fail(ctx + ": template has no subject slot ({S}, {O} or {P})");
}

}  // namespace

// ---- phrase table -----------------------------------------------------------

void PhraseTable::add(Attribute a, std::string text, double weight) {
  const std::string ctx = "template for '" + std::string(attribute_name(a)) + "'";
  check_weight(weight, ctx);
  check_template(text, ctx);
  entries_[index_of(a)].push_back({std::move(text), weight});
}

PhraseTable PhraseTable::builtin() { return parse_phrase_table(kBuiltinPhrases); }

PhraseTable parse_phrase_table(std::string_view text) {
  PhraseTable table;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string ctx = "phrase table line " + std::to_string(line_no);
    const auto bar1 = line.find('|');
    if (bar1 == std::string_view::npos) fail(ctx + ": expected 'Attribute | template | weight'");
    const auto bar2 = line.find('|', bar1 + 1);
    const auto name = trim(line.substr(0, bar1));
    const auto tmpl = trim(line.substr(
        bar1 + 1, bar2 == std::string_view::npos ? std::string_view::npos : bar2 - bar1 - 1));
    const double weight =
        bar2 == std::string_view::npos ? 1.0 : parse_weight(line.substr(bar2 + 1), ctx);
    const auto attr = parse_attribute(name);
    if (!attr) fail(ctx + ": unknown attribute '" + std::string(name) + "'");
    if (tmpl.empty()) fail(ctx + ": empty template");
    table.add(*attr, std::string(tmpl), weight);
  }
  return table;
}

// ---- rules ------------------------------------------------------------------

std::string_view builtin_rules() noexcept { return kBuiltinRules; }
std::string_view builtin_phrases() noexcept { return kBuiltinPhrases; }

RuleSet parse_rules(std::string_view text) {
  RuleSet rules;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string ctx = "rules line " + std::to_string(line_no);

    if (line.starts_with("%start")) {
      const auto name = trim(line.substr(6));
      if (name.empty()) fail(ctx + ": %start needs a nonterminal");
      rules.start = std::string(name);
      continue;
    }
    if (line.starts_with("%cluster")) {
      const auto body = line.substr(8);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) fail(ctx + ": expected %cluster NAME = attr, attr");
      RuleCluster cluster;
      cluster.name = std::string(trim(body.substr(0, eq)));
      if (cluster.name.empty()) fail(ctx + ": cluster needs a name");
      std::string_view list = body.substr(eq + 1);
      while (!list.empty()) {
        const auto comma = list.find(',');
        const auto item = trim(list.substr(0, comma));
        list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        if (item.empty()) continue;
        const auto attr = parse_attribute(item);
        if (!attr) fail(ctx + ": unknown attribute '" + std::string(item) + "'");
        cluster.members.push_back(*attr);
      }
      rules.clusters.push_back(std::move(cluster));
      continue;
    }

    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos) fail(ctx + ": expected NONTERM -> symbols @ weight");
    RuleProduction prod;
    prod.line = line_no;
    prod.lhs = std::string(trim(line.substr(0, arrow)));
    if (prod.lhs.empty() || prod.lhs.find_first_of(" \t\"") != std::string::npos) {
      fail(ctx + ": bad left-hand side '" + prod.lhs + "'");
    }
    std::string_view body = line.substr(arrow + 2);
    std::size_t i = 0;
    bool have_weight = false;
    while (i < body.size()) {
      while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
      if (i >= body.size()) break;
      if (body[i] == '"') {
        const auto close = body.find('"', i + 1);
        if (close == std::string_view::npos) fail(ctx + ": unterminated quoted terminal");
        prod.rhs.emplace_back(body.substr(i + 1, close - i - 1));
        prod.quoted.push_back(true);
        i = close + 1;
        continue;
      }
      if (body[i] == '@') {
        prod.weight = parse_weight(body.substr(i + 1), ctx);
        have_weight = true;
        break;
      }
      std::size_t j = i;
      while (j < body.size() && body[j] != ' ' && body[j] != '\t') ++j;
      prod.rhs.emplace_back(body.substr(i, j - i));
      prod.quoted.push_back(false);
      i = j;
    }
    if (!have_weight) prod.weight = 1.0;
    rules.productions.push_back(std::move(prod));
  }
  if (rules.start.empty() && !rules.productions.empty()) {
    rules.start = rules.productions.front().lhs;
  }
  return rules;
}

// ---- grammar construction ---------------------------------------------------

class GrammarBuilder {
 public:
  explicit GrammarBuilder(bool attribute_bound) { g_.attribute_bound_ = attribute_bound; }

  int nonterminal(const std::string& name) {
    const auto [it, inserted] = g_.index_.try_emplace(name, static_cast<int>(g_.names_.size()));
    if (inserted) {
      g_.names_.push_back(name);
      g_.productions_.emplace_back();
    }
    return it->second;
  }

  int terminal(std::string text) {
    const auto it = terminal_index_.find(text);
    if (it != terminal_index_.end()) return it->second;
    const int id = static_cast<int>(g_.terminals_.size());
    terminal_index_.emplace(text, id);
    g_.terminals_.push_back(std::move(text));
    return id;
  }

  Grammar build(const RuleSet& rules, const PhraseTable* table) {
    const bool bound = table != nullptr;
    // Declare every left-hand side (and cluster name) first so symbol
    // classification does not depend on line order.
    for (const auto& p : rules.productions) nonterminal(p.lhs);
    for (const auto& c : rules.clusters) nonterminal(c.name);

    for (const auto& p : rules.productions) {
      const std::string ctx = "production '" + p.lhs + "' (rules line " +
                              std::to_string(p.line) + ")";
      check_weight(p.weight, ctx);
      GrammarProduction out;
      out.weight = p.weight;
      for (std::size_t k = 0; k < p.rhs.size(); ++k) {
        const std::string& sym = p.rhs[k];
        GrammarSymbol s;
        if (p.quoted[k]) {
          s = {GrammarSymbol::Kind::kTerminal, terminal(sym)};
        } else if (sym == kAttrsSymbol || sym == kClustersSymbol) {
          if (!bound) fail(ctx + ": " + sym + " is only valid in attribute grammars");
          s.kind = sym == kAttrsSymbol ? GrammarSymbol::Kind::kAttrs
                                       : GrammarSymbol::Kind::kClusters;
        } else if (const auto it = g_.index_.find(sym); it != g_.index_.end()) {
          s = {GrammarSymbol::Kind::kNonterminal, it->second};
        } else {
          s = {GrammarSymbol::Kind::kTerminal, terminal(sym)};
        }
        out.rhs.push_back(s);
      }
      g_.productions_[static_cast<std::size_t>(g_.index_.at(p.lhs))].push_back(std::move(out));
    }

    if (rules.start.empty()) fail("grammar has no productions");
    const auto start = g_.index_.find(rules.start);
    if (start == g_.index_.end()) fail("start symbol '" + rules.start + "' has no productions");
    g_.start_ = start->second;

    g_.cluster_of_.fill(-1);
    g_.attribute_nt_.fill(-1);
    if (bound) bind_attributes(rules, *table);

    for (std::size_t nt = 0; nt < g_.names_.size(); ++nt) {
      if (g_.productions_[nt].empty()) {
        fail("nonterminal '" + g_.names_[nt] + "' has no productions");
      }
    }
    if (bound) check_special_placement();
    check_termination();
    check_reachability();
    normalize();
    return std::move(g_);
  }

 private:
  void bind_attributes(const RuleSet& rules, const PhraseTable& table) {
    if (rules.clusters.empty()) fail("attribute grammar declares no %cluster");
    for (std::size_t c = 0; c < rules.clusters.size(); ++c) {
      const auto& rc = rules.clusters[c];
      Grammar::Cluster cluster;
      cluster.nonterminal = g_.index_.at(rc.name);
      cluster.members = rc.members;
      for (const Attribute a : rc.members) {
        if (g_.cluster_of_[index_of(a)] != -1) {
          fail("attribute '" + std::string(attribute_name(a)) +
               "' is assigned to more than one cluster");
        }
        g_.cluster_of_[index_of(a)] = static_cast<int>(c);
      }
      std::sort(cluster.members.begin(), cluster.members.end(), [](Attribute x, Attribute y) {
        return attribute_name(x) < attribute_name(y);
      });
      g_.clusters_.push_back(std::move(cluster));
    }
    for (const Attribute a : all_attributes()) {
      const std::string name(attribute_name(a));
      const auto templates = table.templates(a);
      if (templates.empty()) fail("attribute '" + name + "' has no phrase templates");
      if (g_.cluster_of_[index_of(a)] == -1) {
        fail("attribute '" + name + "' is not assigned to any cluster");
      }
      const int nt = nonterminal("@" + name);
      g_.attribute_nt_[index_of(a)] = nt;
      for (const auto& t : templates) {
        GrammarProduction p;
        p.weight = t.weight;
        p.rhs.push_back({GrammarSymbol::Kind::kTerminal, terminal(t.text)});
        g_.productions_[static_cast<std::size_t>(nt)].push_back(std::move(p));
      }
    }
  }

  void check_special_placement() {
    std::vector<bool> is_cluster(g_.names_.size(), false);
    for (const auto& c : g_.clusters_) is_cluster[static_cast<std::size_t>(c.nonterminal)] = true;
    if (is_cluster[static_cast<std::size_t>(g_.start_)]) {
      fail("start symbol '" + g_.names_[static_cast<std::size_t>(g_.start_)] +
           "' cannot be a cluster");
    }
    for (std::size_t nt = 0; nt < g_.names_.size(); ++nt) {
      for (const auto& p : g_.productions_[nt]) {
        int attrs = 0;
        int clusters = 0;
        for (const auto& s : p.rhs) {
          attrs += s.kind == GrammarSymbol::Kind::kAttrs;
          clusters += s.kind == GrammarSymbol::Kind::kClusters;
        }
        const std::string& name = g_.names_[nt];
        if (static_cast<int>(nt) == g_.start_) {
          if (clusters != 1 || attrs != 0) {
            fail("every production of start symbol '" + name +
                 "' must contain $CLUSTERS exactly once and no $ATTRS");
          }
        } else if (is_cluster[nt]) {
          if (attrs != 1 || clusters != 0) {
            fail("every production of cluster '" + name +
                 "' must contain $ATTRS exactly once and no $CLUSTERS");
          }
        } else if (attrs || clusters) {
          fail("nonterminal '" + name + "' uses $ATTRS/$CLUSTERS outside its allowed place");
        }
      }
    }
  }

  void check_termination() {
    const std::size_t n = g_.names_.size();
    std::vector<bool> productive(n, false);
    auto cluster_nts_productive = [&] {
      return std::all_of(g_.clusters_.begin(), g_.clusters_.end(), [&](const auto& c) {
        return productive[static_cast<std::size_t>(c.nonterminal)];
      });
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t nt = 0; nt < n; ++nt) {
        if (productive[nt]) continue;
        for (const auto& p : g_.productions_[nt]) {
          const bool ok = std::all_of(p.rhs.begin(), p.rhs.end(), [&](const GrammarSymbol& s) {
            switch (s.kind) {
              case GrammarSymbol::Kind::kTerminal:
              case GrammarSymbol::Kind::kAttrs:
                return true;
              case GrammarSymbol::Kind::kNonterminal:
                return static_cast<bool>(productive[static_cast<std::size_t>(s.id)]);
              case GrammarSymbol::Kind::kClusters:
                return cluster_nts_productive();
            }
            return false;
          });
          if (ok) {
            productive[nt] = true;
            changed = true;
            break;
          }
        }
      }
    }
    for (std::size_t nt = 0; nt < n; ++nt) {
      if (!productive[nt]) {
        fail("nonterminal '" + g_.names_[nt] +
             "' cannot derive a terminal string (non-terminating)");
      }
    }
  }

  void check_reachability() {
    const std::size_t n = g_.names_.size();
    std::vector<bool> seen(n, false);
    std::deque<int> queue{g_.start_};
    seen[static_cast<std::size_t>(g_.start_)] = true;
    auto visit = [&](int nt) {
      if (!seen[static_cast<std::size_t>(nt)]) {
        seen[static_cast<std::size_t>(nt)] = true;
        queue.push_back(nt);
      }
    };
    while (!queue.empty()) {
      const int nt = queue.front();
      queue.pop_front();
      for (const auto& p : g_.productions_[static_cast<std::size_t>(nt)]) {
        for (const auto& s : p.rhs) {
          if (s.kind == GrammarSymbol::Kind::kNonterminal) {
            visit(s.id);
          } else if (s.kind == GrammarSymbol::Kind::kClusters) {
            for (const auto& c : g_.clusters_) visit(c.nonterminal);
          } else if (s.kind == GrammarSymbol::Kind::kAttrs) {
            for (const auto& c : g_.clusters_) {
              if (c.nonterminal != nt) continue;
              for (const Attribute a : c.members) visit(g_.attribute_nt_[index_of(a)]);
            }
          }
        }
      }
    }
    for (std::size_t nt = 0; nt < n; ++nt) {
      if (!seen[nt]) fail("nonterminal '" + g_.names_[nt] + "' is unreachable from the start symbol");
    }
  }

  void normalize() {
    g_.cumulative_.resize(g_.names_.size());
    for (std::size_t nt = 0; nt < g_.names_.size(); ++nt) {
      auto& prods = g_.productions_[nt];
      double total = 0;
      for (const auto& p : prods) total += p.weight;
      if (!(std::isfinite(total) && total > 0)) {
        fail("weights of '" + g_.names_[nt] + "' do not sum to a positive finite value");
      }
      auto& cum = g_.cumulative_[nt];
      double running = 0;
      for (auto& p : prods) {
        p.probability = p.weight / total;
        p.log_probability = std::log(p.probability);
        running += p.weight;
        cum.push_back(running);
      }
    }
  }

  Grammar g_;
  std::unordered_map<std::string, int> terminal_index_;
};

std::optional<int> Grammar::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Grammar::choose(int nt, Rng& rng) const {
  const auto& cum = cumulative_.at(static_cast<std::size_t>(nt));
  if (cum.size() == 1) return 0;
  const double u = rng.uniform01() * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

Grammar build_grammar(const PhraseTable& table, const RuleSet& rules) {
  return GrammarBuilder(true).build(rules, &table);
}

Grammar build_grammar(const PhraseTable& table, std::string_view rules_text) {
  return build_grammar(table, parse_rules(rules_text));
}

Grammar build_plain_grammar(const RuleSet& rules) {
  return GrammarBuilder(false).build(rules, nullptr);
}

Grammar build_plain_grammar(std::string_view rules_text) {
  return build_plain_grammar(parse_rules(rules_text));
}

const Grammar& default_grammar() {
  static const Grammar g = build_grammar(PhraseTable::builtin(), builtin_rules());
  return g;
}

double derivation_logprob(const Derivation& derivation, const Grammar& grammar) {
  double total = 0;
  for (const auto& step : derivation) {
    const auto nt = grammar.find(step.nonterminal);
    if (!nt) fail("derivation step uses unknown nonterminal '" + step.nonterminal + "'");
    const auto prods = grammar.productions(*nt);
    if (step.production >= prods.size()) {
      fail("derivation step uses production " + std::to_string(step.production) + " of '" +
           step.nonterminal + "', which has only " + std::to_string(prods.size()));
    }
    total += prods[step.production].log_probability;
  }
  return total;
}

PlainSample sample_plain(const Grammar& grammar, std::string_view root, Rng& rng,
                         std::size_t max_steps) {
  const auto start = grammar.find(root);
  if (!start) fail("unknown nonterminal '" + std::string(root) + "'");
  PlainSample out;
  std::vector<GrammarSymbol> stack{{GrammarSymbol::Kind::kNonterminal, *start}};
  while (!stack.empty()) {
    const GrammarSymbol s = stack.back();
    stack.pop_back();
    switch (s.kind) {
      case GrammarSymbol::Kind::kTerminal:
        out.yield.push_back(grammar.terminal(s.id));
        break;
      case GrammarSymbol::Kind::kNonterminal: {
        if (out.derivation.size() >= max_steps) {
          fail("derivation from '" + std::string(root) + "' exceeded " +
               std::to_string(max_steps) + " steps");
        }
        const std::size_t k = grammar.choose(s.id, rng);
        out.derivation.push_back({grammar.name(s.id), k});
        const auto& rhs = grammar.productions(s.id)[k].rhs;
        for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) stack.push_back(*it);
        break;
      }
      default:
        fail("sample_plain cannot expand $ATTRS/$CLUSTERS; use synthesize_raw");
    }
  }
  return out;
}

}  // namespace humancorpus
