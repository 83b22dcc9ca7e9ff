#include "humancorpus/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "humancorpus/error.hpp"

namespace humancorpus {
namespace {

using Value = std::variant<bool, std::int64_t, double, std::string,
                           std::vector<std::string>>;

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorCode::kConfig, msg);
}

// ---- value syntax ---------------------------------------------------------

class ValueParser {
 public:
  ValueParser(std::string_view text, std::string context)
      : s_(text), ctx_(std::move(context)) {}

  Value parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) fail(ctx_ + ": missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  void expect_end() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') {
      fail(ctx_ + ": unexpected trailing text '" + std::string(s_.substr(pos_)) + "'");
    }
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) break;
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(ctx_ + ": unsupported escape \\" + std::string(1, e));
      }
    }
    fail(ctx_ + ": unterminated string");
  }

  std::vector<std::string> parse_array() {
    ++pos_;  // [
    std::vector<std::string> out;
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) fail(ctx_ + ": unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      if (s_[pos_] != '"') fail(ctx_ + ": arrays may only hold strings");
      out.push_back(parse_string());
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
    }
  }

  Value parse_scalar() {
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ' ' && s_[end] != '\t' && s_[end] != '#') ++end;
    const std::string_view tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok == "true") return true;
    if (tok == "false") return false;
    const bool floaty = tok.find_first_of(".eEn") != std::string_view::npos;
    if (!floaty) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec == std::errc() && p == tok.data() + tok.size()) return v;
    } else {
      // strtod handles every shortest round-trip form we emit
      const std::string buf(tok);
      char* endp = nullptr;
      const double v = std::strtod(buf.c_str(), &endp);
      if (endp == buf.c_str() + buf.size()) return v;
    }
    fail(ctx_ + ": cannot parse value '" + std::string(tok) + "'");
  }

  std::string_view s_;
  std::string ctx_;
  std::size_t pos_ = 0;
};

// ---- typed bindings ---------------------------------------------------------

struct Binding {
  std::function<void(PipelineConfig&, const Value&, const std::string&)> set;
  std::function<Value(const PipelineConfig&)> get;
};

template <class T>
const T& as(const Value& v, const std::string& key) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  fail(key + ": wrong value type");
}

double as_double(const Value& v, const std::string& key) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return as<double>(v, key);
}

int as_int(const Value& v, const std::string& key) {
  const auto i = as<std::int64_t>(v, key);
  if (i < INT32_MIN || i > INT32_MAX) fail(key + ": integer out of range");
  return static_cast<int>(i);
}

template <class Member>
Binding bind_double(Member member) {
  return {[member](PipelineConfig& c, const Value& v, const std::string& k) {
            member(c) = as_double(v, k);
          },
          [member](const PipelineConfig& c) -> Value {
            return member(const_cast<PipelineConfig&>(c));
          }};
}

template <class Member>
Binding bind_int(Member member) {
  return {[member](PipelineConfig& c, const Value& v, const std::string& k) {
            member(c) = as_int(v, k);
          },
          [member](const PipelineConfig& c) -> Value {
            return static_cast<std::int64_t>(member(const_cast<PipelineConfig&>(c)));
          }};
}

template <class Member>
Binding bind_string(Member member) {
  return {[member](PipelineConfig& c, const Value& v, const std::string& k) {
            member(c) = as<std::string>(v, k);
          },
          [member](const PipelineConfig& c) -> Value {
            return member(const_cast<PipelineConfig&>(c));
          }};
}

template <class Member>
Binding bind_bool(Member member) {
  return {[member](PipelineConfig& c, const Value& v, const std::string& k) {
            member(c) = as<bool>(v, k);
          },
          [member](const PipelineConfig& c) -> Value {
            return member(const_cast<PipelineConfig&>(c));
          }};
}

#define HC_FIELD(expr) [](PipelineConfig& c) -> auto& { return c.expr; }

// Ordered by section then key; format_config walks this map.
const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> table = [] {
    std::map<std::string, Binding> t;
    t["filter.min_face_side"] = bind_double(HC_FIELD(min_face_side));
    t["filter.min_face_conf"] = bind_double(HC_FIELD(min_face_conf));
    t["filter.min_attr_prob"] = bind_double(HC_FIELD(min_attr_prob));
    t["filter.min_valid_attrs"] = bind_int(HC_FIELD(min_valid_attrs));
    t["filter.min_caption_words"] = bind_int(HC_FIELD(min_caption_words));
    t["filter.inclusive_gates"] = bind_bool(HC_FIELD(inclusive_gates));
    t["filter.refusal_patterns"] = {
        [](PipelineConfig& c, const Value& v, const std::string& k) {
          c.refusal_patterns = as<std::vector<std::string>>(v, k);
        },
        [](const PipelineConfig& c) -> Value { return c.refusal_patterns; }};
    t["run.seed"] = {
        [](PipelineConfig& c, const Value& v, const std::string& k) {
          const auto i = as<std::int64_t>(v, k);
          c.rng_seed = static_cast<std::uint64_t>(i);
        },
        [](const PipelineConfig& c) -> Value {
          return static_cast<std::int64_t>(c.rng_seed);
        }};
    t["run.jobs"] = bind_int(HC_FIELD(jobs));

    t["llm.base_url"] = bind_string(HC_FIELD(llm.base_url));
    t["llm.model"] = bind_string(HC_FIELD(llm.model));
    t["llm.temperature"] = bind_double(HC_FIELD(llm.temperature));
    t["llm.max_in_flight"] = bind_int(HC_FIELD(llm.max_in_flight));
    t["llm.retry_budget"] = bind_int(HC_FIELD(llm.retry_budget));
    t["llm.timeout_ms"] = bind_int(HC_FIELD(llm.timeout_ms));
    t["llm.backoff_initial_ms"] = bind_int(HC_FIELD(llm.backoff_initial_ms));
    t["llm.backoff_max_ms"] = bind_int(HC_FIELD(llm.backoff_max_ms));
    t["llm.api_key_env"] = bind_string(HC_FIELD(llm.api_key_env));
    t["llm.mock"] = bind_string(HC_FIELD(llm.mock));

    t["rewrite.version"] = bind_string(HC_FIELD(rewrite.version));
    t["rewrite.system"] = bind_string(HC_FIELD(rewrite.system));
    t["rewrite.user_template"] = bind_string(HC_FIELD(rewrite.user_template));
    t["rewrite.max_input_chars"] = {
        [](PipelineConfig& c, const Value& v, const std::string& k) {
          const auto i = as<std::int64_t>(v, k);
          if (i < 0) fail(k + ": must be non-negative");
          c.rewrite.max_input_chars = static_cast<std::size_t>(i);
        },
        [](const PipelineConfig& c) -> Value {
          return static_cast<std::int64_t>(c.rewrite.max_input_chars);
        }};

    t["synth.pronoun_fallback"] = {
        [](PipelineConfig& c, const Value& v, const std::string& k) {
          const auto& s = as<std::string>(v, k);
          if (s == "neutral") {
            c.synth.pronoun_fallback = PronounFallback::kNeutral;
          } else if (s == "female") {
            c.synth.pronoun_fallback = PronounFallback::kFemale;
          } else {
            fail(k + ": expected \"neutral\" or \"female\"");
          }
        },
        [](const PipelineConfig& c) -> Value {
          return std::string(c.synth.pronoun_fallback == PronounFallback::kFemale
                                 ? "female"
                                 : "neutral");
        }};
    t["synth.connective"] = bind_string(HC_FIELD(synth.connective));
    t["synth.grammar_file"] = bind_string(HC_FIELD(synth.grammar_file));
    t["synth.phrases_file"] = bind_string(HC_FIELD(synth.phrases_file));

    t["quality.kernel_sigma"] = bind_double(HC_FIELD(quality.kernel_sigma));
    t["quality.kernel_radius"] = bind_int(HC_FIELD(quality.kernel_radius));
    t["quality.c"] = bind_double(HC_FIELD(quality.c));
    t["quality.alpha_min"] = bind_double(HC_FIELD(quality.alpha_min));
    t["quality.alpha_max"] = bind_double(HC_FIELD(quality.alpha_max));
    t["quality.logit_scale"] = bind_double(HC_FIELD(quality.logit_scale));
    t["quality.bins"] = bind_int(HC_FIELD(quality.bins));
    t["quality.positive_prompt"] = bind_string(HC_FIELD(quality.positive_prompt));
    t["quality.negative_prompt"] = bind_string(HC_FIELD(quality.negative_prompt));

    t["stats.ngram_n"] = bind_int(HC_FIELD(stats.ngram_n));
    t["stats.sample_pct"] = bind_double(HC_FIELD(stats.sample_pct));
    t["stats.approximate"] = bind_bool(HC_FIELD(stats.approximate));
    return t;
  }();
  return table;
}

#undef HC_FIELD

void assign(PipelineConfig& cfg, const std::string& key, const Value& value) {
  const auto it = bindings().find(key);
  if (it == bindings().end()) fail("unknown config key '" + key + "'");
  it->second.set(cfg, value, key);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string format_double(double v) {
  // %.17g round-trips every finite double; keep a decimal point so the value
  // re-parses as a float.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(x);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ", ";
            out += quote(x[i]);
          }
          return out + "]";
        }
      },
      v);
}

}  // namespace

void validate(const PipelineConfig& c) {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(std::string("invalid config: ") + what);
  };
  check(std::isfinite(c.min_face_side) && c.min_face_side >= 0,
        "filter.min_face_side must be >= 0");
  check(c.min_face_conf >= 0 && c.min_face_conf <= 1, "filter.min_face_conf must be in [0, 1]");
  check(c.min_attr_prob >= 0 && c.min_attr_prob <= 1, "filter.min_attr_prob must be in [0, 1]");
  check(c.min_valid_attrs >= 0 && c.min_valid_attrs <= 40,
        "filter.min_valid_attrs must be in [0, 40]");
  check(c.min_caption_words >= 0, "filter.min_caption_words must be >= 0");
  check(!c.refusal_patterns.empty(), "filter.refusal_patterns must not be empty");
  for (const auto& p : c.refusal_patterns) {
    check(!p.empty(), "filter.refusal_patterns entries must be non-empty");
  }
  check(c.jobs >= 1, "run.jobs must be >= 1");
  check(c.llm.max_in_flight >= 1, "llm.max_in_flight must be >= 1");
  check(c.llm.retry_budget >= 0, "llm.retry_budget must be >= 0");
  check(c.llm.timeout_ms > 0, "llm.timeout_ms must be > 0");
  check(c.llm.backoff_initial_ms >= 0 && c.llm.backoff_max_ms >= c.llm.backoff_initial_ms,
        "llm backoff bounds must satisfy 0 <= initial <= max");
  check(std::isfinite(c.llm.temperature) && c.llm.temperature >= 0,
        "llm.temperature must be >= 0");
  check(c.llm.mock.empty() || c.llm.mock == "echo" || c.llm.mock == "upper",
        "llm.mock must be \"\", \"echo\" or \"upper\"");
  check(c.rewrite.user_template.find("{raw}") != std::string::npos,
        "rewrite.user_template must contain {raw}");
  check(c.quality.kernel_sigma > 0, "quality.kernel_sigma must be > 0");
  check(c.quality.kernel_radius >= 1, "quality.kernel_radius must be >= 1");
  check(c.quality.c > 0, "quality.c must be > 0");
  check(c.quality.alpha_min > 0 && c.quality.alpha_max > c.quality.alpha_min,
        "quality alpha bracket must satisfy 0 < min < max");
  check(c.quality.logit_scale > 0, "quality.logit_scale must be > 0");
  check(c.quality.bins >= 1, "quality.bins must be >= 1");
  check(c.stats.ngram_n >= 1, "stats.ngram_n must be >= 1");
  check(c.stats.sample_pct > 0 && c.stats.sample_pct <= 100,
        "stats.sample_pct must be in (0, 100]");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string ctx = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) fail(ctx + ": unterminated section header");
      section = std::string(trim(line.substr(1, close - 1)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ctx + ": expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    if (section.empty()) fail(ctx + ": key '" + key + "' outside any [section]");
    ValueParser vp(line.substr(eq + 1), ctx);
    const Value v = vp.parse_value();
    vp.expect_end();
    assign(cfg, section + "." + key, v);
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& [key, binding] : bindings()) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out += "\n";
      out += "[" + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + format_value(binding.get(cfg)) + "\n";
  }
  return out;
}

void apply_override(PipelineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    fail("override '" + std::string(assignment) + "' must be section.key=value");
  }
  const std::string key(trim(assignment.substr(0, eq)));
  const auto rhs = trim(assignment.substr(eq + 1));
  Value v;
  try {
    ValueParser vp(rhs, "override " + key);
    v = vp.parse_value();
    vp.expect_end();
  } catch (const Error&) {
    v = std::string(rhs);  // bare word
  }
  // Bare words that happen to look numeric are still numbers; string-typed
  // keys need the textual form back.
  try {
    assign(cfg, key, v);
  } catch (const Error&) {
    if (std::holds_alternative<std::string>(v)) throw;
    assign(cfg, key, Value{std::string(rhs)});
  }
  validate(cfg);
}

Json to_json(const PipelineConfig& cfg) {
  Json j = Json::object();
  for (const auto& [key, binding] : bindings()) {
    const auto dot = key.find('.');
    const Value v = binding.get(cfg);
    Json& slot = j[key.substr(0, dot)][key.substr(dot + 1)];
    std::visit([&slot](const auto& x) { slot = x; }, v);
  }
  return j;
}

}  // namespace humancorpus
