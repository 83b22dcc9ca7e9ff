#include "humancorpus/instruction.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "humancorpus/attributes.hpp"
#include "humancorpus/error.hpp"

namespace humancorpus {

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 4> kTaskNames{{
    {TaskKind::kCaption, "caption"},
    {TaskKind::kVqa, "vqa"},
    {TaskKind::kGrounding, "grounding"},
    {TaskKind::kAttribute, "attribute"},
}};

std::string strip_token(std::string_view s) {
  std::string out;
  for (;;) {
    const auto pos = s.find(kImageToken);
    if (pos == std::string_view::npos) break;
    out.append(s.substr(0, pos));
    s.remove_prefix(pos + kImageToken.size());
  }
  out.append(s);
  const auto b = out.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \t\r\n");
  return out.substr(b, e - b + 1);
}

std::string prompt(std::string_view question) {
  std::string s(kImageToken);
  s += '\n';
  s += question;
  return s;
}

std::string fmt_coord(double v, bool normalized) {
  char buf[32];
  std::snprintf(buf, sizeof buf, normalized ? "%.3f" : "%.0f", v);
  return buf;
}

std::string box_answer(const SampleRecord& r) {
  const auto& face = *std::max_element(
      r.faces.begin(), r.faces.end(),
      [](const FaceDetection& a, const FaceDetection& b) { return a.bbox.area() < b.bbox.area(); });
  const bool norm = r.width > 0 && r.height > 0;
  const double sx = norm ? 1.0 / r.width : 1.0;
  const double sy = norm ? 1.0 / r.height : 1.0;
  const BBox& b = face.bbox;
  return "[" + fmt_coord(b.x * sx, norm) + ", " + fmt_coord(b.y * sy, norm) + ", " +
         fmt_coord((b.x + b.w) * sx, norm) + ", " + fmt_coord((b.y + b.h) * sy, norm) + "]";
}

std::string required_extra(const SampleRecord& r, const char* key) {
  auto it = r.extra.find(key);
  if (it == r.extra.end() || !it->is_string()) {
    throw SchemaError(0, key, "record '" + r.id + "' needs a string '" + key + "' for vqa");
  }
  std::string v = strip_token(it->get<std::string>());
  if (v.empty()) throw SchemaError(0, key, "record '" + r.id + "' has an empty '" + key + "'");
  return v;
}

const char* wire_role(const std::string& role) {
  if (role == "user") return "human";
  if (role == "assistant") return "gpt";
  if (role == "system") return "system";
  throw Error(ErrorCode::kSchema, "unknown conversation role '" + role + "'");
}

std::string role_from_wire(const std::string& from) {
  if (from == "human" || from == "user") return "user";
  if (from == "gpt" || from == "assistant") return "assistant";
  if (from == "system") return "system";
  return from;
}

std::size_t count_token(std::string_view s) {
  std::size_t n = 0;
  for (auto pos = s.find(kImageToken); pos != std::string_view::npos;
       pos = s.find(kImageToken, pos + kImageToken.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(TaskKind t) noexcept {
  for (const auto& [k, n] : kTaskNames) {
    if (k == t) return n;
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) noexcept {
  for (const auto& [k, n] : kTaskNames) {
    if (n == s) return k;
  }
  return std::nullopt;
}

InstructionRecord emit_instruction_record(const SampleRecord& record, TaskKind task) {
  InstructionRecord out{record.id, record.image_ref, {}};
  switch (task) {
    case TaskKind::kCaption: {
      std::string caption = strip_token(record.caption);
      if (caption.empty()) {
        throw SchemaError(0, "caption", "record '" + record.id + "' has no caption");
      }
      out.conversation = {
          {"user", prompt("Describe the person in this image in detail.")},
          {"assistant", std::move(caption)}};
      break;
    }
    case TaskKind::kVqa: {
      std::string q = required_extra(record, "question");
      std::string a = required_extra(record, "answer");
      out.conversation = {{"user", prompt(q)}, {"assistant", std::move(a)}};
      break;
    }
    case TaskKind::kGrounding: {
      if (record.faces.empty()) {
        throw SchemaError(0, "faces", "record '" + record.id + "' has no face box");
      }
      out.conversation = {
          {"user", prompt("Where is the face of the person in this image? "
                          "Answer with a bounding box [x0, y0, x1, y1].")},
          {"assistant", box_answer(record)}};
      break;
    }
    case TaskKind::kAttribute: {
      if (record.attrs.empty()) {
        throw SchemaError(0, "attrs", "record '" + record.id + "' has no attributes");
      }
      std::string list;
      for (const auto& a : record.attrs) {
        if (!list.empty()) list += ", ";
        list += attribute_name(a.name);
      }
      out.conversation = {
          {"user", prompt("Which facial attributes does this person have?")},
          {"assistant", std::move(list)}};
      break;
    }
  }
  validate(out);
  return out;
}

void validate(const InstructionRecord& r) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kSchema, "instruction record '" + r.id + "': " + why);
  };
  std::size_t i = 0;
  if (!r.conversation.empty() && r.conversation[0].role == "system") i = 1;
  if (r.conversation.size() < i + 2) fail("needs at least one user and one assistant turn");
  std::size_t tokens = 0;
  for (std::size_t k = 0; k < r.conversation.size(); ++k) {
    const Turn& t = r.conversation[k];
    tokens += count_token(t.content);
    if (k < i) continue;
    const char* expect = (k - i) % 2 == 0 ? "user" : "assistant";
    if (t.role != expect) {
      fail("turn " + std::to_string(k) + " is '" + t.role + "', expected '" + expect + "'");
    }
  }
  if (tokens != 1) fail("expected exactly one image token, found " + std::to_string(tokens));
  if (count_token(r.conversation[i].content) != 1) {
    fail("image token is not in the first user turn");
  }
}

Json to_json(const InstructionRecord& r) {
  Json conv = Json::array();
  for (const auto& t : r.conversation) {
    conv.push_back(Json{{"from", wire_role(t.role)}, {"value", t.content}});
  }
  Json j = Json::object();
  if (!r.id.empty()) j["id"] = r.id;
  j["image"] = r.image;
  j["conversations"] = std::move(conv);
  return j;
}

InstructionRecord instruction_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "", "instruction record is not an object");
  InstructionRecord r;
  if (auto it = j.find("id"); it != j.end()) {
    if (!it->is_string()) throw SchemaError(line, "id", "must be a string");
    r.id = it->get<std::string>();
  }
  auto img = j.find("image");
  if (img == j.end() || !img->is_string()) throw SchemaError(line, "image", "missing or not a string");
  r.image = img->get<std::string>();
  auto conv = j.find("conversations");
  if (conv == j.end() || !conv->is_array()) {
    throw SchemaError(line, "conversations", "missing or not an array");
  }
  for (const auto& t : *conv) {
    if (!t.is_object() || !t.contains("from") || !t.contains("value") ||
        !t["from"].is_string() || !t["value"].is_string()) {
      throw SchemaError(line, "conversations", "turn needs string 'from' and 'value'");
    }
    r.conversation.push_back({role_from_wire(t["from"].get<std::string>()),
                              t["value"].get<std::string>()});
  }
  return r;
}

}  // namespace humancorpus
