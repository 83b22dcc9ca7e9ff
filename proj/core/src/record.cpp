#include "humancorpus/record.hpp"

#include <array>
#include <cmath>
#include <unordered_set>

#include "humancorpus/error.hpp"
#include "humancorpus/rng.hpp"

namespace humancorpus {
namespace {

constexpr std::array<std::string_view, 8> kStageNames = {
    "raw",       "face_pass", "attr_pass", "synthesized",
    "rewritten", "merged",    "cleaned",   "rejected"};

constexpr std::array<std::string_view, kRejectReasonCount> kReasonNames = {
    "face_too_small", "face_low_conf", "too_few_attrs",
    "short_text",     "refusal",       "judge_parse_fail"};

constexpr std::array<std::string_view, 5> kFieldNames = {
    "source_text", "global_caption", "facial_raw", "facial_caption", "caption"};

// Keys owned by the typed schema; everything else lands in `extra`.
const std::unordered_set<std::string_view>& known_keys() {
  static const std::unordered_set<std::string_view> keys = {
      "id",         "image",          "width",      "height",
      "faces",      "attrs",          "source_text", "global_caption",
      "facial_raw", "facial_caption", "caption",    "status",
      "reason"};
  return keys;
}

template <std::size_t N>
std::optional<std::size_t> find_name(const std::array<std::string_view, N>& names,
                                     std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  return std::nullopt;
}

double get_number(const Json& j, const char* field, std::size_t line) {
  if (!j.is_number()) throw SchemaError(line, field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(line, field, "not finite");
  return v;
}

std::string get_string(const Json& obj, const char* field, std::size_t line) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw SchemaError(line, field, "expected a string");
  return it->get<std::string>();
}

double get_unit(const Json& j, const char* field, std::size_t line) {
  const double v = get_number(j, field, line);
  if (v < 0.0 || v > 1.0) {
    throw SchemaError(line, field, "value " + j.dump() + " outside [0, 1]");
  }
  return v;
}

FaceDetection face_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "faces", "expected an object");
  const auto bb = j.find("bbox");
  if (bb == j.end() || !bb->is_array() || bb->size() != 4) {
    throw SchemaError(line, "bbox", "expected [x, y, w, h]");
  }
  FaceDetection f;
  f.bbox.x = get_number((*bb)[0], "bbox", line);
  f.bbox.y = get_number((*bb)[1], "bbox", line);
  f.bbox.w = get_number((*bb)[2], "bbox", line);
  f.bbox.h = get_number((*bb)[3], "bbox", line);
  if (f.bbox.x < 0 || f.bbox.y < 0) {
    throw SchemaError(line, "bbox", "negative origin");
  }
  if (f.bbox.w <= 0 || f.bbox.h <= 0) {
    throw SchemaError(line, "bbox", "width and height must be positive");
  }
  const auto conf = j.find("conf");
  if (conf == j.end()) throw SchemaError(line, "conf", "missing");
  f.conf = get_unit(*conf, "conf", line);
  return f;
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  return kStageNames[static_cast<std::size_t>(s)];
}

std::string_view to_string(RejectReason r) noexcept {
  return kReasonNames[static_cast<std::size_t>(r)];
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
  if (auto i = find_name(kStageNames, s)) return static_cast<Stage>(*i);
  return std::nullopt;
}

std::optional<RejectReason> parse_reject_reason(std::string_view s) noexcept {
  if (auto i = find_name(kReasonNames, s)) return static_cast<RejectReason>(*i);
  return std::nullopt;
}

std::optional<TextField> parse_text_field(std::string_view name) noexcept {
  if (auto i = find_name(kFieldNames, name)) return static_cast<TextField>(*i);
  return std::nullopt;
}

std::string_view to_string(TextField f) noexcept {
  return kFieldNames[static_cast<std::size_t>(f)];
}

const std::string& text_of(const SampleRecord& r, TextField f) noexcept {
  switch (f) {
    case TextField::kSourceText:
      return r.source_text;
    case TextField::kGlobalCaption:
      return r.global_caption;
    case TextField::kFacialRaw:
      return r.facial_raw;
    case TextField::kFacialCaption:
      return r.facial_caption;
    case TextField::kCaption:
      break;
  }
  return r.caption;
}

void SampleRecord::advance_to(Stage next) {
  if (status == Stage::kRejected && next != Stage::kRejected) {
    throw Error(ErrorCode::kInvalidArgument,
                "record '" + id + "' is rejected and cannot move to " +
                    std::string(to_string(next)));
  }
  if (next > status) status = next;
}

void SampleRecord::reject(RejectReason why) {
  if (status == Stage::kRejected) return;  // first reason wins
  status = Stage::kRejected;
  reason = why;
}

Json to_json(const SampleRecord& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["image"] = r.image_ref;
  if (r.width > 0) j["width"] = r.width;
  if (r.height > 0) j["height"] = r.height;
  Json faces = Json::array();
  for (const auto& f : r.faces) {
    faces.push_back(Json{{"bbox", {f.bbox.x, f.bbox.y, f.bbox.w, f.bbox.h}},
                         {"conf", f.conf}});
  }
  j["faces"] = std::move(faces);
  Json attrs = Json::array();
  for (const auto& a : r.attrs) {
    attrs.push_back(Json{{"name", attribute_name(a.name)}, {"p", a.p}});
  }
  j["attrs"] = std::move(attrs);
  auto put_text = [&j](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put_text("source_text", r.source_text);
  put_text("global_caption", r.global_caption);
  put_text("facial_raw", r.facial_raw);
  put_text("facial_caption", r.facial_caption);
  put_text("caption", r.caption);
  j["status"] = to_string(r.status);
  if (r.reason) j["reason"] = to_string(*r.reason);
  for (const auto& [key, value] : r.extra.items()) j[key] = value;
  return j;
}

SampleRecord record_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "<record>", "expected an object");
  SampleRecord r;

  const auto id = j.find("id");
  if (id == j.end()) throw SchemaError(line, "id", "missing");
  if (!id->is_string() || id->get_ref<const std::string&>().empty()) {
    throw SchemaError(line, "id", "expected a non-empty string");
  }
  r.id = id->get<std::string>();
  r.image_ref = get_string(j, "image", line);

  for (const char* dim : {"width", "height"}) {
    const auto it = j.find(dim);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw SchemaError(line, dim, "expected a non-negative integer");
    }
    (dim[0] == 'w' ? r.width : r.height) = it->get<std::int64_t>();
  }

  if (const auto faces = j.find("faces"); faces != j.end() && !faces->is_null()) {
    if (!faces->is_array()) throw SchemaError(line, "faces", "expected an array");
    for (const auto& f : *faces) {
      FaceDetection det = face_from_json(f, line);
      if (r.width > 0 && det.bbox.x + det.bbox.w > static_cast<double>(r.width)) {
        throw SchemaError(line, "bbox", "extends past image width");
      }
      if (r.height > 0 && det.bbox.y + det.bbox.h > static_cast<double>(r.height)) {
        throw SchemaError(line, "bbox", "extends past image height");
      }
      r.faces.push_back(det);
    }
  }

  if (const auto attrs = j.find("attrs"); attrs != j.end() && !attrs->is_null()) {
    if (!attrs->is_array()) throw SchemaError(line, "attrs", "expected an array");
    std::array<bool, kAttributeCount> seen{};
    for (const auto& a : *attrs) {
      if (!a.is_object()) throw SchemaError(line, "attrs", "expected an object");
      const auto name = a.find("name");
      if (name == a.end() || !name->is_string()) {
        throw SchemaError(line, "name", "missing attribute name");
      }
      const auto parsed = parse_attribute(name->get_ref<const std::string&>());
      if (!parsed) {
        throw SchemaError(line, "name",
                          "unknown attribute '" + name->get<std::string>() + "'");
      }
      if (seen[index_of(*parsed)]) {
        throw SchemaError(line, "name",
                          "duplicate attribute '" + name->get<std::string>() + "'");
      }
      seen[index_of(*parsed)] = true;
      const auto p = a.find("p");
      if (p == a.end()) throw SchemaError(line, "p", "missing");
      r.attrs.push_back({*parsed, get_unit(*p, "p", line)});
    }
  }

  r.source_text = get_string(j, "source_text", line);
  r.global_caption = get_string(j, "global_caption", line);
  r.facial_raw = get_string(j, "facial_raw", line);
  r.facial_caption = get_string(j, "facial_caption", line);
  r.caption = get_string(j, "caption", line);

  if (const auto st = j.find("status"); st != j.end() && !st->is_null()) {
    const auto parsed = st->is_string() ? parse_stage(st->get_ref<const std::string&>())
                                        : std::nullopt;
    if (!parsed) throw SchemaError(line, "status", "unknown status " + st->dump());
    r.status = *parsed;
  }
  if (const auto rs = j.find("reason"); rs != j.end() && !rs->is_null()) {
    const auto parsed = rs->is_string()
                            ? parse_reject_reason(rs->get_ref<const std::string&>())
                            : std::nullopt;
    if (!parsed) throw SchemaError(line, "reason", "unknown reason code " + rs->dump());
    r.reason = *parsed;
  }
  if (r.status == Stage::kRejected && !r.reason) {
    throw SchemaError(line, "reason", "rejected record without a reason code");
  }
  if (r.status != Stage::kRejected && r.reason) {
    throw SchemaError(line, "reason", "reason code on a record that is not rejected");
  }

  for (const auto& [key, value] : j.items()) {
    if (!known_keys().contains(key)) r.extra[key] = value;
  }
  return r;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        Rng& rng) {
  if (n > population) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample size " + std::to_string(n) + " exceeds population " +
                    std::to_string(population));
  }
  std::vector<std::size_t> idx(population);
  for (std::size_t i = 0; i < population; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace humancorpus
