#include "humancorpus/manifest.hpp"

#include <iostream>

namespace humancorpus {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kGrammar: return "grammar";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kLlmFailure: return "llm_failure";
    case ErrorCode::kShortfall: return "shortfall";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

ManifestReader::ManifestReader(const std::string& path, BadLinePolicy policy)
    : policy_(policy) {
  if (path == "-") {
    in_ = &std::cin;
    return;
  }
  owned_ = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*owned_) throw Error(ErrorCode::kIo, "cannot open manifest '" + path + "'");
  in_ = owned_.get();
}

ManifestReader::ManifestReader(std::istream& in, BadLinePolicy policy)
    : in_(&in), policy_(policy) {}

std::optional<SampleRecord> ManifestReader::next() {
  std::string text;
  while (std::getline(*in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Json j;
      try {
        j = Json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(line_, "<line>", std::string("invalid JSON: ") + e.what());
      }
      SampleRecord r = record_from_json(j, line_);
      if (!seen_ids_.insert(r.id).second) {
        throw SchemaError(line_, "id", "duplicate id '" + r.id + "'");
      }
      return r;
    } catch (const SchemaError& e) {
      if (policy_ == BadLinePolicy::kThrow) throw;
      errors_.push_back(e);
    }
  }
  if (in_->bad()) throw Error(ErrorCode::kIo, "read failure near line " + std::to_string(line_));
  return std::nullopt;
}

ManifestWriter::ManifestWriter(const std::string& path) : path_(path) {
  if (path == "-") {
    out_ = &std::cout;
    return;
  }
  owned_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*owned_) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out_ = owned_.get();
}

ManifestWriter::ManifestWriter(std::ostream& out) : out_(&out) {}

void ManifestWriter::write(const SampleRecord& r) {
  if (!ids_.insert(r.id).second) {
    throw Error(ErrorCode::kDuplicateId, "duplicate id '" + r.id + "' in manifest");
  }
  *out_ << dump_record(r) << '\n';
  if (!*out_) throw Error(ErrorCode::kIo, "write failure on '" + path_ + "'");
  ++count_;
}

void ManifestWriter::flush() {
  out_->flush();
  if (!*out_) throw Error(ErrorCode::kIo, "flush failure on '" + path_ + "'");
}

std::string dump_record(const SampleRecord& r) {
  // Invalid UTF-8 is replaced rather than aborting a long batch.
  return to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<SampleRecord> read_manifest(const std::string& path) {
  ManifestReader reader(path);
  std::vector<SampleRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

std::vector<SampleRecord> read_manifest(std::istream& in) {
  ManifestReader reader(in);
  std::vector<SampleRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

std::size_t write_manifest(std::span<const SampleRecord> records,
                           const std::string& path) {
  ManifestWriter writer(path);
  for (const auto& r : records) writer.write(r);
  writer.flush();
  return writer.count();
}

std::size_t write_manifest(std::span<const SampleRecord> records, std::ostream& out) {
  ManifestWriter writer(out);
  for (const auto& r : records) writer.write(r);
  writer.flush();
  return writer.count();
}

}  // namespace humancorpus
