#pragma once

#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "humancorpus/error.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

// Manifests are JSON Lines: UTF-8, one SampleRecord object per line. The path
// "-" means stdin / stdout.

enum class BadLinePolicy {
  kThrow,    // first malformed line raises SchemaError
  kCollect,  // malformed lines are recorded in errors() and skipped
};

class ManifestReader {
 public:
  explicit ManifestReader(const std::string& path,
                          BadLinePolicy policy = BadLinePolicy::kThrow);
  /// Reads from a caller-owned stream.
  explicit ManifestReader(std::istream& in,
                          BadLinePolicy policy = BadLinePolicy::kThrow);

  ManifestReader(const ManifestReader&) = delete;
  ManifestReader& operator=(const ManifestReader&) = delete;

  /// Next record in file order, or nullopt at end of input. Blank lines are
  /// skipped.
  std::optional<SampleRecord> next();

  std::size_t line() const noexcept { return line_; }
  const std::vector<SchemaError>& errors() const noexcept { return errors_; }

 private:
  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  BadLinePolicy policy_;
  std::size_t line_ = 0;
  std::vector<SchemaError> errors_;
  std::unordered_set<std::string> seen_ids_;
};

class ManifestWriter {
 public:
  explicit ManifestWriter(const std::string& path);
  explicit ManifestWriter(std::ostream& out);

  ManifestWriter(const ManifestWriter&) = delete;
  ManifestWriter& operator=(const ManifestWriter&) = delete;

  /// Throws Error(kDuplicateId) if the id was already written.
  void write(const SampleRecord& r);
  void flush();
  std::size_t count() const noexcept { return count_; }

 private:
  std::unique_ptr<std::ofstream> owned_;
  std::ostream* out_;
  std::string path_;
  std::size_t count_ = 0;
  std::unordered_set<std::string> ids_;
};

std::vector<SampleRecord> read_manifest(const std::string& path);
std::vector<SampleRecord> read_manifest(std::istream& in);

/// Returns the number of records written.
std::size_t write_manifest(std::span<const SampleRecord> records,
                           const std::string& path);
std::size_t write_manifest(std::span<const SampleRecord> records,
                           std::ostream& out);

/// Serialized form of one record (no trailing newline).
std::string dump_record(const SampleRecord& r);

}  // namespace humancorpus
