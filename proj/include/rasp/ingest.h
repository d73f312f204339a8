#pragma once

// CSV ingestion. A schema names every column and its kind:
//   "age:num,workclass:cat,notes:payload"
// num and cat columns are searchable; categories get codes 1..m in order of
// first appearance, then every searchable column is z-normalized. Payload
// columns ride along inside the envelope as opaque strings.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rasp/linalg.h"
#include "rasp/perturbation.h"

namespace rasp {

enum class ColumnKind : std::uint8_t { kNumeric, kCategorical, kPayload };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

std::vector<ColumnSchema> parse_schema(std::string_view text);

struct ManifestColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> categories;  // code j is categories[j - 1]

  friend bool operator==(const ManifestColumn&, const ManifestColumn&) = default;
};

struct DatasetManifest {
  std::string source;
  std::vector<ManifestColumn> columns;  // all columns, file order
  Normalization normalization;          // per searchable column
  std::size_t records = 0;

  std::vector<std::size_t> searchable_columns() const;
  std::size_t dimensions() const { return searchable_columns().size(); }
  // Searchable dimension index for a column name; throws on unknown or payload columns.
  std::size_t dimension_of(std::string_view name) const;
  const ManifestColumn& searchable(std::size_t dim) const;
  // Category code (1-based); Error(kUnknownCategory) when absent.
  double category_code(std::size_t dim, std::string_view category) const;
  // Raw (unnormalized) value for a literal in a filter or query point.
  double raw_value(std::size_t dim, std::string_view literal) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<PlainRecord> records;  // normalized values, payload strings
  Matrix raw;                        // searchable columns before normalization
  DatasetManifest manifest;
  std::vector<RejectedRow> rejected;
};

// Rows with an empty or "?" field, the wrong field count, or an unparsable
// number are rejected with a diagnostic and skipped.
IngestResult ingest_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema,
                        char delimiter = ',');
IngestResult ingest_text(std::string_view text, const std::vector<ColumnSchema>& schema,
                         char delimiter = ',', std::string source = "<memory>");

// Splits one delimited line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_fields(std::string_view line, char delimiter);

Bytes encode_payload(const std::vector<std::string>& fields);
std::vector<std::string> decode_payload(std::span<const std::uint8_t> bytes);

// Full original row (file column order) from a decrypted record.
std::vector<std::string> render_row(const DatasetManifest& m, const PlainRecord& rec);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(std::string_view text);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

// CSV text for a numeric table; the header row is names.
std::string table_to_csv(const Matrix& table, const std::vector<std::string>& names);

}  // namespace rasp
