#include "rasp/ingest.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rasp/codec.h"
#include "rasp/storage.h"

namespace rasp {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string_view kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric: return "num";
    case ColumnKind::kCategorical: return "cat";
    case ColumnKind::kPayload: return "payload";
  }
  return "num";
}

ColumnKind parse_kind(std::string_view s) {
  if (s == "num") return ColumnKind::kNumeric;
  if (s == "cat") return ColumnKind::kCategorical;
  if (s == "payload") return ColumnKind::kPayload;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown column kind '" + std::string(s) + "' (num|cat|payload)");
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Denormalizing costs an ulp or two; 12 significant digits hides that
// without touching real precision in the source data.
std::string format_display(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<ColumnSchema> parse_schema(std::string_view text) {
  std::vector<ColumnSchema> out;
  for (const std::string& item : split_fields(text, ',')) {
    const std::string_view s = trim(item);
    const auto colon = s.rfind(':');
    enforce(colon != std::string_view::npos && colon > 0, ErrorCode::kInvalidArgument,
            "schema entry '" + std::string(s) + "' is not name:kind");
    ColumnSchema c{std::string(trim(s.substr(0, colon))), parse_kind(trim(s.substr(colon + 1)))};
    for (const auto& prev : out) {
      enforce(prev.name != c.name, ErrorCode::kInvalidArgument, "duplicate column " + c.name);
    }
    out.push_back(std::move(c));
  }
  enforce(!out.empty(), ErrorCode::kInvalidArgument, "empty schema");
  return out;
}

std::vector<std::string> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  enforce(!quoted, ErrorCode::kInvalidArgument, "unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::size_t> DatasetManifest::searchable_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].kind != ColumnKind::kPayload) out.push_back(i);
  }
  return out;
}

std::size_t DatasetManifest::dimension_of(std::string_view name) const {
  const auto cols = searchable_columns();
  for (std::size_t d = 0; d < cols.size(); ++d) {
    if (columns[cols[d]].name == name) return d;
  }
  for (const auto& c : columns) {
    enforce(c.name != name, ErrorCode::kInvalidArgument,
            "column '" + std::string(name) + "' is a payload column and cannot be queried");
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown column '" + std::string(name) + "'");
}

const ManifestColumn& DatasetManifest::searchable(std::size_t dim) const {
  const auto cols = searchable_columns();
  enforce(dim < cols.size(), ErrorCode::kInvalidArgument, "dimension out of range");
  return columns[cols[dim]];
}

double DatasetManifest::category_code(std::size_t dim, std::string_view category) const {
  const ManifestColumn& c = searchable(dim);
  for (std::size_t j = 0; j < c.categories.size(); ++j) {
    if (c.categories[j] == category) return static_cast<double>(j + 1);
  }
  throw Error(ErrorCode::kUnknownCategory,
              "unknown category '" + std::string(category) + "' for column " + c.name);
}

double DatasetManifest::raw_value(std::size_t dim, std::string_view literal) const {
  const ManifestColumn& c = searchable(dim);
  if (c.kind == ColumnKind::kCategorical) {
    // A category name wins; a bare number is taken as the code itself.
    for (std::size_t j = 0; j < c.categories.size(); ++j) {
      if (c.categories[j] == literal) return static_cast<double>(j + 1);
    }
    if (auto v = parse_number(literal)) return *v;
    return category_code(dim, literal);
  }
  const auto v = parse_number(literal);
  enforce(v.has_value(), ErrorCode::kInvalidArgument,
          "'" + std::string(literal) + "' is not a number for column " + c.name);
  return *v;
}

IngestResult ingest_text(std::string_view text, const std::vector<ColumnSchema>& schema,
                         char delimiter, std::string source) {
  IngestResult out;
  DatasetManifest& m = out.manifest;
  m.source = std::move(source);
  for (const auto& s : schema) m.columns.push_back({s.name, s.kind, {}});
  const auto searchable = m.searchable_columns();
  enforce(!searchable.empty(), ErrorCode::kInvalidArgument, "schema has no searchable column");

  std::vector<std::map<std::string, std::size_t, std::less<>>> codes(schema.size());
  std::vector<double> raw;
  std::vector<std::vector<std::string>> payloads;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, delimiter);
    if (!header_seen) {
      header_seen = true;
      enforce(fields.size() == schema.size(), ErrorCode::kInvalidArgument,
              "header has " + std::to_string(fields.size()) + " columns, schema has " +
                  std::to_string(schema.size()));
      for (std::size_t i = 0; i < fields.size(); ++i) {
        enforce(trim(fields[i]) == schema[i].name, ErrorCode::kInvalidArgument,
                "header column " + std::to_string(i + 1) + " is '" + std::string(trim(fields[i])) +
                    "', schema says '" + schema[i].name + "'");
      }
      continue;
    }
    if (fields.size() != schema.size()) {
      out.rejected.push_back({lineno, "expected " + std::to_string(schema.size()) +
                                          " fields, found " + std::to_string(fields.size())});
      continue;
    }
    std::string reason;
    std::vector<double> row;
    std::vector<std::string> payload;
    for (std::size_t i = 0; i < fields.size() && reason.empty(); ++i) {
      const std::string_view f = trim(fields[i]);
      if (schema[i].kind == ColumnKind::kPayload) {
        payload.emplace_back(f);
        continue;
      }
      if (f.empty() || f == "?") {
        reason = "missing value in column " + schema[i].name;
      } else if (schema[i].kind == ColumnKind::kNumeric) {
        if (auto v = parse_number(f)) row.push_back(*v);
        else reason = "'" + std::string(f) + "' is not a number in column " + schema[i].name;
      } else {
        row.push_back(0.0);  // code assigned below, once the row is known good
      }
    }
    if (!reason.empty()) {
      out.rejected.push_back({lineno, reason});
      continue;
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (schema[i].kind == ColumnKind::kPayload) continue;
      if (schema[i].kind == ColumnKind::kCategorical) {
        const std::string name(trim(fields[i]));
        auto& table = codes[i];
        auto it = table.find(name);
        if (it == table.end()) {
          m.columns[i].categories.push_back(name);
          it = table.emplace(name, m.columns[i].categories.size()).first;
        }
        row[k] = static_cast<double>(it->second);
      }
      ++k;
    }
    raw.insert(raw.end(), row.begin(), row.end());
    payloads.push_back(std::move(payload));
  }
  enforce(header_seen, ErrorCode::kInvalidArgument, "input has no header row");
  const std::size_t n = payloads.size();
  enforce(n >= 2, ErrorCode::kInvalidArgument, "need at least two usable rows");

  out.raw = Matrix(n, searchable.size(), std::move(raw));
  auto [normalized, norm] = normalize_dataset(out.raw);
  m.normalization = std::move(norm);
  m.records = n;
  out.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = normalized.row(i);
    out.records.push_back({Vec(r.begin(), r.end()), encode_payload(payloads[i])});
  }
  return out;
}

IngestResult ingest_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema,
                        char delimiter) {
  const Bytes bytes = read_file(path);
  return ingest_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                     schema, delimiter, path.string());
}

Bytes encode_payload(const std::vector<std::string>& fields) {
  if (fields.empty()) return {};
  ByteWriter w;
  w.count(fields.size());
  for (const auto& f : fields) w.str(f);
  return std::move(w).take();
}

std::vector<std::string> decode_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return {};
  ByteReader r(bytes);
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 4, ErrorCode::kMalformedMessage, "payload field count too large");
  std::vector<std::string> out(n);
  for (auto& f : out) f = r.str();
  r.expect_done();
  return out;
}

std::vector<std::string> render_row(const DatasetManifest& m, const PlainRecord& rec) {
  const auto payload = decode_payload(rec.payload);
  std::vector<std::string> out;
  std::size_t dim = 0, p = 0;
  for (const auto& c : m.columns) {
    if (c.kind == ColumnKind::kPayload) {
      out.push_back(p < payload.size() ? payload[p] : std::string());
      ++p;
      continue;
    }
    enforce(dim < rec.values.size(), ErrorCode::kInvalidArgument, "record narrower than manifest");
    const double raw = m.normalization.denormalize(dim, rec.values[dim]);
    if (c.kind == ColumnKind::kCategorical) {
      const auto code = static_cast<long long>(std::llround(raw));
      out.push_back(code >= 1 && static_cast<std::size_t>(code) <= c.categories.size()
                        ? c.categories[code - 1]
                        : format_display(raw));
    } else {
      out.push_back(format_display(raw));
    }
    ++dim;
  }
  return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json cols = json::array();
  for (const auto& c : m.columns) {
    json jc = {{"name", c.name}, {"kind", std::string(kind_name(c.kind))}};
    if (c.kind == ColumnKind::kCategorical) jc["categories"] = c.categories;
    cols.push_back(std::move(jc));
  }
  json j = {{"source", m.source},
            {"records", m.records},
            {"columns", cols},
            {"mean", m.normalization.mean},
            {"stddev", m.normalization.stddev}};
  return j.dump(2);
}

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    DatasetManifest m;
    m.source = j.at("source").get<std::string>();
    m.records = j.at("records").get<std::size_t>();
    for (const auto& jc : j.at("columns")) {
      ManifestColumn c;
      c.name = jc.at("name").get<std::string>();
      c.kind = parse_kind(jc.at("kind").get<std::string>());
      if (jc.contains("categories")) c.categories = jc.at("categories").get<std::vector<std::string>>();
      m.columns.push_back(std::move(c));
    }
    m.normalization.mean = j.at("mean").get<std::vector<double>>();
    m.normalization.stddev = j.at("stddev").get<std::vector<double>>();
    enforce(m.normalization.mean.size() == m.dimensions() &&
                m.normalization.stddev.size() == m.dimensions(),
            ErrorCode::kInvalidArgument, "manifest normalization does not match its columns");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad manifest: ") + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  const std::string s = manifest_to_json(m);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return manifest_from_json(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
}

std::string table_to_csv(const Matrix& table, const std::vector<std::string>& names) {
  enforce(names.size() == table.cols(), ErrorCode::kInvalidArgument, "one name per column");
  std::string out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out += ',';
    out += names[j];
  }
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      if (j) out += ',';
      out += format_double(table(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace rasp
