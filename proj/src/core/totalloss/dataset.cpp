#include "totalloss/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "totalloss/error.hpp"
#include "totalloss/numeric_text.hpp"

namespace totalloss {

namespace {

// Splits one CSV line. Double-quoted fields may contain commas; "" inside a
// quoted field is a literal quote.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::string cell_ref(std::size_t line_no, const std::string& column) {
  return "line " + std::to_string(line_no) + ", column '" + column + "'";
}

double parse_cell(std::string_view cell, std::size_t line_no, const std::string& column) {
  const auto v = parse_double(cell);
  if (!v || !std::isfinite(*v)) {
    throw Error(ErrorCode::NonNumericCell,
                "non-numeric value '" + std::string(cell) + "' at " + cell_ref(line_no, column));
  }
  if (*v < 0.0) {
    throw Error(ErrorCode::NegativeInput, "negative value at " + cell_ref(line_no, column));
  }
  return *v;
}

}  // namespace

const PredictionColumn& Dataset::column(std::string_view name) const {
  for (const auto& c : prediction_columns) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::UnknownColumn, "no prediction column named '" + std::string(name) + "'");
}

std::vector<PredictionRecord> Dataset::records(std::string_view column_name) const {
  for (std::size_t i = 0; i < prediction_columns.size(); ++i) {
    if (prediction_columns[i].name == column_name) return records(i);
  }
  throw Error(ErrorCode::UnknownColumn, "no prediction column named '" + std::string(column_name) + "'");
}

std::vector<PredictionRecord> Dataset::records(std::size_t column_index) const {
  if (column_index >= prediction_columns.size()) {
    throw Error(ErrorCode::UnknownColumn, "prediction column index out of range");
  }
  const auto& values = prediction_columns[column_index].values;
  std::vector<PredictionRecord> out;
  out.reserve(unit_ids.size());
  for (std::size_t i = 0; i < unit_ids.size(); ++i) out.push_back({unit_ids[i], actuals[i], values[i]});
  return out;
}

Dataset parse_dataset_text(std::string_view text) {
  // UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (!trim(line).empty()) lines.emplace_back(line_no, line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, "file is empty");

  const auto header = split_csv_line(lines[0].second);
  std::ptrdiff_t id_col = -1;
  std::ptrdiff_t actual_col = -1;
  std::vector<std::size_t> prediction_cols;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.insert(header[c]).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate header column '" + header[c] + "'");
    }
    if (header[c] == "unit_id") {
      id_col = static_cast<std::ptrdiff_t>(c);
    } else if (header[c] == "actual") {
      actual_col = static_cast<std::ptrdiff_t>(c);
    } else {
      prediction_cols.push_back(c);
    }
  }
  if (id_col < 0) throw Error(ErrorCode::MissingColumn, "header has no 'unit_id' column");
  if (actual_col < 0) throw Error(ErrorCode::MissingColumn, "header has no 'actual' column");
  if (prediction_cols.empty()) throw Error(ErrorCode::MissingColumn, "header has no prediction column");
  if (lines.size() < 2) throw Error(ErrorCode::EmptyFile, "file has a header but no data rows");

  Dataset ds;
  for (auto c : prediction_cols) ds.prediction_columns.push_back({header[c], {}});
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [no, line] = lines[r];
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::NonNumericCell, "line " + std::to_string(no) + " has " + std::to_string(fields.size()) +
                                                 " fields, header has " + std::to_string(header.size()));
    }
    const auto& id = fields[static_cast<std::size_t>(id_col)];
    if (id.empty()) throw Error(ErrorCode::NonNumericCell, "empty unit_id on line " + std::to_string(no));
    if (!ids.insert(id).second) {
      throw Error(ErrorCode::DuplicateUnitId, "duplicate unit_id '" + id + "' on line " + std::to_string(no));
    }
    ds.unit_ids.push_back(id);
    ds.actuals.push_back(parse_cell(fields[static_cast<std::size_t>(actual_col)], no, "actual"));
    for (std::size_t k = 0; k < prediction_cols.size(); ++k) {
      ds.prediction_columns[k].values.push_back(parse_cell(fields[prediction_cols[k]], no, header[prediction_cols[k]]));
    }
  }
  return ds;
}

Dataset parse_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_text(buf.str());
}

}  // namespace totalloss
