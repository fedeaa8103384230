#include "causagen/csv.hpp"

#include "causagen/error.hpp"
#include "causagen/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace causagen {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw DataError("csv: stray quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

namespace {

double parse_number(const std::string& cell, const std::string& column, std::size_t row) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw DataError("non-numeric cell '" + cell + "' in numeric column '" + column + "' (row " +
                    std::to_string(row) + ")");
  return v;
}

}  // namespace

Table parse_table(std::string_view text, const Schema& schema) {
  auto records = parse_csv(text);
  if (records.empty()) throw DataError("csv: missing header row");
  if (records.front() != schema.names()) throw DataError("csv: header does not match schema");
  // A trailing blank line parses as one empty field.
  while (records.size() > 1 && records.back().size() == 1 && records.back()[0].empty())
    records.pop_back();
  const auto n = static_cast<Eigen::Index>(records.size() - 1);
  const auto d = static_cast<Eigen::Index>(schema.size());
  Eigen::MatrixXd values(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i) + 1];
    const auto row = static_cast<std::size_t>(i) + 1;
    if (static_cast<Eigen::Index>(rec.size()) != d)
      throw DataError("csv: ragged row " + std::to_string(row) + " (" + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(d) + ")");
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& col = schema[static_cast<std::size_t>(j)];
      const auto& cell = rec[static_cast<std::size_t>(j)];
      if (cell.empty()) throw DataError("missing value in column '" + col.name + "' (row " + std::to_string(row) + ")");
      if (col.is_categorical()) {
        const auto k = col.category_index(cell);
        if (!k) throw DataError("unknown category '" + cell + "' in column '" + col.name + "'");
        values(i, j) = static_cast<double>(*k);
      } else {
        values(i, j) = parse_number(cell, col.name, row);
      }
    }
  }
  return Table(schema, std::move(values));
}

Table load_table(const std::filesystem::path& path, const Schema& schema) {
  return parse_table(read_file(path), schema);
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto records = parse_csv(line);
  if (records.empty()) throw DataError("csv: missing header row in " + path.string());
  return records.front();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw DataError("cannot format number");
  return std::string(buf, ptr);
}

std::string quote_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_table(const Table& t) {
  std::string out;
  const auto& schema = t.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (j) out.push_back(',');
    out += quote_csv_field(schema[j].name);
  }
  out.push_back('\n');
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (j) out.push_back(',');
      const auto& col = schema[static_cast<std::size_t>(j)];
      const double v = t.values()(i, j);
      if (col.is_categorical())
        out += quote_csv_field(col.categories[static_cast<std::size_t>(v)]);
      else
        out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

void save_table(const std::filesystem::path& path, const Table& t) {
  write_file_atomic(path, format_table(t));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace causagen
