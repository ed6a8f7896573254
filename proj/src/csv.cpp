#include "lscae/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "lscae/error.hpp"

namespace lscae {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
  }
  if (rows.empty()) fail(ErrorKind::ParseError, path.string() + " is empty");

  std::vector<std::string> header;
  bool has_header = false;
  for (const auto& cell : rows.front())
    if (!parse_number(cell)) has_header = true;
  if (has_header) {
    for (const auto& cell : rows.front()) header.push_back(trim(cell));
    rows.erase(rows.begin());
  }
  const std::size_t width = has_header ? header.size() : (rows.empty() ? 0 : rows.front().size());

  std::optional<std::size_t> label_index;
  if (label_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == *label_column) label_index = j;
    if (!label_index) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(label_column->data(),
                                             label_column->data() + label_column->size(), idx);
      if (ec != std::errc() || ptr != label_column->data() + label_column->size() || idx >= width)
        fail(ErrorKind::ParseError, "label column '" + *label_column + "' not found");
      label_index = idx;
    }
  }

  const std::size_t d = width - (label_index ? 1 : 0);
  Dataset out;
  out.x = Matrix(rows.size(), d);
  if (label_index) out.labels = std::vector<int>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != width)
      fail(ErrorKind::ParseError, "row " + std::to_string(i + 1) + " has " +
                                      std::to_string(row.size()) + " cells, expected " +
                                      std::to_string(width));
    std::size_t c = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const auto v = parse_number(row[j]);
      if (!v) fail(ErrorKind::ParseError, "non-numeric cell '" + row[j] + "' in row " +
                                              std::to_string(i + 1));
      if (label_index && j == *label_index) {
        if (*v != std::floor(*v) || *v < 0)
          fail(ErrorKind::ParseError, "label must be a non-negative integer");
        (*out.labels)[i] = static_cast<int>(*v);
      } else {
        out.x(i, c++) = *v;
      }
    }
  }
  if (has_header) {
    for (std::size_t j = 0; j < width; ++j)
      if (!label_index || j != *label_index) out.feature_names.push_back(header[j]);
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const std::string& label_name) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  std::ostringstream buf;
  for (std::size_t j = 0; j < data.d(); ++j) {
    if (j) buf << ',';
    buf << quote_if_needed(data.feature_names.empty() ? "f" + std::to_string(j)
                                                      : data.feature_names[j]);
  }
  if (data.labels) buf << (data.d() ? "," : "") << quote_if_needed(label_name);
  buf << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.d(); ++j) {
      if (j) buf << ',';
      buf << format_double(data.x(i, j));
    }
    if (data.labels) buf << (data.d() ? "," : "") << (*data.labels)[i];
    buf << '\n';
  }
  out << buf.str();
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace lscae
