#include "wslab/data/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace wslab::data {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw, std::size_t line_no) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput("malformed row " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
  return value;
}

// Reads non-empty lines as rows of numbers with a consistent column count.
template <typename T>
std::vector<T> read_table(std::istream& in, Index& rows, Index& cols) {
  std::vector<T> values;
  rows = 0;
  cols = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (cols < 0) {
      cols = static_cast<Index>(fields.size());
    } else if (static_cast<Index>(fields.size()) != cols) {
      throw InvalidInput("inconsistent column count at row " + std::to_string(line_no) + ": expected " +
                         std::to_string(cols) + ", got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(parse_number<T>(f, line_no));
    ++rows;
  }
  if (rows == 0) throw InvalidInput("no rows");
  return values;
}

}  // namespace

LabelMatrix read_label_matrix(std::istream& in, std::optional<int> num_classes) {
  Index rows = 0;
  Index cols = 0;
  std::vector<int> votes = read_table<int>(in, rows, cols);
  int classes = 2;
  if (num_classes) {
    classes = *num_classes;
  } else {
    for (const int v : votes) classes = std::max(classes, v);
  }
  return LabelMatrix(rows, cols, classes, std::move(votes));
}

LabelMatrix load_label_matrix(const std::filesystem::path& path, std::optional<int> num_classes) {
  auto in = open_input(path);
  return read_label_matrix(in, num_classes);
}

void save_label_matrix(const std::filesystem::path& path, const LabelMatrix& lm) {
  auto out = open_output(path);
  for (Index i = 0; i < lm.rows(); ++i) {
    for (Index j = 0; j < lm.num_lfs(); ++j) {
      if (j) out << ',';
      out << lm.vote(i, j);
    }
    out << '\n';
  }
}

LabelMatrix parse_probabilistic_matrix(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("probabilistic matrix: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw InvalidInput("probabilistic matrix: no rows");
  const auto n = static_cast<Index>(doc.size());
  const auto m = static_cast<Index>(doc[0].size());
  if (m == 0 || !doc[0][0].is_array()) throw InvalidInput("probabilistic matrix: expected shape [N][m][C]");
  const auto c = static_cast<int>(doc[0][0].size());
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(n * m * c));
  for (const auto& row : doc) {
    if (!row.is_array() || static_cast<Index>(row.size()) != m) throw InvalidInput("probabilistic matrix: ragged LF axis");
    for (const auto& slice : row) {
      if (!slice.is_array() || static_cast<int>(slice.size()) != c)
        throw InvalidInput("probabilistic matrix: ragged class axis");
      for (const auto& p : slice) probs.push_back(p.get<double>());
    }
  }
  return LabelMatrix::probabilistic(n, m, c, std::move(probs));
}

LabelMatrix load_probabilistic_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_probabilistic_matrix(ss.str());
}

Matrix read_features(std::istream& in) {
  Index rows = 0;
  Index cols = 0;
  const std::vector<double> values = read_table<double>(in, rows, cols);
  Matrix out(rows, cols);
  std::copy(values.begin(), values.end(), out.data());
  return out;
}

Matrix load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_features(in);
}

namespace {

void write_rows(std::ostream& out, const Matrix& m) {
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace

void save_features(const std::filesystem::path& path, const Matrix& features) {
  auto out = open_output(path);
  write_rows(out, features);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  Index rows = 0;
  Index cols = 0;
  std::vector<int> labels = read_table<int>(in, rows, cols);
  if (cols != 1) throw InvalidInput("labels file must have exactly one column");
  return labels;
}

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_output(path);
  for (const int y : labels) out << y << '\n';
}

void save_soft_labels(const std::filesystem::path& path, const Matrix& probs) {
  auto out = open_output(path);
  write_rows(out, probs);
}

}  // namespace wslab::data
