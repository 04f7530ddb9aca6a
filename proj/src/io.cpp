#include "fidcov/io.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fidcov {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& text, double* out) {
  if (text.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return false;
  *out = v;
  return true;
}

}  // namespace

ObservationSet ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_number = 0;
  std::size_t width = 0;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    std::size_t bad_cell = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], &values[c])) {
        numeric = false;
        bad_cell = c;
        break;
      }
    }
    if (first_content_row && !numeric) continue;  // header row
    if (!numeric) {
      throw std::runtime_error("line " + std::to_string(line_number) + ": non-numeric cell '" +
                               cells[bad_cell] + "' in column " + std::to_string(bad_cell + 1));
    }
    if (first_content_row) {
      width = values.size();
      first_content_row = false;
    } else if (values.size() != width) {
      throw std::runtime_error("line " + std::to_string(line_number) + ": expected " +
                               std::to_string(width) + " fields, got " +
                               std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error("empty input file: " + path);
  Eigen::MatrixXd m(rows.size(), width);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) m(r, c) = rows[r][c];
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (m.col(c).cwiseAbs().maxCoeff() == 0.0) {
      throw std::runtime_error("column " + std::to_string(c + 1) +
                               " is constant zero; remove it before fitting");
    }
  }
  return ObservationSet(std::move(m));
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  return ingest_csv(path).rows();
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

TraceWriter::TraceWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open trace file: " + path);
}

void TraceWriter::write(const TraceRecord& record) {
  nlohmann::json j{{"iteration", record.iteration},
                   {"phase", record.burnin ? "burnin" : "sample"},
                   {"log_density", record.log_density}};
  if (record.kept) {
    j["model"] = record.model;
    j["model_size"] = record.model_size;
  }
  out_ << j.dump() << '\n';
}

}  // namespace fidcov
