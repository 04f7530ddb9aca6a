#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "fidcov/matrix.hpp"
#include "fidcov/samplers.hpp"

namespace fidcov {

/// Reads a rectangular numeric CSV, one observation per row. A header row is
/// skipped when its first row contains any non-numeric cell. Ragged rows,
/// non-numeric cells, empty files, and all-zero columns are rejected with
/// line-numbered messages.
ObservationSet ingest_csv(const std::string& path);

Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

void write_json_file(const std::string& path, const nlohmann::json& j);

/// Incremental newline-delimited JSON trace writer.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write(const TraceRecord& record);

 private:
  std::ofstream out_;
};

}  // namespace fidcov
