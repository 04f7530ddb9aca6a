#include "fidcov/models.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fidcov {

SparsityPattern::SparsityPattern(int dim, std::vector<std::vector<int>> zero_cols)
    : dim_(dim), zero_cols_(std::move(zero_cols)) {
  if (dim_ < 1) throw std::invalid_argument("SparsityPattern: dim must be positive");
  if (static_cast<int>(zero_cols_.size()) != dim_) {
    throw std::invalid_argument("SparsityPattern: one zero set per row required");
  }
  for (auto& row : zero_cols_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (int j : row) {
      if (j < 0 || j >= dim_) throw std::invalid_argument("SparsityPattern: column out of range");
    }
    if (static_cast<int>(row.size()) >= dim_) {
      throw std::invalid_argument("SparsityPattern: a row has no free entries");
    }
  }
}

SparsityPattern SparsityPattern::full(int dim) {
  return SparsityPattern(dim, std::vector<std::vector<int>>(dim));
}

SparsityPattern SparsityPattern::diagonal(int dim) {
  std::vector<std::vector<int>> zeros(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (j != i) zeros[i].push_back(j);
    }
  }
  return SparsityPattern(dim, std::move(zeros));
}

SparsityPattern SparsityPattern::from_support(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("from_support: square matrix required");
  const int p = static_cast<int>(a.rows());
  std::vector<std::vector<int>> zeros(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (a(i, j) == 0.0) zeros[i].push_back(j);
    }
  }
  return SparsityPattern(p, std::move(zeros));
}

bool SparsityPattern::is_zero(int i, int j) const {
  const auto& row = zero_cols_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

int SparsityPattern::max_free_count() const {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, row_free_count(i));
  return m;
}

std::vector<int> SparsityPattern::free_cols(int row) const {
  std::vector<int> out;
  out.reserve(row_free_count(row));
  const auto& zeros = zero_cols_[row];
  std::size_t z = 0;
  for (int j = 0; j < dim_; ++j) {
    if (z < zeros.size() && zeros[z] == j) {
      ++z;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

long SparsityPattern::total_free() const {
  long t = 0;
  for (int i = 0; i < dim_; ++i) t += row_free_count(i);
  return t;
}

std::vector<int> SparsityPattern::column_counts() const {
  std::vector<int> counts(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j : zero_cols_[i]) counts[j] -= 1;
  }
  return counts;
}

bool SparsityPattern::obeys_column_cap(int max_col) const {
  if (max_col <= 0) return true;
  for (int c : column_counts()) {
    if (c > max_col) return false;
  }
  return true;
}

bool SparsityPattern::diagonal_free() const {
  for (int i = 0; i < dim_; ++i) {
    if (is_zero(i, i)) return false;
  }
  return true;
}

SparsityPattern SparsityPattern::with_free(int i, int j) const {
  auto zeros = zero_cols_;
  auto& row = zeros[i];
  row.erase(std::remove(row.begin(), row.end(), j), row.end());
  return SparsityPattern(dim_, std::move(zeros));
}

SparsityPattern SparsityPattern::with_zero(int i, int j) const {
  auto zeros = zero_cols_;
  zeros[i].push_back(j);
  return SparsityPattern(dim_, std::move(zeros));
}

std::string SparsityPattern::to_string() const {
  std::ostringstream out;
  for (int i = 0; i < dim_; ++i) {
    if (i > 0) out << ';';
    bool first = true;
    for (int j : free_cols(i)) {
      if (!first) out << ' ';
      out << (j + 1);
      first = false;
    }
  }
  return out.str();
}

bool SparsityPattern::operator==(const SparsityPattern& other) const {
  return dim_ == other.dim_ && zero_cols_ == other.zero_cols_;
}

namespace {

std::vector<int> canonical_assignment(std::vector<int> a) {
  std::vector<int> relabel(a.size(), -1);
  int next = 0;
  for (int& id : a) {
    if (id < 0 || id >= static_cast<int>(a.size())) {
      throw std::invalid_argument("CliqueModel: invalid clique id");
    }
    if (relabel[id] < 0) relabel[id] = next++;
    id = relabel[id];
  }
  return a;
}

}  // namespace

CliqueModel::CliqueModel(std::vector<int> assignment)
    : assignment_(canonical_assignment(std::move(assignment))) {
  if (assignment_.empty()) throw std::invalid_argument("CliqueModel: empty assignment");
  k_ = *std::max_element(assignment_.begin(), assignment_.end()) + 1;
  cliques_.assign(k_, {});
  for (int i = 0; i < dim(); ++i) cliques_[assignment_[i]].push_back(i);
}

CliqueModel CliqueModel::single_clique(int p) { return CliqueModel(std::vector<int>(p, 0)); }

CliqueModel CliqueModel::singletons(int p) {
  std::vector<int> a(p);
  std::iota(a.begin(), a.end(), 0);
  return CliqueModel(std::move(a));
}

CliqueModel CliqueModel::from_cliques(int p, const std::vector<std::vector<int>>& cliques) {
  std::vector<int> a(p, -1);
  int id = 0;
  for (const auto& clique : cliques) {
    for (int member : clique) {
      if (member < 0 || member >= p) throw std::invalid_argument("from_cliques: member out of range");
      if (a[member] != -1) throw std::invalid_argument("from_cliques: overlapping cliques");
      a[member] = id;
    }
    ++id;
  }
  for (int v : a) {
    if (v == -1) throw std::invalid_argument("from_cliques: not a partition of {1..p}");
  }
  return CliqueModel(std::move(a));
}

CliqueModel CliqueModel::parse(const std::string& text) {
  std::vector<std::vector<int>> cliques;
  std::istringstream stream(text);
  std::string part;
  int max_index = 0;
  while (std::getline(stream, part, '|')) {
    std::istringstream members(part);
    std::vector<int> clique;
    int idx;
    while (members >> idx) {
      if (idx < 1) throw std::invalid_argument("CliqueModel::parse: indices are 1-based");
      clique.push_back(idx - 1);
      max_index = std::max(max_index, idx);
    }
    if (!clique.empty()) cliques.push_back(std::move(clique));
  }
  if (cliques.empty()) throw std::invalid_argument("CliqueModel::parse: no cliques found");
  return from_cliques(max_index, cliques);
}

std::vector<int> CliqueModel::sizes() const {
  std::vector<int> out(k_);
  for (int c = 0; c < k_; ++c) out[c] = static_cast<int>(cliques_[c].size());
  return out;
}

std::string CliqueModel::to_string() const {
  std::ostringstream out;
  for (int c = 0; c < k_; ++c) {
    if (c > 0) out << '|';
    for (std::size_t i = 0; i < cliques_[c].size(); ++i) {
      if (i > 0) out << ' ';
      out << (cliques_[c][i] + 1);
    }
  }
  return out.str();
}

Eigen::MatrixXd restrict_to_model(const Eigen::MatrixXd& s, const CliqueModel& m) {
  if (s.rows() != s.cols() || s.rows() != m.dim()) {
    throw std::invalid_argument("restrict_to_model: dimension mismatch");
  }
  Eigen::MatrixXd out = s;
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) {
      if (i != j && !m.same_clique(i, j)) out(i, j) = 0.0;
    }
  }
  return out;
}

SpdMatrix restrict_to_model(const SpdMatrix& s, const CliqueModel& m) {
  return SpdMatrix(restrict_to_model(s.entries(), m));
}

bool is_submodel(const CliqueModel& m1, const CliqueModel& m2) {
  if (m1.dim() != m2.dim()) throw std::invalid_argument("is_submodel: dimension mismatch");
  for (const auto& clique : m1.cliques()) {
    const int target = m2.assignment()[clique.front()];
    for (int member : clique) {
      if (m2.assignment()[member] != target) return false;
    }
  }
  return true;
}

bool is_compatible(const CliqueModel& m, const SpdMatrix& sigma0, double tol) {
  if (m.dim() != sigma0.dim()) throw std::invalid_argument("is_compatible: dimension mismatch");
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = i + 1; j < m.dim(); ++j) {
      if (!m.same_clique(i, j) && std::abs(sigma0(i, j)) > tol) return false;
    }
  }
  return true;
}

std::optional<CliqueModel> pattern_to_clique(const SparsityPattern& pattern) {
  const int p = pattern.dim();
  if (!pattern.diagonal_free()) return std::nullopt;
  // Union coordinates linked by any free off-diagonal entry, then verify the
  // pattern is exactly the block support of the resulting partition.
  std::vector<int> parent(p);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i != j && !pattern.is_zero(i, j)) parent[find(i)] = find(j);
    }
  }
  std::vector<int> assignment(p);
  for (int i = 0; i < p; ++i) assignment[i] = find(i);
  CliqueModel m(std::move(assignment));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      const bool free_entry = !pattern.is_zero(i, j);
      if (free_entry != m.same_clique(i, j)) return std::nullopt;
    }
  }
  return m;
}

SparsityPattern clique_to_pattern(const CliqueModel& m) {
  const int p = m.dim();
  std::vector<std::vector<int>> zeros(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i != j && !m.same_clique(i, j)) zeros[i].push_back(j);
    }
  }
  return SparsityPattern(p, std::move(zeros));
}

std::vector<CliqueModel> enumerate_partitions(int p) {
  if (p < 1) throw std::invalid_argument("enumerate_partitions: p must be positive");
  if (p > 8) throw std::invalid_argument("enumerate_partitions: p capped at 8");
  std::vector<CliqueModel> out;
  std::vector<int> a(p, 0);
  // Restricted growth strings enumerate canonical assignments directly.
  auto recurse = [&](auto&& self, int i, int max_used) -> void {
    if (i == p) {
      out.emplace_back(a);
      return;
    }
    for (int id = 0; id <= max_used + 1; ++id) {
      a[i] = id;
      self(self, i + 1, std::max(max_used, id));
    }
  };
  a[0] = 0;
  recurse(recurse, 1, 0);
  return out;
}

}  // namespace fidcov
