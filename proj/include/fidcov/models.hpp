#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fidcov/matrix.hpp"

namespace fidcov {

/// Locations of structural zeros in a square covariate matrix: S_i is the set
/// of columns fixed at zero in row i. Every row keeps at least one free entry.
class SparsityPattern {
 public:
  SparsityPattern(int dim, std::vector<std::vector<int>> zero_cols);

  static SparsityPattern full(int dim);
  /// Only the diagonal is free.
  static SparsityPattern diagonal(int dim);
  /// Pattern read off the exact zeros of a matrix.
  static SparsityPattern from_support(const Eigen::MatrixXd& a);

  int dim() const { return dim_; }
  bool is_zero(int i, int j) const;
  const std::vector<int>& zero_set(int row) const { return zero_cols_[row]; }
  int row_free_count(int row) const { return dim_ - static_cast<int>(zero_cols_[row].size()); }
  int max_free_count() const;
  std::vector<int> free_cols(int row) const;
  long total_free() const;

  /// Nonzero count per column (diagonal included).
  std::vector<int> column_counts() const;
  bool obeys_column_cap(int max_col) const;
  bool diagonal_free() const;

  SparsityPattern with_free(int i, int j) const;
  SparsityPattern with_zero(int i, int j) const;

  /// Rows joined by ';', each listing its free 1-based columns.
  std::string to_string() const;

  bool operator==(const SparsityPattern& other) const;

 private:
  int dim_;
  std::vector<std::vector<int>> zero_cols_;  // sorted per row
};

/// Partition of {1..p} into cliques, canonical form: clique ids are assigned
/// in order of each clique's smallest member.
class CliqueModel {
 public:
  /// `assignment[i]` is the 0-based clique id of coordinate i (any labeling;
  /// it is canonicalized).
  explicit CliqueModel(std::vector<int> assignment);

  static CliqueModel single_clique(int p);
  static CliqueModel singletons(int p);
  static CliqueModel from_cliques(int p, const std::vector<std::vector<int>>& cliques);
  /// Parses "1|2 3|4 5 6" (pipe-separated cliques of 1-based indices).
  static CliqueModel parse(const std::string& text);

  int dim() const { return static_cast<int>(assignment_.size()); }
  int count() const { return k_; }
  const std::vector<int>& assignment() const { return assignment_; }
  const std::vector<std::vector<int>>& cliques() const { return cliques_; }
  std::vector<int> sizes() const;
  bool same_clique(int i, int j) const { return assignment_[i] == assignment_[j]; }

  std::string to_string() const;

  bool operator==(const CliqueModel& other) const { return assignment_ == other.assignment_; }
  bool operator!=(const CliqueModel& other) const { return !(*this == other); }
  bool operator<(const CliqueModel& other) const { return assignment_ < other.assignment_; }

 private:
  std::vector<int> assignment_;
  std::vector<std::vector<int>> cliques_;
  int k_ = 0;
};

/// S^M: off-diagonal entries zeroed whenever the two coordinates are in
/// different cliques. Block diagonal up to permutation; SPD is preserved.
Eigen::MatrixXd restrict_to_model(const Eigen::MatrixXd& s, const CliqueModel& m);
SpdMatrix restrict_to_model(const SpdMatrix& s, const CliqueModel& m);

/// True iff every clique of m1 is contained in some clique of m2.
bool is_submodel(const CliqueModel& m1, const CliqueModel& m2);

/// True iff restricting sigma0 to m changes nothing (entrywise tolerance).
bool is_compatible(const CliqueModel& m, const SpdMatrix& sigma0, double tol = 1e-12);

/// The clique model whose block support equals the pattern, if one exists.
std::optional<CliqueModel> pattern_to_clique(const SparsityPattern& pattern);

/// Pattern of the block-diagonal support of a clique model.
SparsityPattern clique_to_pattern(const CliqueModel& m);

/// All set partitions of {1..p} in canonical form; p <= 8 (Bell(8) = 4140).
std::vector<CliqueModel> enumerate_partitions(int p);

}  // namespace fidcov
