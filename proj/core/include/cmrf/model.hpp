#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cmrf {

struct Edge {
  int i = 0;  // canonical orientation i < j
  int j = 0;
};

struct BinaryView;

// Discrete pairwise MRF in log scale:
//   -E(x) = sum_i theta_i(x_i) + sum_(i,j) theta_ij(x_i, x_j).
// Immutable by convention once built; all inference code takes const refs.
class PairwiseModel {
 public:
  PairwiseModel() = default;
  explicit PairwiseModel(std::vector<int> labels);

  // n binary variables, zero potentials.
  static PairwiseModel binary(int n);

  // Binary model from the (theta, W) parameterization:
  //   -E(x) = sum_i theta_i x_i + sum_(i,j) (W_ij/2) [x_i x_j + (1-x_i)(1-x_j)]
  static PairwiseModel from_binary(
      const std::vector<double>& theta,
      const std::vector<std::pair<std::pair<int, int>, double>>& w);

  int num_vars() const { return static_cast<int>(labels_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int label_count(int i) const { return labels_[i]; }
  const std::vector<int>& label_counts() const { return labels_; }

  const std::vector<Edge>& edges() const { return edges_; }
  // -1 when the pair is not an edge.
  int edge_index(int i, int j) const;
  // (neighbor, edge id) pairs.
  const std::vector<std::pair<int, int>>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  std::span<const double> theta(int i) const { return theta_[i]; }
  double theta(int i, int x) const { return theta_[i][x]; }
  void set_theta(int i, std::vector<double> table);
  void add_to_theta(int i, int x, double v) { theta_[i][x] += v; }

  // Adds edge (i,j) with a row-major L_i x L_j log table (given in the (i,j)
  // orientation passed; stored canonically). Rejects self loops, duplicates,
  // shape mismatches, and non-finite entries.
  void add_edge(int i, int j, std::vector<double> table);

  // Orientation-free accessor: pairwise(i,j,a,b) == pairwise(j,i,b,a).
  double pairwise(int i, int j, int xi, int xj) const;
  // Canonical (i<j) row-major table of edge e.
  std::span<const double> edge_table(int e) const { return tables_[e]; }
  std::vector<double>& mutable_edge_table(int e) { return tables_[e]; }

  double energy(std::span<const int> config) const;
  double energy(const std::vector<int>& config) const {
    return energy(std::span<const int>(config));
  }

  bool is_binary() const;
  BinaryView binary_view() const;

  // Optional stable external identifiers; empty when unset.
  const std::vector<std::string>& var_names() const { return names_; }
  void set_var_names(std::vector<std::string> names);

  // Total number of joint configurations as a double (inf-safe for big models).
  double config_count() const;

 private:
  std::vector<int> labels_;
  std::vector<std::vector<double>> theta_;
  std::vector<Edge> edges_;
  std::vector<std::vector<double>> tables_;           // canonical i<j, row-major
  std::vector<std::vector<std::pair<int, int>>> adj_; // (neighbor, edge id)
  std::vector<std::string> names_;
};

// Scalar (theta, W) lens on a binary model. Reproduces energies up to
// log_const: -E(x) = log_const + sum theta[i] x_i + sum (w[e]/2)[..].
struct BinaryView {
  std::vector<double> theta;  // per variable
  std::vector<double> w;      // per edge, aligned with model.edges()
  double log_const = 0.0;     // A(model) = A(view model) + log_const
};

// Bookkeeping for one or more clamp operations.
struct ClampMap {
  std::vector<std::pair<int, int>> assignments;  // (original var, label), in clamp order
  std::vector<int> index_map;                    // surviving index -> original var
  double log_const = 0.0;  // A(child) + log_const = A(parent | assignments)
};

struct ClampedModel {
  PairwiseModel model;
  ClampMap map;

  // Clamp a further variable, composing maps (var given in child indexing).
  ClampedModel clamp(int var, int label) const;
};

// Fixes `var` to `label`: returns the (n-1)-variable model whose partition
// function times exp(map.log_const) equals the parent's restricted one.
// Edges at `var` are absorbed into neighbor singleton tables.
ClampedModel clamp(const PairwiseModel& m, int var, int label);

// Child index of an original variable under a clamp map, -1 if clamped away.
int child_index_of(const ClampMap& map, int original_var);

// Relabels x_i -> 1 - x_i for i in subset (binary models only). Partition
// function is invariant; W signs flip on edges with exactly one endpoint in
// the subset.
PairwiseModel flip(const PairwiseModel& m, const std::vector<int>& subset);

struct BalanceCertificate {
  bool balanced = false;
  // When balanced: flipping this set makes every retained edge attractive.
  std::vector<int> flip_set;
  // Otherwise: vertex cycle with an odd number of retained repulsive edges.
  std::vector<int> witness_cycle;
};

// 2-colors the sign graph of a binary model, ignoring edges with
// |W| <= weight_floor. Linear time.
BalanceCertificate balance_certificate(const PairwiseModel& m, double weight_floor = 0.0);

}  // namespace cmrf
