#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "molpack/matrix.hpp"

namespace molpack {

enum class OpType {
  MatrixInput,       // named dense input
  IndexInput,        // named index-vector input
  Broadcast,         // index vector -> index matrix by replicating across columns
  Gather,            // (table, index vector) -> rows
  ScatterAddVector,  // (base, index vector, values): out[idx[r]] += values[r]
  ScatterAddMatrix,  // (base, index matrix, values): out[idx(r,c), c] += values(r,c)
  Add,               // elementwise
  Multiply,          // elementwise
};

std::string to_string(OpType type);

struct OpNode {
  OpType type = OpType::MatrixInput;
  std::string name;
  std::vector<int> inputs;  // indices of earlier nodes
  int broadcast_width = 0;  // Broadcast only
};

// A small dataflow graph over dense matrices and index values.  Nodes are
// stored in topological order (inputs always precede their consumers); the
// last node is the graph output.
class OpGraph {
 public:
  int add_matrix_input(std::string name);
  int add_index_input(std::string name);
  int add_broadcast(std::string name, int index, int width);
  int add_gather(std::string name, int table, int index);
  int add_scatter_add_vector(std::string name, int base, int index, int values);
  int add_scatter_add_matrix(std::string name, int base, int index_matrix, int values);
  int add_add(std::string name, int a, int b);
  int add_multiply(std::string name, int a, int b);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const OpNode& node(int i) const;
  const std::vector<OpNode>& nodes() const { return nodes_; }
  std::vector<int> consumers(int i) const;
  int output() const;  // index of the last node

 private:
  int push(OpNode node);
  void check_ref(int i, const char* what) const;

  std::vector<OpNode> nodes_;
};

// A value flowing through the graph.
struct OpValue {
  enum class Kind { Dense, IndexVec, IndexMat };
  Kind kind = Kind::Dense;
  Matrix<double> dense;
  std::vector<std::int32_t> index_vec;
  Matrix<std::int32_t> index_mat;

  static OpValue of_dense(Matrix<double> m);
  static OpValue of_index_vec(std::vector<std::int32_t> v);
};

using Bindings = std::map<std::string, OpValue>;

// Evaluates every node; bindings supply the inputs by node name.  Shape or
// kind violations throw (ShapeError / BoundsError / ConsistencyError).
std::vector<OpValue> evaluate(const OpGraph& graph, const Bindings& bindings);

// Value of the output node only.
Matrix<double> evaluate_output(const OpGraph& graph, const Bindings& bindings);

// Rewrites every occurrence of
//     ScatterAddMatrix(base, Broadcast(idx, width), values)
// where the Broadcast has no other consumer into
//     ScatterAddVector(base, idx, values),
// dropping the Broadcast node.  Returns the rewritten graph and the number of
// matches; the node count shrinks by exactly one per match, and evaluation
// results are unchanged (the two forms add identical values in identical
// order).
std::pair<OpGraph, int> fuse_broadcast_scatter(const OpGraph& graph);

}  // namespace molpack
