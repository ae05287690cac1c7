#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "molpack/batch.hpp"
#include "molpack/error.hpp"
#include "molpack/kernels.hpp"
#include "molpack/matrix.hpp"

namespace molpack {

// Hyperparameters of the message-passing energy model.
struct SchnetConfig {
  int n_species = 100;   // embedding rows; atomic numbers must stay below this
  int hidden_dim = 100;  // per-atom feature width, must be even (readout halves it)
  int n_blocks = 4;      // interaction blocks
  int n_rbf = 25;        // radial basis functions
  double r_cut = 6.0;    // cutoff radius (angstroms)
  double rbf_spacing = 0.0;  // 0 = derive as r_cut / n_rbf
  double rbf_gamma = 0.0;    // 0 = derive as 1 / (2 * spacing^2)
  double softplus_beta = 1.0;
  double softplus_tau = 20.0;

  RbfGrid rbf_grid() const;
  void validate() const;
};

// y = x * weight + bias; weight is fan_in x fan_out, bias may be empty.
struct LinearParams {
  Matrix<float> weight;
  std::vector<float> bias;
};

struct BlockParams {
  LinearParams filter1;  // n_rbf -> hidden
  LinearParams filter2;  // hidden -> hidden
  LinearParams pre;      // hidden -> hidden, no bias
  LinearParams post1;    // hidden -> hidden
  LinearParams post2;    // hidden -> hidden
};

struct ModelParams {
  SchnetConfig config;
  Matrix<float> embedding;  // n_species x hidden; row 0 is all zero
  std::vector<BlockParams> blocks;
  LinearParams readout1;  // hidden -> hidden/2
  LinearParams readout2;  // hidden/2 -> 1
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from a fixed,
// platform-independent stream; tensors are filled in the order the sidecar
// lists them.
ModelParams random_model(const SchnetConfig& config, std::uint64_t seed);

// Weights as a flat little-endian f32 blob; shapes, hyperparameters and the
// tensor order go into a JSON sidecar.
void save_model(const ModelParams& params, const std::filesystem::path& blob_path,
                const std::filesystem::path& sidecar_path);
ModelParams load_model(const std::filesystem::path& blob_path,
                       const std::filesystem::path& sidecar_path);

// ---  Typed views: the forward pass runs at float or double precision.  ---

template <typename T>
struct TypedLinear {
  Matrix<T> weight;
  std::vector<T> bias;
};

template <typename T>
struct TypedBlock {
  TypedLinear<T> filter1, filter2, pre, post1, post2;
};

template <typename T>
struct TypedModel {
  SchnetConfig config;
  Matrix<T> embedding;
  std::vector<TypedBlock<T>> blocks;
  TypedLinear<T> readout1, readout2;
};

namespace detail {

template <typename T>
Matrix<T> cast_matrix(const Matrix<float>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = static_cast<T>(m(i, j));
  }
  return out;
}

template <typename T>
TypedLinear<T> cast_linear(const LinearParams& l) {
  TypedLinear<T> out;
  out.weight = cast_matrix<T>(l.weight);
  out.bias.assign(l.bias.begin(), l.bias.end());
  return out;
}

}  // namespace detail

template <typename T>
TypedModel<T> typed_model(const ModelParams& params) {
  TypedModel<T> m;
  m.config = params.config;
  m.embedding = detail::cast_matrix<T>(params.embedding);
  for (const BlockParams& b : params.blocks) {
    m.blocks.push_back({detail::cast_linear<T>(b.filter1), detail::cast_linear<T>(b.filter2),
                        detail::cast_linear<T>(b.pre), detail::cast_linear<T>(b.post1),
                        detail::cast_linear<T>(b.post2)});
  }
  m.readout1 = detail::cast_linear<T>(params.readout1);
  m.readout2 = detail::cast_linear<T>(params.readout2);
  return m;
}

// y = x * W (+ b).  Rows are independent, so batching rows together cannot
// change any row's result.
template <typename T>
Matrix<T> linear_apply(const Matrix<T>& x, const TypedLinear<T>& layer) {
  const std::size_t fan_in = layer.weight.rows();
  const std::size_t fan_out = layer.weight.cols();
  if (x.cols() != fan_in) {
    throw ShapeError("linear_apply: input width " + std::to_string(x.cols()) +
                     " does not match fan-in " + std::to_string(fan_in));
  }
  if (!layer.bias.empty() && layer.bias.size() != fan_out) {
    throw ShapeError("linear_apply: bias size " + std::to_string(layer.bias.size()) +
                     " does not match fan-out " + std::to_string(fan_out));
  }
  Matrix<T> y(x.rows(), fan_out);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t o = 0; o < fan_out; ++o) {
      T acc = layer.bias.empty() ? T{0} : layer.bias[o];
      for (std::size_t i = 0; i < fan_in; ++i) acc += x(r, i) * layer.weight(i, o);
      y(r, o) = acc;
    }
  }
  return y;
}

template <typename T>
void shifted_softplus_inplace(Matrix<T>& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = shifted_softplus(m(r, c));
  }
}

// One interaction block: every edge turns its distance into a radial-basis
// filter, modulates the (linearly mixed) source-node features with it, the
// weighted messages are summed onto their target nodes, and the aggregate is
// passed through a two-layer head and added back onto the input features.
//
// `edge_weights[e]` scales message e; callers pass the cosine cutoff value
// for real edges and exactly 0 for padding edges, which keeps padding rows
// inert no matter what the filter network outputs (its bias path included).
template <typename T>
Matrix<T> interaction_block(const Matrix<T>& h, std::span<const std::int32_t> edge_targets,
                            std::span<const std::int32_t> edge_sources,
                            std::span<const T> distances, std::span<const T> edge_weights,
                            const TypedBlock<T>& block, const RbfGrid& grid) {
  const std::size_t n_edges = edge_targets.size();
  if (edge_sources.size() != n_edges || distances.size() != n_edges ||
      edge_weights.size() != n_edges) {
    throw ShapeError("interaction_block: edge arrays disagree in length");
  }
  Matrix<T> rbf(n_edges, static_cast<std::size_t>(grid.size));
  for (std::size_t e = 0; e < n_edges; ++e) rbf_expand(distances[e], grid, rbf.row(e));

  Matrix<T> filter = linear_apply(rbf, block.filter1);
  shifted_softplus_inplace(filter);
  filter = linear_apply(filter, block.filter2);
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto row = filter.row(e);
    for (T& v : row) v *= edge_weights[e];
  }

  Matrix<T> mixed = linear_apply(h, block.pre);
  Matrix<T> messages = gather(mixed, edge_sources);
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto row = messages.row(e);
    auto f = filter.row(e);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] *= f[c];
  }

  Matrix<T> aggregated =
      scatter_add(Matrix<T>(h.rows(), h.cols()), edge_targets, messages);
  Matrix<T> update = linear_apply(aggregated, block.post1);
  shifted_softplus_inplace(update);
  update = linear_apply(update, block.post2);

  Matrix<T> out = h;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += update(r, c);
  }
  return out;
}

// Convenience overload: derives edge weights from the distances, masking
// self-loops (the padding-edge encoding) to 0.
template <typename T>
Matrix<T> interaction_block(const Matrix<T>& h, std::span<const std::int32_t> edge_targets,
                            std::span<const std::int32_t> edge_sources,
                            std::span<const T> distances, const TypedBlock<T>& block,
                            const RbfGrid& grid, T r_cut) {
  std::vector<T> weights(edge_targets.size());
  for (std::size_t e = 0; e < weights.size(); ++e) {
    weights[e] = edge_targets[e] == edge_sources[e] ? T{0}
                                                    : cosine_cutoff(distances[e], r_cut);
  }
  return interaction_block(h, edge_targets, edge_sources, distances,
                           std::span<const T>(weights), block, grid);
}

// Full forward pass over one batch: embedding lookup, n_blocks interaction
// blocks, per-atom readout, then a per-graph sum.  Returns one prediction per
// real graph.  Padding nodes contribute nothing: their embedding row is zero,
// their edges carry weight 0, and the per-graph sum skips ids of -1 -- except
// through the readout's bias path, which is why padding slots are excluded
// from the sum rather than relied on to be zero.
template <typename T>
std::vector<T> schnet_forward(const PackedBatch& batch, const TypedModel<T>& model) {
  batch.validate();
  model.config.validate();
  const RbfGrid grid = model.config.rbf_grid();

  for (std::int32_t z : batch.atomic_numbers) {
    if (z < 0 || z >= model.config.n_species) {
      throw BoundsError("schnet_forward: atomic number " + std::to_string(z) +
                        " outside the embedding table of " +
                        std::to_string(model.config.n_species) + " species");
    }
  }
  Matrix<T> h = gather(model.embedding, batch.atomic_numbers);

  std::vector<T> distances(batch.edge_distances.size());
  for (std::size_t e = 0; e < distances.size(); ++e) {
    distances[e] = static_cast<T>(batch.edge_distances[e]);
  }
  std::vector<T> weights(distances.size());
  for (std::size_t e = 0; e < weights.size(); ++e) {
    const auto t = batch.edge_targets[e];
    const bool padding = t == batch.edge_sources[e] ||
                         batch.node_graph_ids[static_cast<std::size_t>(t)] < 0;
    weights[e] =
        padding ? T{0} : cosine_cutoff(distances[e], static_cast<T>(model.config.r_cut));
  }

  for (const TypedBlock<T>& block : model.blocks) {
    h = interaction_block(h, batch.edge_targets, batch.edge_sources,
                          std::span<const T>(distances), std::span<const T>(weights), block,
                          grid);
  }

  Matrix<T> per_atom = linear_apply(h, model.readout1);
  shifted_softplus_inplace(per_atom);
  per_atom = linear_apply(per_atom, model.readout2);

  std::vector<T> predictions(batch.graph_ids.size(), T{0});
  for (std::size_t v = 0; v < static_cast<std::size_t>(batch.node_capacity); ++v) {
    const std::int32_t g = batch.node_graph_ids[v];
    if (g >= 0) predictions[static_cast<std::size_t>(g)] += per_atom(v, 0);
  }
  return predictions;
}

template <typename T>
std::vector<T> schnet_forward(const PackedBatch& batch, const ModelParams& params) {
  return schnet_forward(batch, typed_model<T>(params));
}

// Evaluates one graph on its own (no padding anywhere).
template <typename T>
T schnet_forward_single(const MolecularGraph& graph, const ModelParams& params) {
  return schnet_forward<T>(assemble_single(graph), params).at(0);
}

}  // namespace molpack
