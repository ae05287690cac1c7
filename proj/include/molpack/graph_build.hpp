#pragma once

#include <iosfwd>
#include <span>

#include "molpack/molecule.hpp"

namespace molpack {

// All directed pairs (i, j), i != j, with distance strictly below r_cut.
// Edges are emitted with `target` ascending and, within a target, `source`
// ascending.  Throws ConfigError for a non-positive cutoff.
MolecularGraph build_radius_graph(const Molecule& mol, double r_cut);

// Like build_radius_graph but each target keeps at most its k nearest
// sources; distance ties are broken toward the smaller source index.
MolecularGraph build_knn_graph(const Molecule& mol, double r_cut, int k);

DatasetStats dataset_stats(std::span<const MolecularGraph> graphs);

// "size,count" rows in ascending size order.
void write_histogram_csv(std::ostream& out, const std::map<int, std::int64_t>& histogram);

// "graph_id,sparsity" rows in dataset order.
void write_sparsity_csv(std::ostream& out, const DatasetStats& stats);

}  // namespace molpack
