#pragma once

#include <string>
#include <vector>

#include "nntuck/tensor.hpp"

namespace nntuck {

/// Multilayer network over a shared node set: a frontally square N x N x L
/// adjacency tensor of nonnegative edge weights plus metadata. Labels never
/// affect numerics.
struct MultilayerNetwork {
    Tensor3 adjacency;
    bool directed = true;
    std::vector<std::string> node_labels;   // optional; empty or size N
    std::vector<std::string> layer_labels;  // optional; empty or size L

    Index num_nodes() const { return adjacency.dim(0); }
    Index num_layers() const { return adjacency.dim(2); }

    /// Throws if the tensor is not frontally square, has negative entries,
    /// undirected slices are asymmetric, or label counts mismatch.
    void validate() const;
};

enum class VariantKind { Independent, Dependent, Redundant };

std::string to_string(VariantKind kind);
VariantKind variant_kind_from_string(const std::string& name);

/// Model family selector. Independent fixes Y = I with C = L, Redundant fixes
/// Y = ones with C = 1, Dependent leaves Y free with C < L.
struct ModelVariant {
    VariantKind kind = VariantKind::Dependent;
    Index node_communities = 1;   // K
    Index layer_communities = 1;  // C; equals L for Independent, 1 for Redundant
    bool symmetric = false;

    static ModelVariant independent(Index k, Index num_layers, bool symmetric = false);
    static ModelVariant dependent(Index k, Index c, bool symmetric = false);
    static ModelVariant redundant(Index k, bool symmetric = false);

    /// Checks the variant against network dimensions (1 <= K <= N, kind
    /// constraints on C).
    void validate(Index num_nodes, Index num_layers) const;
};

/// Tucker factors of a fitted or constructed model: U (N x K), V (N x K),
/// Y (L x C), and the core (K x K x C), all nonnegative.
struct NNTuckModel {
    Matrix u;
    Matrix v;
    Matrix y;
    Tensor3 core;
    ModelVariant variant;

    Index num_nodes() const { return u.rows(); }
    Index num_layers() const { return y.rows(); }

    /// Throws when shapes are inconsistent, entries are negative, or the
    /// variant constraints on Y / symmetry do not hold.
    void validate() const;
};

/// The reconstruction core x1 U x2 V x3 Y, shape N x N x L.
Tensor3 reconstruct(const NNTuckModel& model);

/// Free-parameter count of the variant on an N-node, L-layer network:
/// Independent 2NK + K^2 L, Dependent 2NK + LC + K^2 C, Redundant 2NK + K^2.
long long count_parameters(const ModelVariant& variant, Index num_nodes, Index num_layers);

/// Deflation to C layer communities only reflects network structure when the
/// core slices cannot span the space of K x K matrices: warns when C >= K^2
/// (directed) or C >= K(K+1)/2 (symmetric).
enum class InterpretabilityCheck { Ok, Warning };
InterpretabilityCheck check_interpretability(Index k, Index c, bool symmetric);

/// JSON round trip for models; finite doubles survive bit-exactly.
std::string model_to_json(const NNTuckModel& model);
NNTuckModel model_from_json(const std::string& text);

}  // namespace nntuck
