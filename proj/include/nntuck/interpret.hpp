#pragma once

#include <cstdint>
#include <vector>

#include "nntuck/model.hpp"

namespace nntuck {

/// Rows scaled to unit 1-norm; throws on an all-zero row.
Matrix row_normalize_l1(const Matrix& y);

/// Rows scaled to unit 2-norm; throws on an all-zero row.
Matrix row_normalize_l2(const Matrix& y);

/// Layer-by-layer cosine similarity Y2 Y2^T of the row-2-normalized factor;
/// symmetric with unit diagonal, entries in [0, 1] for nonnegative Y.
Matrix layer_similarity(const Matrix& y);

/// The core rewritten in the span of C chosen reference layers. Rows of
/// y_star at the reference layers are standard basis vectors; the remaining
/// rows express each layer as a combination of the references and may be
/// negative. Reconstruction is unchanged: core_star x3 y_star equals
/// core x3 Y.
struct ReferenceBasis {
    std::vector<Index> reference_layers;  // r*, C distinct layer indices
    Matrix y_star;                        // L x C
    Tensor3 core_star;                    // K x K x C, slices sum_i y_{r_m, i} G_i
};

/// Requires |r*| = C distinct in-range layers whose Y rows form a submatrix
/// with condition number below 1e8; throws NumericalError otherwise (the
/// chosen reference layers are too close to dependent to invert).
ReferenceBasis reference_basis_transform(const NNTuckModel& model,
                                         std::vector<Index> reference_layers);

/// Picks the C-subset of layers maximizing |det(Y_{r*})|. Exhaustive when
/// binom(L, C) <= exhaustive_cap; otherwise a greedy volume build plus seeded
/// random-restart swap search. Deterministic given the seed. Throws
/// NumericalError when every evaluated subset is numerically singular.
std::vector<Index> choose_reference_layers(const Matrix& y, Index c,
                                           std::uint64_t seed = 0,
                                           std::size_t exhaustive_cap = 10000);

}  // namespace nntuck
