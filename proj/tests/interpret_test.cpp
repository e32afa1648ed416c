#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nntuck/errors.hpp"
#include "nntuck/interpret.hpp"

using namespace nntuck;

namespace {

NNTuckModel random_model(std::mt19937& gen, Index n, Index l, Index k, Index c) {
    std::uniform_real_distribution<double> dist(0.05, 1.0);
    NNTuckModel m;
    m.variant = ModelVariant::dependent(k, c);
    m.u = Matrix::NullaryExpr(n, k, [&] { return dist(gen); });
    m.v = Matrix::NullaryExpr(n, k, [&] { return dist(gen); });
    m.y = Matrix::NullaryExpr(l, c, [&] { return dist(gen); });
    m.core = Tensor3(k, k, c);
    for (double& v : m.core.data()) v = dist(gen);
    return m;
}

Matrix synthetic_truth_y() {
    Matrix y(4, 2);
    y << 1, 0, 0.5, 0.5, 0, 1, 0.1, 0.9;
    return y;
}

// Exhaustive |det| enumeration, independent of the search implementation.
std::vector<Index> argmax_det_pairs(const Matrix& y) {
    std::vector<Index> best;
    double best_det = -1.0;
    for (Index a = 0; a < y.rows(); ++a)
        for (Index b = a + 1; b < y.rows(); ++b) {
            Matrix sub(2, 2);
            sub.row(0) = y.row(a);
            sub.row(1) = y.row(b);
            const double det = std::abs(sub.determinant());
            if (det > best_det) {
                best_det = det;
                best = {a, b};
            }
        }
    return best;
}

}  // namespace

TEST_CASE("L1 row normalization") {
    Matrix y(2, 2);
    y << 2, 2, 1, 3;
    const Matrix out = row_normalize_l1(y);
    CHECK(out(0, 0) == 0.5);
    CHECK(out(0, 1) == 0.5);
    CHECK(out(1, 0) == 0.25);
    CHECK(out(1, 1) == 0.75);

    CHECK(row_normalize_l1(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));

    Matrix with_zero_row = Matrix::Zero(2, 2);
    with_zero_row(0, 0) = 1.0;
    CHECK_THROWS_AS(row_normalize_l1(with_zero_row), std::invalid_argument);
}

TEST_CASE("row sums after L1 normalization are one") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> dist(0.01, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix y = Matrix::NullaryExpr(5, 3, [&] { return dist(gen); });
        const Matrix out = row_normalize_l1(y);
        for (Index i = 0; i < out.rows(); ++i) {
            CHECK(out.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("layer similarity") {
    SUBCASE("identical rows give the all-ones matrix") {
        Matrix y(3, 2);
        y << 0.4, 0.6, 0.4, 0.6, 0.4, 0.6;
        const Matrix s = layer_similarity(y);
        CHECK((s - Matrix::Ones(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("identity input gives identity similarity") {
        const Matrix s = layer_similarity(Matrix::Identity(3, 3));
        CHECK((s - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("known cosine") {
        Matrix y(2, 2);
        y << 1, 0, 1, 1;
        const Matrix s = layer_similarity(y);
        CHECK(s(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(s(1, 0) == s(0, 1));
    }

    SUBCASE("unit diagonal and [0, 1] entries for nonnegative input") {
        std::mt19937 gen(5);
        std::uniform_real_distribution<double> dist(0.0, 2.0);
        const Matrix y = Matrix::NullaryExpr(6, 3, [&] { return dist(gen) + 0.01; });
        const Matrix s = layer_similarity(y);
        for (Index i = 0; i < 6; ++i) {
            CHECK(s(i, i) == doctest::Approx(1.0).epsilon(1e-12));
            for (Index j = 0; j < 6; ++j) {
                CHECK(s(i, j) >= 0.0);
                CHECK(s(i, j) <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("reference basis transform") {
    std::mt19937 gen(7);

    SUBCASE("identity reference rows are a fixed point") {
        NNTuckModel m = random_model(gen, 5, 4, 2, 2);
        m.y = synthetic_truth_y();  // rows 0 and 2 are already identity rows
        const ReferenceBasis basis = reference_basis_transform(m, {0, 2});
        CHECK((basis.y_star - m.y).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((frontal_slice(basis.core_star, 0) - frontal_slice(m.core, 0))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((frontal_slice(basis.core_star, 1) - frontal_slice(m.core, 1))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }

    SUBCASE("reconstruction is invariant under the basis change") {
        for (int trial = 0; trial < 10; ++trial) {
            NNTuckModel m = random_model(gen, 5, 6, 2, 3);
            const std::vector<Index> refs = choose_reference_layers(m.y, 3);
            const ReferenceBasis basis = reference_basis_transform(m, refs);
            // y_star can carry negative entries; compare raw Tucker products
            const Tensor3 original = reconstruct(m);
            const Tensor3 transformed =
                mode_product(mode_product(mode_product(basis.core_star, m.u, 1), m.v, 2),
                             basis.y_star, 3);
            for (std::size_t i = 0; i < original.data().size(); ++i) {
                const double a = original.data()[i];
                const double b = transformed.data()[i];
                CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
            }
        }
    }

    SUBCASE("duplicated reference rows are singular") {
        NNTuckModel m = random_model(gen, 5, 4, 2, 2);
        m.y.row(1) = m.y.row(0);
        CHECK_THROWS_AS(reference_basis_transform(m, {0, 1}), NumericalError);
    }

    SUBCASE("argument validation") {
        NNTuckModel m = random_model(gen, 5, 4, 2, 2);
        CHECK_THROWS_AS(reference_basis_transform(m, {0}), std::invalid_argument);
        CHECK_THROWS_AS(reference_basis_transform(m, {0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(reference_basis_transform(m, {0, 7}), std::out_of_range);
    }
}

TEST_CASE("reference layer choice") {
    SUBCASE("synthetic ground truth picks the identity rows") {
        const Matrix y = synthetic_truth_y();
        const std::vector<Index> refs = choose_reference_layers(y, 2);
        CHECK(refs == argmax_det_pairs(y));
        CHECK(refs == std::vector<Index>{0, 2});
    }

    SUBCASE("identity Y selects every layer") {
        const std::vector<Index> refs = choose_reference_layers(Matrix::Identity(3, 3), 3);
        CHECK(refs == std::vector<Index>{0, 1, 2});
    }

    SUBCASE("identical rows are singular") {
        Matrix y(2, 2);
        y << 0.3, 0.7, 0.3, 0.7;
        CHECK_THROWS_AS(choose_reference_layers(y, 2), NumericalError);
    }

    SUBCASE("heuristic path is deterministic and finds a viable subset") {
        std::mt19937 gen(11);
        std::uniform_real_distribution<double> dist(0.01, 1.0);
        const Matrix y = Matrix::NullaryExpr(30, 3, [&] { return dist(gen); });
        const std::vector<Index> exhaustive = choose_reference_layers(y, 3);  // 4060 subsets
        const std::vector<Index> heuristic =
            choose_reference_layers(y, 3, /*seed=*/5, /*exhaustive_cap=*/10);
        CHECK(heuristic == choose_reference_layers(y, 3, 5, 10));
        auto abs_det = [&](const std::vector<Index>& subset) {
            Matrix sub(3, 3);
            for (int r = 0; r < 3; ++r) sub.row(r) = y.row(subset[static_cast<std::size_t>(r)]);
            return std::abs(sub.determinant());
        };
        CHECK(abs_det(heuristic) > 0.0);
        CHECK(abs_det(heuristic) <= abs_det(exhaustive) + 1e-12);
        CHECK(abs_det(heuristic) >= 0.5 * abs_det(exhaustive));
    }
}
