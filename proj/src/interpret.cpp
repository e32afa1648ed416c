#include "nntuck/interpret.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "nntuck/errors.hpp"
#include "nntuck/rng.hpp"

namespace nntuck {

namespace {

constexpr double kConditionLimit = 1e8;
constexpr double kSingularDeterminant = 1e-12;

Matrix row_normalize(const Matrix& y, int norm_order) {
    Matrix out(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
        const double norm = norm_order == 1 ? y.row(i).cwiseAbs().sum() : y.row(i).norm();
        if (norm == 0.0) {
            throw std::invalid_argument("row " + std::to_string(i) +
                                        " of Y is all zeros and cannot be normalized");
        }
        out.row(i) = y.row(i) / norm;
    }
    return out;
}

Matrix rows_subset(const Matrix& y, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), y.cols());
    for (std::size_t m = 0; m < rows.size(); ++m) out.row(static_cast<Index>(m)) = y.row(rows[m]);
    return out;
}

}  // namespace

Matrix row_normalize_l1(const Matrix& y) { return row_normalize(y, 1); }

Matrix row_normalize_l2(const Matrix& y) { return row_normalize(y, 2); }

Matrix layer_similarity(const Matrix& y) {
    const Matrix y2 = row_normalize_l2(y);
    return y2 * y2.transpose();
}

ReferenceBasis reference_basis_transform(const NNTuckModel& model,
                                         std::vector<Index> reference_layers) {
    const Index l = model.num_layers();
    const Index c = model.variant.layer_communities;
    if (static_cast<Index>(reference_layers.size()) != c) {
        throw std::invalid_argument("reference layer count must equal C");
    }
    std::set<Index> seen;
    for (Index r : reference_layers) {
        if (r < 0 || r >= l) {
            throw std::out_of_range("reference layer index " + std::to_string(r) +
                                    " out of range [0, " + std::to_string(l) + ")");
        }
        if (!seen.insert(r).second) {
            throw std::invalid_argument("reference layers must be distinct");
        }
    }

    const Matrix y_ref = rows_subset(model.y, reference_layers);  // C x C
    Eigen::JacobiSVD<Matrix> svd(y_ref);
    const double smin = svd.singularValues()(c - 1);
    const double smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > kConditionLimit) {
        throw NumericalError(
            "reference layer rows of Y are numerically dependent; the basis is not invertible");
    }

    ReferenceBasis basis;
    basis.reference_layers = std::move(reference_layers);
    basis.core_star = mode_product(model.core, y_ref, 3);
    basis.y_star = Matrix::Zero(l, c);
    const Eigen::PartialPivLU<Matrix> lu(y_ref.transpose());
    std::vector<bool> is_reference(static_cast<std::size_t>(l), false);
    for (std::size_t m = 0; m < basis.reference_layers.size(); ++m) {
        basis.y_star(basis.reference_layers[m], static_cast<Index>(m)) = 1.0;
        is_reference[static_cast<std::size_t>(basis.reference_layers[m])] = true;
    }
    for (Index ell = 0; ell < l; ++ell) {
        if (is_reference[static_cast<std::size_t>(ell)]) continue;
        // y*_l solves Y_{r*}^T y*_l^T = y_l^T.
        basis.y_star.row(ell) = lu.solve(model.y.row(ell).transpose()).transpose();
    }
    return basis;
}

namespace {

double subset_abs_det(const Matrix& y, const std::vector<Index>& rows) {
    return std::abs(rows_subset(y, rows).determinant());
}

double binomial_or_inf(Index l, Index c, double cap) {
    double value = 1.0;
    for (Index i = 0; i < c; ++i) {
        value *= static_cast<double>(l - i) / static_cast<double>(i + 1);
        if (value > cap) return value;
    }
    return value;
}

/// Greedy volume build: repeatedly add the row with the largest component
/// orthogonal to the span of the rows chosen so far.
std::vector<Index> greedy_volume_subset(const Matrix& y, Index c) {
    const Index l = y.rows();
    std::vector<Index> chosen;
    Matrix basis(c, y.cols());
    std::vector<bool> used(static_cast<std::size_t>(l), false);
    for (Index step = 0; step < c; ++step) {
        double best_norm = -1.0;
        Index best_row = -1;
        Eigen::RowVectorXd best_residual;
        for (Index r = 0; r < l; ++r) {
            if (used[static_cast<std::size_t>(r)]) continue;
            Eigen::RowVectorXd residual = y.row(r);
            for (Index b = 0; b < step; ++b) {
                const double denom = basis.row(b).squaredNorm();
                if (denom > 0.0) {
                    residual -= (residual.dot(basis.row(b)) / denom) * basis.row(b);
                }
            }
            if (residual.norm() > best_norm) {
                best_norm = residual.norm();
                best_row = r;
                best_residual = residual;
            }
        }
        used[static_cast<std::size_t>(best_row)] = true;
        chosen.push_back(best_row);
        basis.row(step) = best_residual;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace

std::vector<Index> choose_reference_layers(const Matrix& y, Index c, std::uint64_t seed,
                                           std::size_t exhaustive_cap) {
    const Index l = y.rows();
    if (c < 1 || c > l) throw std::invalid_argument("subset size C must satisfy 1 <= C <= L");
    if (c != y.cols()) {
        throw std::invalid_argument("subset size C must match the column count of Y");
    }

    std::vector<Index> best;
    double best_det = -1.0;
    auto consider = [&](const std::vector<Index>& subset) {
        const double det = subset_abs_det(y, subset);
        if (det > best_det) {  // strict: earlier (lexicographic) subsets win ties
            best_det = det;
            best = subset;
        }
    };

    if (binomial_or_inf(l, c, static_cast<double>(exhaustive_cap)) <=
        static_cast<double>(exhaustive_cap)) {
        std::vector<Index> subset(static_cast<std::size_t>(c));
        for (Index i = 0; i < c; ++i) subset[static_cast<std::size_t>(i)] = i;
        for (;;) {
            consider(subset);
            // next lexicographic combination
            Index pos = c - 1;
            while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == l - c + pos) --pos;
            if (pos < 0) break;
            ++subset[static_cast<std::size_t>(pos)];
            for (Index i = pos + 1; i < c; ++i)
                subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
        }
    } else {
        consider(greedy_volume_subset(y, c));
        Rng rng(seed);
        constexpr int kRestarts = 64;
        for (int restart = 0; restart < kRestarts; ++restart) {
            // random C-subset by partial Fisher-Yates
            std::vector<Index> pool(static_cast<std::size_t>(l));
            for (Index i = 0; i < l; ++i) pool[static_cast<std::size_t>(i)] = i;
            for (Index i = 0; i < c; ++i) {
                const Index j = i + static_cast<Index>(rng.raw() % static_cast<std::uint64_t>(l - i));
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            }
            std::vector<Index> subset(pool.begin(), pool.begin() + c);
            std::sort(subset.begin(), subset.end());
            // local swap hill climb
            bool improved = true;
            double det = subset_abs_det(y, subset);
            while (improved) {
                improved = false;
                for (std::size_t slot = 0; slot < subset.size() && !improved; ++slot) {
                    for (Index r = 0; r < l && !improved; ++r) {
                        if (std::find(subset.begin(), subset.end(), r) != subset.end()) continue;
                        std::vector<Index> candidate = subset;
                        candidate[slot] = r;
                        std::sort(candidate.begin(), candidate.end());
                        const double cd = subset_abs_det(y, candidate);
                        if (cd > det) {
                            det = cd;
                            subset = std::move(candidate);
                            improved = true;
                        }
                    }
                }
            }
            consider(subset);
        }
    }

    if (best_det < kSingularDeterminant) {
        throw NumericalError(
            "every evaluated reference subset is numerically singular; Y has dependent rows");
    }
    return best;
}

}  // namespace nntuck
