#include <doctest.h>

#include <cmath>
#include <random>

#include "nntuck/tensor.hpp"

using namespace nntuck;

namespace {

Tensor3 counting_tensor() {
    // t(i, j, k) = 4i + 2j + k, entries 0..7
    Tensor3 t(2, 2, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k) t(i, j, k) = static_cast<double>(4 * i + 2 * j + k);
    return t;
}

Tensor3 random_tensor(std::mt19937& gen, Index d1, Index d2, Index d3, bool nonneg = false) {
    std::uniform_real_distribution<double> dist(nonneg ? 0.1 : -1.0, 1.0);
    Tensor3 t(d1, d2, d3);
    for (double& v : t.data()) v = dist(gen);
    return t;
}

Matrix random_matrix(std::mt19937& gen, Index rows, Index cols) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
    return m;
}

// Direct elementwise mode product, the oracle the fast path is checked
// against: mode 1 contracts t(h, j, k) b(i, h), modes 2 and 3 analogous.
Tensor3 mode_product_by_definition(const Tensor3& t, const Matrix& b, int mode) {
    std::array<Index, 3> dims = t.dims();
    dims[static_cast<std::size_t>(mode - 1)] = b.rows();
    Tensor3 out(dims[0], dims[1], dims[2]);
    for (Index i = 0; i < dims[0]; ++i)
        for (Index j = 0; j < dims[1]; ++j)
            for (Index k = 0; k < dims[2]; ++k) {
                double s = 0.0;
                for (Index h = 0; h < t.dim(mode - 1); ++h) {
                    if (mode == 1) s += t(h, j, k) * b(i, h);
                    else if (mode == 2) s += t(i, h, k) * b(j, h);
                    else s += t(i, j, h) * b(k, h);
                }
                out(i, j, k) = s;
            }
    return out;
}

double max_rel_diff(const Tensor3& a, const Tensor3& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = std::abs(a.data()[i] - b.data()[i]);
        const double scale = std::max(1.0, std::abs(a.data()[i]));
        worst = std::max(worst, d / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("frontal slice extracts t[:, :, ell]") {
    const Tensor3 t = counting_tensor();
    const Matrix s0 = frontal_slice(t, 0);
    CHECK(s0(0, 0) == 0.0);
    CHECK(s0(0, 1) == 2.0);
    CHECK(s0(1, 0) == 4.0);
    CHECK(s0(1, 1) == 6.0);

    const Tensor3 ones = Tensor3::ones(3, 3, 4);
    CHECK(frontal_slice(ones, 2) == Matrix::Ones(3, 3));

    CHECK_THROWS_AS(frontal_slice(t, 2), std::out_of_range);
    CHECK_THROWS_AS(frontal_slice(t, -1), std::out_of_range);
}

TEST_CASE("mode-1 unfolding stacks column fibers") {
    const Tensor3 t = counting_tensor();
    const Matrix m = unfold(t, 1);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 4);
    // Expected matrix built from the definition: columns are the fibers
    // t[:, j, k], enumerated with j varying fastest.
    Matrix expected(2, 4);
    Index col = 0;
    for (Index k = 0; k < 2; ++k)
        for (Index j = 0; j < 2; ++j, ++col)
            for (Index i = 0; i < 2; ++i) expected(i, col) = t(i, j, k);
    CHECK(m == expected);
}

TEST_CASE("unfolding shapes and errors") {
    const Tensor3 t(5, 5, 3);
    CHECK(unfold(t, 3).rows() == 3);
    CHECK(unfold(t, 3).cols() == 25);
    CHECK_THROWS_AS(unfold(t, 0), std::invalid_argument);
    CHECK_THROWS_AS(unfold(t, 4), std::invalid_argument);
}

TEST_CASE("fold is the inverse of unfold on every mode") {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor3 t = random_tensor(gen, 3, 4, 5);
        for (int mode = 1; mode <= 3; ++mode) {
            CHECK(fold(unfold(t, mode), mode, t.dims()) == t);
        }
    }
    CHECK(fold(Matrix::Zero(2, 4), 1, {2, 2, 2}) == Tensor3(2, 2, 2));
    CHECK_THROWS_AS(fold(Matrix::Zero(3, 4), 1, {2, 2, 2}), std::invalid_argument);
}

TEST_CASE("mode product matches the elementwise definition") {
    std::mt19937 gen(11);
    const Tensor3 t = random_tensor(gen, 4, 3, 5);
    for (int mode = 1; mode <= 3; ++mode) {
        const Matrix b = random_matrix(gen, 6, t.dim(mode - 1));
        const Tensor3 fast = mode_product(t, b, mode);
        const Tensor3 direct = mode_product_by_definition(t, b, mode);
        CHECK(max_rel_diff(fast, direct) < 1e-13);
    }
}

TEST_CASE("mode product identities") {
    std::mt19937 gen(13);
    const Tensor3 t = random_tensor(gen, 4, 4, 3);

    SUBCASE("identity matrix is the identity transform") {
        for (int mode = 1; mode <= 3; ++mode) {
            const Matrix eye = Matrix::Identity(t.dim(mode - 1), t.dim(mode - 1));
            CHECK(mode_product(t, eye, mode) == t);
        }
    }

    SUBCASE("summing frontal slices via a ones row vector") {
        const Tensor3 c = counting_tensor();
        Matrix row(1, 2);
        row << 1.0, 1.0;
        const Tensor3 summed = mode_product(c, row, 3);
        REQUIRE(summed.dims() == std::array<Index, 3>{2, 2, 1});
        CHECK(summed(0, 0, 0) == 1.0);
        CHECK(summed(0, 1, 0) == 5.0);
        CHECK(summed(1, 0, 0) == 9.0);
        CHECK(summed(1, 1, 0) == 13.0);
    }

    SUBCASE("products on distinct modes commute") {
        const Matrix a = random_matrix(gen, 5, 4);
        const Matrix b = random_matrix(gen, 6, 4);
        const Tensor3 left = mode_product(mode_product(t, a, 1), b, 2);
        const Tensor3 right = mode_product(mode_product(t, b, 2), a, 1);
        CHECK(max_rel_diff(left, right) < 1e-12);
    }

    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(mode_product(t, Matrix::Zero(2, 5), 1), std::invalid_argument);
    }
}

TEST_CASE("KL divergence values") {
    SUBCASE("identical tensors give zero") {
        std::mt19937 gen(17);
        const Tensor3 a = random_tensor(gen, 3, 3, 2, /*nonneg=*/true);
        CHECK(kl_divergence(a, a) == 0.0);
    }

    SUBCASE("single-entry value") {
        Tensor3 a(1, 1, 1, 2.0), ahat(1, 1, 1, 1.0);
        CHECK(kl_divergence(a, ahat) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-12));
    }

    SUBCASE("all-zero mask gives an empty sum") {
        Tensor3 a(2, 2, 2, 3.0), ahat(2, 2, 2, 1.0);
        CHECK(kl_divergence(a, ahat, Tensor3(2, 2, 2)) == 0.0);
    }

    SUBCASE("errors") {
        Tensor3 a(2, 2, 2, 1.0);
        CHECK_THROWS_AS(kl_divergence(a, Tensor3(2, 2, 1, 1.0)), std::invalid_argument);
        Tensor3 neg(2, 2, 2, -1.0);
        CHECK_THROWS_AS(kl_divergence(a, neg), std::invalid_argument);
    }
}

TEST_CASE("Poisson log-likelihood values and identity with KL") {
    SUBCASE("zero count") {
        Tensor3 a(1, 1, 1, 0.0), ahat(1, 1, 1, 1.0);
        CHECK(poisson_log_likelihood(a, ahat) == -1.0);
    }
    SUBCASE("count two at rate one") {
        Tensor3 a(1, 1, 1, 2.0), ahat(1, 1, 1, 1.0);
        CHECK(poisson_log_likelihood(a, ahat) == -1.0);
    }
    SUBCASE("KL + loglik equals the data-only constant") {
        std::mt19937 gen(23);
        for (int trial = 0; trial < 20; ++trial) {
            const Tensor3 a = random_tensor(gen, 3, 4, 2, /*nonneg=*/true);
            const Tensor3 ahat = random_tensor(gen, 3, 4, 2, /*nonneg=*/true);
            double data_constant = 0.0;
            for (double x : a.data()) data_constant += x * std::log(x) - x;
            const double kl = kl_divergence(a, ahat);
            const double ll = poisson_log_likelihood(a, ahat);
            CHECK(kl + ll == doctest::Approx(data_constant).epsilon(1e-10));
        }
    }
}

TEST_CASE("KL nonnegativity and detection of perturbations") {
    std::mt19937 gen(29);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor3 a = random_tensor(gen, 4, 4, 3, /*nonneg=*/true);
        Tensor3 ahat = a;
        CHECK(kl_divergence(a, ahat) == 0.0);
        ahat(1, 2, 0) += 0.25;
        CHECK(kl_divergence(a, ahat) > 0.0);
        const Tensor3 other = random_tensor(gen, 4, 4, 3, /*nonneg=*/true);
        CHECK(kl_divergence(a, other) >= 0.0);
    }
}

TEST_CASE("masked KL ignores off-support disagreement") {
    std::mt19937 gen(31);
    const Tensor3 a = random_tensor(gen, 3, 3, 3, /*nonneg=*/true);
    Tensor3 ahat = a;
    Tensor3 mask = Tensor3::ones(3, 3, 3);
    ahat(0, 0, 0) = 5.0;  // disagree only where the mask is zero
    mask(0, 0, 0) = 0.0;
    CHECK(kl_divergence(a, ahat, mask) == 0.0);
}
