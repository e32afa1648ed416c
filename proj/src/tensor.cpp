#include "nntuck/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nntuck {

namespace {

constexpr double kAhatClamp = 1e-12;

void check_mode(int mode) {
    if (mode < 1 || mode > 3) {
        throw std::invalid_argument("tensor mode must be 1, 2, or 3, got " +
                                    std::to_string(mode));
    }
}

void check_same_dims(const Tensor3& a, const Tensor3& b, const char* what) {
    if (!a.same_dims(b)) {
        throw std::invalid_argument(std::string(what) + ": tensor dimensions differ");
    }
}

}  // namespace

Tensor3::Tensor3(Index d1, Index d2, Index d3, double value)
    : dims_{d1, d2, d3},
      data_(static_cast<std::size_t>(d1 * d2 * d3), value) {
    if (d1 <= 0 || d2 <= 0 || d3 <= 0) {
        throw std::invalid_argument("Tensor3 dimensions must be positive");
    }
}

double Tensor3::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool Tensor3::all_nonnegative() const {
    for (double v : data_) {
        if (!(v >= 0.0)) return false;
    }
    return true;
}

bool Tensor3::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor3 Tensor3::hadamard(const Tensor3& other) const {
    check_same_dims(*this, other, "hadamard");
    Tensor3 out = *this;
    for (std::size_t n = 0; n < data_.size(); ++n) out.data_[n] *= other.data_[n];
    return out;
}

Matrix frontal_slice(const Tensor3& t, Index ell) {
    if (ell < 0 || ell >= t.dim(2)) {
        throw std::out_of_range("frontal_slice: layer index " + std::to_string(ell) +
                                " out of range [0, " + std::to_string(t.dim(2)) + ")");
    }
    Matrix out(t.dim(0), t.dim(1));
    for (Index i = 0; i < t.dim(0); ++i)
        for (Index j = 0; j < t.dim(1); ++j) out(i, j) = t(i, j, ell);
    return out;
}

void set_frontal_slice(Tensor3& t, Index ell, const Matrix& slice) {
    if (ell < 0 || ell >= t.dim(2)) {
        throw std::out_of_range("set_frontal_slice: layer index out of range");
    }
    if (slice.rows() != t.dim(0) || slice.cols() != t.dim(1)) {
        throw std::invalid_argument("set_frontal_slice: slice shape mismatch");
    }
    for (Index i = 0; i < t.dim(0); ++i)
        for (Index j = 0; j < t.dim(1); ++j) t(i, j, ell) = slice(i, j);
}

Matrix unfold(const Tensor3& t, int mode) {
    check_mode(mode);
    const Index d1 = t.dim(0), d2 = t.dim(1), d3 = t.dim(2);
    Matrix out;
    switch (mode) {
        case 1:
            out.resize(d1, d2 * d3);
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(i, j + k * d2) = t(i, j, k);
            break;
        case 2:
            out.resize(d2, d1 * d3);
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(j, i + k * d1) = t(i, j, k);
            break;
        default:
            out.resize(d3, d1 * d2);
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(k, i + j * d1) = t(i, j, k);
            break;
    }
    return out;
}

Tensor3 fold(const Matrix& m, int mode, const std::array<Index, 3>& dims) {
    check_mode(mode);
    const Index d1 = dims[0], d2 = dims[1], d3 = dims[2];
    const Index expected_rows = dims[static_cast<std::size_t>(mode - 1)];
    const Index expected_cols = d1 * d2 * d3 / expected_rows;
    if (m.rows() != expected_rows || m.cols() != expected_cols) {
        throw std::invalid_argument(
            "fold: matrix shape " + std::to_string(m.rows()) + "x" +
            std::to_string(m.cols()) + " does not match mode-" + std::to_string(mode) +
            " unfolding of the requested dims");
    }
    Tensor3 out(d1, d2, d3);
    switch (mode) {
        case 1:
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(i, j, k) = m(i, j + k * d2);
            break;
        case 2:
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(i, j, k) = m(j, i + k * d1);
            break;
        default:
            for (Index i = 0; i < d1; ++i)
                for (Index j = 0; j < d2; ++j)
                    for (Index k = 0; k < d3; ++k) out(i, j, k) = m(k, i + j * d1);
            break;
    }
    return out;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& b, int mode) {
    check_mode(mode);
    const Index contracted = t.dim(mode - 1);
    if (b.cols() != contracted) {
        throw std::invalid_argument("mode_product: matrix has " + std::to_string(b.cols()) +
                                    " columns but mode-" + std::to_string(mode) +
                                    " dimension is " + std::to_string(contracted));
    }
    std::array<Index, 3> out_dims = t.dims();
    out_dims[static_cast<std::size_t>(mode - 1)] = b.rows();
    return fold(b * unfold(t, mode), mode, out_dims);
}

namespace {

double masked_reduce(const Tensor3& a, const Tensor3& ahat,
                     const std::optional<Tensor3>& mask, bool kl, const char* what) {
    check_same_dims(a, ahat, what);
    if (mask) check_same_dims(a, *mask, what);
    if (!a.all_nonnegative() || !ahat.all_nonnegative()) {
        throw std::invalid_argument(std::string(what) + ": negative entries");
    }
    const std::vector<double>& av = a.data();
    const std::vector<double>& hv = ahat.data();
    const double* mv = mask ? mask->data().data() : nullptr;
    double total = 0.0;
    for (std::size_t n = 0; n < av.size(); ++n) {
        if (mv && mv[n] == 0.0) continue;
        const double x = av[n];
        const double xhat = hv[n];
        if (x > 0.0) {
            const double safe = xhat > kAhatClamp ? xhat : kAhatClamp;
            total += kl ? x * std::log(x / safe) - x + xhat
                        : x * std::log(safe) - xhat;
        } else {
            total += kl ? xhat : -xhat;
        }
    }
    return total;
}

}  // namespace

double kl_divergence(const Tensor3& a, const Tensor3& ahat,
                     const std::optional<Tensor3>& mask) {
    return masked_reduce(a, ahat, mask, true, "kl_divergence");
}

double poisson_log_likelihood(const Tensor3& a, const Tensor3& ahat,
                              const std::optional<Tensor3>& mask) {
    return masked_reduce(a, ahat, mask, false, "poisson_log_likelihood");
}

}  // namespace nntuck
