#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

namespace nntuck {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense third-order tensor with row-major layout over (i, j, k):
/// flat index = (i * d2 + j) * d3 + k.
class Tensor3 {
  public:
    Tensor3() : dims_{0, 0, 0} {}
    Tensor3(Index d1, Index d2, Index d3, double value = 0.0);

    /// All-ones tensor of the given shape.
    static Tensor3 ones(Index d1, Index d2, Index d3) { return Tensor3(d1, d2, d3, 1.0); }

    Index dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    const std::array<Index, 3>& dims() const { return dims_; }
    Index size() const { return static_cast<Index>(data_.size()); }

    double& operator()(Index i, Index j, Index k) {
        return data_[static_cast<std::size_t>((i * dims_[1] + j) * dims_[2] + k)];
    }
    double operator()(Index i, Index j, Index k) const {
        return data_[static_cast<std::size_t>((i * dims_[1] + j) * dims_[2] + k)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_dims(const Tensor3& other) const { return dims_ == other.dims_; }

    double sum() const;
    double max_abs() const;
    bool all_nonnegative() const;
    bool all_finite() const;

    /// Entrywise product, used for mask application.
    Tensor3 hadamard(const Tensor3& other) const;

    bool operator==(const Tensor3& other) const {
        return dims_ == other.dims_ && data_ == other.data_;
    }

  private:
    std::array<Index, 3> dims_;
    std::vector<double> data_;
};

/// The ell-th frontal slice t[:, :, ell] as a d1 x d2 matrix.
Matrix frontal_slice(const Tensor3& t, Index ell);

/// Writes a d1 x d2 matrix into frontal slice ell of t.
void set_frontal_slice(Tensor3& t, Index ell, const Matrix& slice);

/// Mode-n unfolding (n in {1,2,3}) of shape dims[n] x (product of the
/// remaining dims). Columns enumerate the remaining indices with the
/// lower-numbered mode varying fastest, so that for any matrix B with
/// B.cols() == t.dim(n-1) the identity
///   unfold(mode_product(t, B, n), n) == B * unfold(t, n)
/// holds exactly. This is the convention under which the multiplicative
/// update equations are dimensionally consistent.
Matrix unfold(const Tensor3& t, int mode);

/// Inverse of unfold: fold(unfold(t, n), n, t.dims()) == t exactly.
Tensor3 fold(const Matrix& m, int mode, const std::array<Index, 3>& dims);

/// Tensor-times-matrix along the given mode. Elementwise for mode 1:
/// (t x1 B)_{ijk} = sum_h t_{hjk} B_{ih}; modes 2 and 3 are analogous.
/// Requires B.cols() == t.dim(mode-1); the result replaces that dimension
/// with B.rows().
Tensor3 mode_product(const Tensor3& t, const Matrix& b, int mode);

/// Generalized KL divergence sum_{mask=1} a log(a/ahat) - a + ahat, with the
/// convention 0 log(0/x) = 0. Where a > 0 and ahat == 0 the value of ahat is
/// clamped to 1e-12; multiplicative updates with positive initialization keep
/// ahat positive, so the clamp only guards degenerate inputs.
double kl_divergence(const Tensor3& a, const Tensor3& ahat,
                     const std::optional<Tensor3>& mask = std::nullopt);

/// Poisson log-likelihood sum_{mask=1} a log(ahat) - ahat with the factorial
/// constant dropped. Satisfies
///   kl_divergence(a, ahat, m) = sum_m (a log a - a) - poisson_log_likelihood(a, ahat, m).
double poisson_log_likelihood(const Tensor3& a, const Tensor3& ahat,
                              const std::optional<Tensor3>& mask = std::nullopt);

}  // namespace nntuck
