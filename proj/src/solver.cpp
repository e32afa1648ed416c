#include "nntuck/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nntuck/errors.hpp"
#include "nntuck/parallel.hpp"
#include "nntuck/rng.hpp"

namespace nntuck {

namespace {

constexpr double kDenominatorGuard = 1e-12;
constexpr double kRatioClamp = 1e-12;
constexpr double kInitFloorFraction = 1e-3;

Tensor3 tucker(const Tensor3& core, const Matrix& u, const Matrix& v, const Matrix& y) {
    return mode_product(mode_product(mode_product(core, u, 1), v, 2), y, 3);
}

void check_mask(const Tensor3& mask, const Tensor3& adjacency) {
    if (!mask.same_dims(adjacency)) {
        throw std::invalid_argument("mask dimensions must match the adjacency tensor");
    }
    for (double v : mask.data()) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("mask entries must be binary");
        }
    }
}

void check_model_network(const NNTuckModel& model, const MultilayerNetwork& network) {
    if (model.num_nodes() != network.num_nodes() ||
        model.num_layers() != network.num_layers()) {
        throw std::invalid_argument("model dimensions do not match the network");
    }
}

/// Entrywise M o A / Ahat with the same zero conventions as the KL terms:
/// entries where the mask is zero or a is zero contribute nothing, and a
/// vanishing ahat under a positive a is clamped.
Matrix masked_ratio(const Matrix& a, const Matrix& ahat, const Matrix& m) {
    Matrix r(a.rows(), a.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i) {
            const double av = a(i, j);
            r(i, j) = (m(i, j) != 0.0 && av > 0.0)
                          ? av / std::max(ahat(i, j), kRatioClamp)
                          : 0.0;
        }
    return r;
}

Matrix mu_factor_step(const Matrix& factor, const Matrix& a_unfolded,
                      const Matrix& m_unfolded, const Matrix& companion) {
    const Matrix ahat = factor * companion;
    const Matrix ratio = masked_ratio(a_unfolded, ahat, m_unfolded);
    const Matrix numerator = ratio * companion.transpose();
    Matrix denominator = m_unfolded * companion.transpose();
    denominator.array() += kDenominatorGuard;
    return factor.cwiseProduct(numerator.cwiseQuotient(denominator));
}

Matrix companion_u(const NNTuckModel& m) {
    return unfold(mode_product(mode_product(m.core, m.v, 2), m.y, 3), 1);
}
Matrix companion_v(const NNTuckModel& m) {
    return unfold(mode_product(mode_product(m.core, m.u, 1), m.y, 3), 2);
}
Matrix companion_y(const NNTuckModel& m) {
    return unfold(mode_product(mode_product(m.core, m.u, 1), m.v, 2), 3);
}

Tensor3 ones_like(const Tensor3& t) {
    return Tensor3::ones(t.dim(0), t.dim(1), t.dim(2));
}

}  // namespace

void FitConfig::validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
}

NNTuckModel initialize(const MultilayerNetwork& network, const ModelVariant& variant,
                       const FitConfig& config) {
    config.validate();
    const Index n = network.num_nodes();
    const Index l = network.num_layers();
    variant.validate(n, l);
    if (variant.symmetric && network.directed) {
        throw std::invalid_argument("symmetric variant requires an undirected network");
    }
    const Index k = variant.node_communities;
    const Index c = variant.layer_communities;

    Rng rng(config.seed);
    const double lo = kInitFloorFraction * config.init_scale;
    const double hi = config.init_scale;
    auto draw_matrix = [&](Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
        return m;
    };

    NNTuckModel model;
    model.variant = variant;
    model.u = draw_matrix(n, k);
    model.v = variant.symmetric ? model.u : draw_matrix(n, k);
    switch (variant.kind) {
        case VariantKind::Independent: model.y = Matrix::Identity(l, l); break;
        case VariantKind::Redundant: model.y = Matrix::Ones(l, 1); break;
        case VariantKind::Dependent: model.y = draw_matrix(l, c); break;
    }
    model.core = Tensor3(k, k, c);
    for (Index ell = 0; ell < c; ++ell) {
        Matrix slice = draw_matrix(k, k);
        if (variant.symmetric) slice = (slice.transpose() * slice).eval();
        set_frontal_slice(model.core, ell, slice);
    }
    return model;
}

Matrix update_u(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask) {
    check_model_network(model, network);
    const Tensor3 m = mask ? *mask : ones_like(network.adjacency);
    check_mask(m, network.adjacency);
    return mu_factor_step(model.u, unfold(network.adjacency, 1), unfold(m, 1),
                          companion_u(model));
}

Matrix update_v(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask) {
    check_model_network(model, network);
    const Tensor3 m = mask ? *mask : ones_like(network.adjacency);
    check_mask(m, network.adjacency);
    return mu_factor_step(model.v, unfold(network.adjacency, 2), unfold(m, 2),
                          companion_v(model));
}

Matrix update_y(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask) {
    check_model_network(model, network);
    const Tensor3 m = mask ? *mask : ones_like(network.adjacency);
    check_mask(m, network.adjacency);
    return mu_factor_step(model.y, unfold(network.adjacency, 3), unfold(m, 3),
                          companion_y(model));
}

namespace {

Tensor3 core_step(const NNTuckModel& model, const Tensor3& adjacency, const Tensor3& m) {
    const Tensor3 ahat = tucker(model.core, model.u, model.v, model.y);

    Tensor3 ratio = adjacency;
    {
        const std::vector<double>& av = adjacency.data();
        const std::vector<double>& hv = ahat.data();
        const std::vector<double>& mv = m.data();
        std::vector<double>& rv = ratio.data();
        for (std::size_t i = 0; i < rv.size(); ++i) {
            rv[i] = (mv[i] != 0.0 && av[i] > 0.0)
                        ? av[i] / std::max(hv[i], kRatioClamp)
                        : 0.0;
        }
    }
    const Matrix ut = model.u.transpose();
    const Matrix vt = model.v.transpose();
    const Matrix yt = model.y.transpose();
    const Tensor3 numerator = mode_product(mode_product(mode_product(ratio, ut, 1), vt, 2), yt, 3);
    const Tensor3 denominator = mode_product(mode_product(mode_product(m, ut, 1), vt, 2), yt, 3);

    Tensor3 out = model.core;
    const std::vector<double>& nv = numerator.data();
    const std::vector<double>& dv = denominator.data();
    std::vector<double>& ov = out.data();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] *= nv[i] / (dv[i] + kDenominatorGuard);
    }
    if (model.variant.symmetric) {
        for (Index ell = 0; ell < out.dim(2); ++ell) {
            const Matrix slice = frontal_slice(out, ell);
            set_frontal_slice(out, ell, 0.5 * (slice + slice.transpose()));
        }
    }
    return out;
}

}  // namespace

Tensor3 update_core(const NNTuckModel& model, const MultilayerNetwork& network,
                    const std::optional<Tensor3>& mask) {
    check_model_network(model, network);
    const Tensor3 m = mask ? *mask : ones_like(network.adjacency);
    check_mask(m, network.adjacency);
    return core_step(model, network.adjacency, m);
}

namespace {

/// Direct evaluation of ahat_{ija} = sum_{klp} u_ik v_jl y_ap g_klp by loops;
/// deliberately independent of the unfolding machinery.
Tensor3 em_reconstruct(const NNTuckModel& m) {
    const Index n = m.num_nodes(), l = m.num_layers();
    const Index k = m.variant.node_communities, c = m.variant.layer_communities;
    Tensor3 ahat(n, n, l);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index a = 0; a < l; ++a) {
                double s = 0.0;
                for (Index kk = 0; kk < k; ++kk)
                    for (Index ll = 0; ll < k; ++ll)
                        for (Index p = 0; p < c; ++p)
                            s += m.u(i, kk) * m.v(j, ll) * m.y(a, p) * m.core(kk, ll, p);
                ahat(i, j, a) = s;
            }
    return ahat;
}

double em_rho(const NNTuckModel& m, const Tensor3& ahat, Index i, Index j, Index a,
              Index kk, Index ll, Index p) {
    return m.u(i, kk) * m.v(j, ll) * m.y(a, p) * m.core(kk, ll, p) /
           std::max(ahat(i, j, a), kRatioClamp);
}

}  // namespace

Matrix em_update_u(const NNTuckModel& model, const MultilayerNetwork& network) {
    check_model_network(model, network);
    const Tensor3 ahat = em_reconstruct(model);
    const Index n = model.num_nodes(), l = model.num_layers();
    const Index k = model.variant.node_communities, c = model.variant.layer_communities;
    Matrix out(n, k);
    for (Index kk = 0; kk < k; ++kk) {
        double den = 0.0;
        for (Index ll = 0; ll < k; ++ll)
            for (Index p = 0; p < c; ++p)
                den += model.v.col(ll).sum() * model.y.col(p).sum() * model.core(kk, ll, p);
        for (Index i = 0; i < n; ++i) {
            double num = 0.0;
            for (Index j = 0; j < n; ++j)
                for (Index a = 0; a < l; ++a) {
                    const double aval = network.adjacency(i, j, a);
                    if (aval == 0.0) continue;
                    double rho_sum = 0.0;
                    for (Index ll = 0; ll < k; ++ll)
                        for (Index p = 0; p < c; ++p)
                            rho_sum += em_rho(model, ahat, i, j, a, kk, ll, p);
                    num += aval * rho_sum;
                }
            out(i, kk) = num / (den + kDenominatorGuard);
        }
    }
    return out;
}

Matrix em_update_v(const NNTuckModel& model, const MultilayerNetwork& network) {
    check_model_network(model, network);
    const Tensor3 ahat = em_reconstruct(model);
    const Index n = model.num_nodes(), l = model.num_layers();
    const Index k = model.variant.node_communities, c = model.variant.layer_communities;
    Matrix out(n, k);
    for (Index ll = 0; ll < k; ++ll) {
        double den = 0.0;
        for (Index kk = 0; kk < k; ++kk)
            for (Index p = 0; p < c; ++p)
                den += model.u.col(kk).sum() * model.y.col(p).sum() * model.core(kk, ll, p);
        for (Index j = 0; j < n; ++j) {
            double num = 0.0;
            for (Index i = 0; i < n; ++i)
                for (Index a = 0; a < l; ++a) {
                    const double aval = network.adjacency(i, j, a);
                    if (aval == 0.0) continue;
                    double rho_sum = 0.0;
                    for (Index kk = 0; kk < k; ++kk)
                        for (Index p = 0; p < c; ++p)
                            rho_sum += em_rho(model, ahat, i, j, a, kk, ll, p);
                    num += aval * rho_sum;
                }
            out(j, ll) = num / (den + kDenominatorGuard);
        }
    }
    return out;
}

Matrix em_update_y(const NNTuckModel& model, const MultilayerNetwork& network) {
    check_model_network(model, network);
    const Tensor3 ahat = em_reconstruct(model);
    const Index n = model.num_nodes(), l = model.num_layers();
    const Index k = model.variant.node_communities, c = model.variant.layer_communities;
    Matrix out(l, c);
    for (Index p = 0; p < c; ++p) {
        double den = 0.0;
        for (Index kk = 0; kk < k; ++kk)
            for (Index ll = 0; ll < k; ++ll)
                den += model.u.col(kk).sum() * model.v.col(ll).sum() * model.core(kk, ll, p);
        for (Index a = 0; a < l; ++a) {
            double num = 0.0;
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) {
                    const double aval = network.adjacency(i, j, a);
                    if (aval == 0.0) continue;
                    double rho_sum = 0.0;
                    for (Index kk = 0; kk < k; ++kk)
                        for (Index ll = 0; ll < k; ++ll)
                            rho_sum += em_rho(model, ahat, i, j, a, kk, ll, p);
                    num += aval * rho_sum;
                }
            out(a, p) = num / (den + kDenominatorGuard);
        }
    }
    return out;
}

Tensor3 em_update_core(const NNTuckModel& model, const MultilayerNetwork& network) {
    check_model_network(model, network);
    const Tensor3 ahat = em_reconstruct(model);
    const Index n = model.num_nodes(), l = model.num_layers();
    const Index k = model.variant.node_communities, c = model.variant.layer_communities;
    Tensor3 out(k, k, c);
    for (Index kk = 0; kk < k; ++kk)
        for (Index ll = 0; ll < k; ++ll)
            for (Index p = 0; p < c; ++p) {
                double num = 0.0;
                for (Index i = 0; i < n; ++i)
                    for (Index j = 0; j < n; ++j)
                        for (Index a = 0; a < l; ++a) {
                            const double aval = network.adjacency(i, j, a);
                            if (aval == 0.0) continue;
                            num += aval * em_rho(model, ahat, i, j, a, kk, ll, p);
                        }
                const double den = model.u.col(kk).sum() * model.v.col(ll).sum() *
                                   model.y.col(p).sum();
                out(kk, ll, p) = num / (den + kDenominatorGuard);
            }
    return out;
}

FitResult fit(const MultilayerNetwork& network, const ModelVariant& variant,
              const FitConfig& config, const std::optional<Tensor3>& mask) {
    config.validate();
    network.validate();

    const Tensor3& adjacency = network.adjacency;
    const Tensor3 m = mask ? *mask : ones_like(adjacency);
    check_mask(m, adjacency);
    if (variant.symmetric) {
        for (Index ell = 0; ell < m.dim(2); ++ell)
            for (Index i = 0; i < m.dim(0); ++i)
                for (Index j = i + 1; j < m.dim(1); ++j)
                    if (m(i, j, ell) != m(j, i, ell)) {
                        throw std::invalid_argument(
                            "symmetric fits require a layerwise symmetric mask");
                    }
    }

    NNTuckModel model = initialize(network, variant, config);
    const bool update_y_factor = variant.kind == VariantKind::Dependent;

    const Matrix a1 = unfold(adjacency, 1);
    const Matrix m1 = unfold(m, 1);
    Matrix a2, m2, a3, m3;
    if (!variant.symmetric) {
        a2 = unfold(adjacency, 2);
        m2 = unfold(m, 2);
    }
    if (update_y_factor) {
        a3 = unfold(adjacency, 3);
        m3 = unfold(m, 3);
    }

    FitResult result;
    result.seed = config.seed;
    Tensor3 ahat = tucker(model.core, model.u, model.v, model.y);
    result.kl_trace.push_back(kl_divergence(adjacency, ahat, m));

    for (int t = 1; t <= config.max_iters; ++t) {
        model.u = mu_factor_step(model.u, a1, m1, companion_u(model));
        if (variant.symmetric) {
            model.v = model.u;
        } else {
            model.v = mu_factor_step(model.v, a2, m2, companion_v(model));
        }
        if (update_y_factor) {
            model.y = mu_factor_step(model.y, a3, m3, companion_y(model));
        }
        model.core = core_step(model, adjacency, m);

        ahat = tucker(model.core, model.u, model.v, model.y);
        const double kl = kl_divergence(adjacency, ahat, m);
        if (!std::isfinite(kl)) {
            throw NumericalError("non-finite KL divergence at iteration " + std::to_string(t));
        }
        result.kl_trace.push_back(kl);
        result.iterations = t;

        if (t >= config.patience) {
            const double before = result.kl_trace[static_cast<std::size_t>(t - config.patience)];
            if (kl <= 0.0 || (before - kl) / kl < config.rel_tol) {
                result.converged = true;
                break;
            }
        }
    }

    result.model = std::move(model);
    result.log_likelihood = poisson_log_likelihood(adjacency, ahat, m);
    return result;
}

Tensor3 invert_mask(const Tensor3& mask) {
    Tensor3 out = mask;
    for (double& v : out.data()) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("invert_mask: mask entries must be binary");
        }
        v = 1.0 - v;
    }
    return out;
}

FitResult fit_multistart(const MultilayerNetwork& network, const ModelVariant& variant,
                         const FitConfig& config, int n_starts,
                         const std::optional<Tensor3>& mask, Selection selection) {
    if (n_starts < 1) throw std::invalid_argument("fit_multistart requires n_starts >= 1");
    if (selection == Selection::ByTestLogLikelihood && !mask) {
        throw std::invalid_argument("test log-likelihood selection requires a mask");
    }

    std::vector<FitResult> runs(static_cast<std::size_t>(n_starts));
    parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t i) {
        FitConfig run_config = config;
        run_config.seed = config.seed + i;
        runs[i] = fit(network, variant, run_config, mask);
    });

    std::optional<Tensor3> heldout;
    if (selection == Selection::ByTestLogLikelihood) heldout = invert_mask(*mask);
    auto criterion = [&](const FitResult& r) {
        if (selection == Selection::ByTrainLogLikelihood) return r.log_likelihood;
        return poisson_log_likelihood(network.adjacency, reconstruct(r.model), heldout);
    };

    std::size_t best = 0;
    double best_value = criterion(runs[0]);
    for (std::size_t i = 1; i < runs.size(); ++i) {
        const double value = criterion(runs[i]);
        if (value > best_value) {  // ties keep the lowest seed
            best_value = value;
            best = i;
        }
    }
    return std::move(runs[best]);
}

}  // namespace nntuck
