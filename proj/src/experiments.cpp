#include "nntuck/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nntuck/errors.hpp"
#include "nntuck/rng.hpp"

namespace nntuck {

Tensor3 make_mask(const MaskSpec& spec, const std::array<Index, 3>& dims) {
    if (spec.folds < 2) throw std::invalid_argument("mask folds must be >= 2");
    if (spec.symmetric && dims[0] != dims[1]) {
        throw std::invalid_argument("symmetric masks require square frontal slices");
    }
    const double heldout = 1.0 / static_cast<double>(spec.folds);
    Rng rng(spec.seed);
    Tensor3 mask(dims[0], dims[1], dims[2], 1.0);

    auto draw = [&] { return rng.uniform01() <= heldout ? 0.0 : 1.0; };

    if (spec.task == MaskTask::IndependentLP) {
        if (spec.symmetric) {
            for (Index i = 0; i < dims[0]; ++i)
                for (Index j = i; j < dims[1]; ++j)
                    for (Index k = 0; k < dims[2]; ++k) {
                        const double bit = draw();
                        mask(i, j, k) = bit;
                        mask(j, i, k) = bit;
                    }
        } else {
            for (double& v : mask.data()) v = draw();
        }
    } else {
        for (Index i = 0; i < dims[0]; ++i)
            for (Index j = spec.symmetric ? i : Index{0}; j < dims[1]; ++j) {
                const double bit = draw();
                for (Index k = 0; k < dims[2]; ++k) {
                    mask(i, j, k) = bit;
                    if (spec.symmetric) mask(j, i, k) = bit;
                }
            }
    }
    return mask;
}

MultilayerNetwork sample_poisson_network(const Matrix& u, const Matrix& v, const Matrix& y,
                                         const Tensor3& core, std::uint64_t seed,
                                         bool directed) {
    if ((u.array() < 0).any() || (v.array() < 0).any() || (y.array() < 0).any() ||
        !core.all_nonnegative()) {
        throw std::invalid_argument("sample_poisson_network requires nonnegative factors");
    }
    const Tensor3 rates =
        mode_product(mode_product(mode_product(core, u, 1), v, 2), y, 3);
    const Index n = rates.dim(0);
    const Index l = rates.dim(2);
    if (rates.dim(1) != n) {
        throw std::invalid_argument("sample_poisson_network requires square rate slices");
    }

    Rng rng(seed);
    MultilayerNetwork net;
    net.directed = directed;
    net.adjacency = Tensor3(n, n, l);
    if (directed) {
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                for (Index k = 0; k < l; ++k)
                    net.adjacency(i, j, k) = static_cast<double>(rng.poisson(rates(i, j, k)));
    } else {
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j)
                for (Index k = 0; k < l; ++k) {
                    const double value = static_cast<double>(rng.poisson(rates(i, j, k)));
                    net.adjacency(i, j, k) = value;
                    net.adjacency(j, i, k) = value;
                }
    }
    return net;
}

SyntheticNetwork synthetic_network(int which, std::uint64_t seed) {
    if (which != 1 && which != 2) {
        throw std::invalid_argument("synthetic_network index must be 1 or 2");
    }
    constexpr Index kNodes = 200;
    constexpr Index kGroups = 2;
    constexpr Index kLayers = 4;

    Matrix base_one(2, 2), base_two(2, 2);
    base_one << 0.2, 0.1, 0.1, 0.2;
    base_two << 0.3, 0.01, 0.01, 0.0;

    const double a = which == 1 ? 0.5 : 1.0;
    const double b = which == 1 ? 0.5 : 0.0;
    const double c = which == 1 ? 0.1 : 0.0;
    const double d = which == 1 ? 0.9 : 1.0;

    NNTuckModel truth;
    truth.variant = ModelVariant::dependent(kGroups, 2);
    truth.u = Matrix::Zero(kNodes, kGroups);
    for (Index i = 0; i < kNodes; ++i) truth.u(i, i < kNodes / 2 ? 0 : 1) = 1.0;
    truth.v = truth.u;
    truth.y = Matrix(kLayers, 2);
    truth.y << 1, 0, a, b, 0, 1, c, d;
    truth.core = Tensor3(kGroups, kGroups, 2);
    set_frontal_slice(truth.core, 0, base_one);
    set_frontal_slice(truth.core, 1, base_two);
    truth.validate();

    SyntheticNetwork out;
    out.ground_truth = truth;
    out.network = sample_poisson_network(truth.u, truth.v, truth.y, truth.core, seed,
                                         /*directed=*/true);
    return out;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("auc requires matching score and label lengths");
    }
    const std::size_t n = scores.size();
    std::size_t positives = 0;
    for (int lab : labels) {
        if (lab != 0 && lab != 1) throw std::invalid_argument("auc labels must be 0 or 1");
        positives += static_cast<std::size_t>(lab);
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw DataError("auc: degenerate label set (needs at least one positive and one negative)");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });

    // midranks over tie groups; rank sum of positives
    double positive_rank_sum = 0.0;
    std::size_t start = 0;
    while (start < n) {
        std::size_t stop = start;
        while (stop + 1 < n && scores[order[stop + 1]] == scores[order[start]]) ++stop;
        const double midrank = 0.5 * static_cast<double>(start + stop) + 1.0;
        for (std::size_t r = start; r <= stop; ++r) {
            if (labels[order[r]] == 1) positive_rank_sum += midrank;
        }
        start = stop + 1;
    }
    const double p = static_cast<double>(positives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

namespace {

struct HeldOut {
    std::vector<double> scores;
    std::vector<int> labels;
};

HeldOut held_out_scores(const Tensor3& adjacency, const Tensor3& rates, const Tensor3& mask) {
    HeldOut out;
    const std::vector<double>& av = adjacency.data();
    const std::vector<double>& rv = rates.data();
    const std::vector<double>& mv = mask.data();
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (mv[i] != 0.0) continue;
        out.scores.push_back(rv[i]);
        out.labels.push_back(av[i] > 0.0 ? 1 : 0);
    }
    return out;
}

}  // namespace

CvReport cross_validate(const MultilayerNetwork& network,
                        const std::vector<ModelVariant>& grid, const MaskSpec& spec,
                        int n_starts, Selection selection, const FitConfig& config) {
    if (grid.empty()) throw std::invalid_argument("cross_validate requires a nonempty grid");
    for (const ModelVariant& variant : grid) {
        variant.validate(network.num_nodes(), network.num_layers());
    }

    CvReport report;
    report.spec = spec;
    report.n_starts = n_starts;
    report.selection = selection;
    report.config = config;

    std::vector<Tensor3> masks;
    for (int f = 0; f < spec.folds; ++f) {
        MaskSpec fold_spec = spec;
        fold_spec.seed = spec.seed + static_cast<std::uint64_t>(f);
        masks.push_back(make_mask(fold_spec, network.adjacency.dims()));
    }

    for (const ModelVariant& variant : grid) {
        CvCell cell;
        cell.variant = variant;
        double auc_sum = 0.0;
        for (int f = 0; f < spec.folds; ++f) {
            const auto t0 = std::chrono::steady_clock::now();
            const FitResult best =
                fit_multistart(network, variant, config, n_starts, masks[static_cast<std::size_t>(f)],
                               selection);
            const Tensor3 rates = reconstruct(best.model);
            const Tensor3 heldout_mask = invert_mask(masks[static_cast<std::size_t>(f)]);
            const HeldOut heldout =
                held_out_scores(network.adjacency, rates, masks[static_cast<std::size_t>(f)]);
            CvFold fold;
            fold.fold = f;
            fold.auc = auc(heldout.scores, heldout.labels);
            fold.train_log_likelihood = best.log_likelihood;
            fold.test_log_likelihood =
                poisson_log_likelihood(network.adjacency, rates, heldout_mask);
            fold.selected_seed = best.seed;
            fold.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            auc_sum += fold.auc;
            cell.folds.push_back(fold);
        }
        cell.mean_auc = auc_sum / static_cast<double>(spec.folds);
        report.cells.push_back(std::move(cell));
    }
    return report;
}

std::vector<PowerCell> lrt_power_study(const std::vector<Index>& n_grid,
                                       const std::vector<Index>& l_grid, Index k,
                                       int replicates, double alpha, std::uint64_t seed,
                                       const TestBudget& budget) {
    std::vector<PowerCell> table;
    if (replicates < 1) return table;

    Matrix affinity(2, 2);
    affinity << 0.2, 0.1, 0.1, 0.2;

    std::uint64_t job = 0;
    for (Index n : n_grid) {
        for (Index l : l_grid) {
            Matrix u = Matrix::Zero(n, 2);
            for (Index i = 0; i < n; ++i) u(i, i < n / 2 ? 0 : 1) = 1.0;
            Tensor3 core(2, 2, 1);
            set_frontal_slice(core, 0, affinity);
            const Matrix y = Matrix::Ones(l, 1);

            for (int rep = 0; rep < replicates; ++rep, ++job) {
                const MultilayerNetwork net =
                    sample_poisson_network(u, u, y, core, seed + job, /*directed=*/true);
                const TestReport report =
                    standard_lrt(net, TestKind::redundance_vs_c2(k), alpha, budget);
                PowerCell cell;
                cell.n = n;
                cell.l = l;
                cell.replicate = rep;
                cell.ll_full = report.ll_full;
                cell.ll_nested = report.ll_nested;
                cell.statistic = report.statistic;
                cell.df = report.df;
                cell.p_value = report.p_value;
                cell.reject = report.reject_null;
                table.push_back(cell);
            }
        }
    }
    return table;
}

}  // namespace nntuck
