#pragma once

#include <cstdint>
#include <vector>

#include "nntuck/dependence.hpp"
#include "nntuck/model.hpp"
#include "nntuck/solver.hpp"

namespace nntuck {

enum class MaskTask {
    IndependentLP,  // entries held out i.i.d. with probability 1/folds
    TubularLP,      // whole tubes (i, j, .) held out with probability 1/folds
};

struct MaskSpec {
    MaskTask task = MaskTask::IndependentLP;
    int folds = 5;  // b; held-out probability is 1/b
    std::uint64_t seed = 0;
    bool symmetric = false;  // enforce M_ijl = M_jil
};

/// Binary observation mask (1 = observed, 0 = held out), deterministic per
/// seed. Tubular masks are constant along every tube.
Tensor3 make_mask(const MaskSpec& spec, const std::array<Index, 3>& dims);

/// Draws an integer-weighted network with independent Poisson entries at the
/// Tucker reconstruction rates. Undirected mode samples i <= j and mirrors.
MultilayerNetwork sample_poisson_network(const Matrix& u, const Matrix& v, const Matrix& y,
                                         const Tensor3& core, std::uint64_t seed,
                                         bool directed);

struct SyntheticNetwork {
    MultilayerNetwork network;
    NNTuckModel ground_truth;
};

/// The two benchmark networks: N = 200 nodes in two equal planted groups,
/// L = 4 layers whose affinity matrices are fixed combinations of two base
/// affinities. Network 1 mixes the bases (a=0.5, b=0.5, c=0.1, d=0.9);
/// network 2 assigns layers to strata (a=1, b=0, c=0, d=1).
SyntheticNetwork synthetic_network(int which, std::uint64_t seed);

/// Probability that a uniformly random positive outranks a random negative,
/// ties counted 1/2; computed by midranks in O(n log n). Requires at least
/// one positive and one negative label.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct CvFold {
    int fold = 0;
    double auc = 0.0;
    double train_log_likelihood = 0.0;
    double test_log_likelihood = 0.0;
    std::uint64_t selected_seed = 0;
    double runtime_seconds = 0.0;
};

struct CvCell {
    ModelVariant variant;
    std::vector<CvFold> folds;
    double mean_auc = 0.0;
};

struct CvReport {
    MaskSpec spec;
    int n_starts = 0;
    Selection selection = Selection::ByTrainLogLikelihood;
    FitConfig config;
    std::vector<CvCell> cells;
};

/// Link-prediction cross-validation: draws `folds` independent masks (seed,
/// seed + 1, ...), fits each grid point on the observed entries by
/// multistart, and scores held-out entries by the reconstruction rates
/// against the binarized adjacency.
CvReport cross_validate(const MultilayerNetwork& network,
                        const std::vector<ModelVariant>& grid, const MaskSpec& spec,
                        int n_starts, Selection selection, const FitConfig& config);

struct PowerCell {
    Index n = 0;
    Index l = 0;
    int replicate = 0;
    double ll_full = 0.0;
    double ll_nested = 0.0;
    double statistic = 0.0;
    long long df = 0;
    double p_value = 1.0;
    bool reject = false;
};

/// Size study for the redundance test: for each (N, L) draws layer-redundant
/// networks (every layer the same two-group planted partition) and runs the
/// redundance LRT, recording p-values and rejections.
std::vector<PowerCell> lrt_power_study(const std::vector<Index>& n_grid,
                                       const std::vector<Index>& l_grid, Index k,
                                       int replicates, double alpha, std::uint64_t seed,
                                       const TestBudget& budget = {});

}  // namespace nntuck
