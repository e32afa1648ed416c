#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nntuck/model.hpp"
#include "nntuck/tensor.hpp"

namespace nntuck {

struct FitConfig {
    double rel_tol = 1e-5;  // relative KL decrease below which we stop
    int patience = 10;      // window length, in sweeps, for the stop rule
    int max_iters = 2000;
    std::uint64_t seed = 0;
    double init_scale = 1.0;

    void validate() const;
};

struct FitResult {
    NNTuckModel model;
    std::vector<double> kl_trace;  // kl_trace[0] is the KL at initialization
    double log_likelihood = 0.0;   // masked Poisson log-likelihood, final model
    bool converged = false;
    int iterations = 0;  // sweeps performed; kl_trace.size() == iterations + 1
    std::uint64_t seed = 0;
};

/// Random strictly positive factors on (1e-3 * init_scale, init_scale], with
/// variant constraints applied: Independent fixes Y = I, Redundant fixes
/// Y = ones, symmetric binds V to U and replaces each core slice G by G^T G.
NNTuckModel initialize(const MultilayerNetwork& network, const ModelVariant& variant,
                       const FitConfig& config);

/// One masked multiplicative update of a single factor, computed from the
/// current model state:
///   U <- U o [M_(1) o A_(1) / Ahat_(1)] W^T / (M_(1) W^T),
/// with W = [core x2 V x3 Y]_(1) and Ahat_(1) = U W. Passing no mask is the
/// same as an all-ones mask and reproduces the unmasked update rules.
/// Denominators carry a 1e-12 guard, so rows with no observed support decay
/// to zero instead of dividing by zero.
Matrix update_u(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask = std::nullopt);
Matrix update_v(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask = std::nullopt);
Matrix update_y(const NNTuckModel& model, const MultilayerNetwork& network,
                const std::optional<Tensor3>& mask = std::nullopt);
Tensor3 update_core(const NNTuckModel& model, const MultilayerNetwork& network,
                    const std::optional<Tensor3>& mask = std::nullopt);

/// One expectation-maximization update of each factor, written directly from
/// the Poisson responsibility form
///   rho_{ijklp}^(a) = u_ik v_jl y_ap g_klp / ahat_ija.
/// Unmasked by construction; in exact arithmetic each one coincides with the
/// corresponding multiplicative update. This path exists to verify that
/// equivalence and is not used in production fitting.
Matrix em_update_u(const NNTuckModel& model, const MultilayerNetwork& network);
Matrix em_update_v(const NNTuckModel& model, const MultilayerNetwork& network);
Matrix em_update_y(const NNTuckModel& model, const MultilayerNetwork& network);
Tensor3 em_update_core(const NNTuckModel& model, const MultilayerNetwork& network);

/// Minimizes the masked KL divergence by sequential multiplicative updates
/// (U, then V, then Y, then the core, then refresh the reconstruction),
/// skipping factors the variant fixes. Stops when the relative KL decrease
/// over a `patience`-sweep window falls below rel_tol, or at max_iters.
/// The KL trace is monotone non-increasing; symmetric runs keep U = V and
/// symmetric core slices at every sweep.
FitResult fit(const MultilayerNetwork& network, const ModelVariant& variant,
              const FitConfig& config, const std::optional<Tensor3>& mask = std::nullopt);

enum class Selection {
    ByTrainLogLikelihood,  // observed-entry log-likelihood
    ByTestLogLikelihood,   // held-out-entry log-likelihood; requires a mask
};

/// Runs fit with seeds config.seed, config.seed + 1, ... and returns the run
/// maximizing the selection criterion; ties break toward the lowest seed.
/// Runs execute in parallel but the reduction is deterministic.
FitResult fit_multistart(const MultilayerNetwork& network, const ModelVariant& variant,
                         const FitConfig& config, int n_starts,
                         const std::optional<Tensor3>& mask = std::nullopt,
                         Selection selection = Selection::ByTrainLogLikelihood);

/// Complement of a binary mask, used for held-out evaluation.
Tensor3 invert_mask(const Tensor3& mask);

}  // namespace nntuck
