#pragma once

#include <cstdint>
#include <string>

#include "nntuck/model.hpp"
#include "nntuck/solver.hpp"

namespace nntuck {

/// Nested model pairs for the layer-interdependence likelihood ratio tests.
/// The full/nested roles follow the hypotheses the tests encode:
///   IndependenceVsDependent  H0 dependent(K, C)  vs H1 independent(K)
///   RedundanceVsC2           H0 redundant(K)     vs H1 dependent(K, 2)
///   NestedDependent          H0 dependent(K, Cn) vs H1 dependent(K, Cf)
/// Rejecting H0 in the independence test certifies layer independence;
/// failing to reject it indicates layer dependence at the chosen C. Failing
/// to reject in the redundance test indicates layer redundance.
struct TestKind {
    enum class Family { IndependenceVsDependent, RedundanceVsC2, NestedDependent };

    Family family = Family::IndependenceVsDependent;
    Index k = 1;
    Index c = 1;         // C of the dependent model (IndependenceVsDependent)
    Index c_full = 0;    // NestedDependent only
    Index c_nested = 0;  // NestedDependent only

    static TestKind independence_vs_dependent(Index k, Index c);
    static TestKind redundance_vs_c2(Index k);
    static TestKind nested_dependent(Index k, Index c_full, Index c_nested);

    std::string name() const;
};

/// Difference in free parameters between the full and nested model:
/// (L-C)K^2 - LC, K^2 + 2L, or (L+K^2)(Cf-Cn) by family. The signed value,
/// which may be non-positive for degenerate configurations.
long long degrees_of_freedom_raw(const TestKind& kind, Index num_layers);

/// As above but throws when the difference is not positive; such tests are
/// not admissible as chi-squared LRTs.
long long degrees_of_freedom(const TestKind& kind, Index num_layers);

/// Chi-squared survival function P(X >= x) for X ~ chi^2(df), evaluated via
/// the regularized upper incomplete gamma function; absolute error <= 1e-10.
double chi_squared_sf(double x, long long df);

enum class TestMethod { Standard, Split };

struct TestReport {
    TestKind kind;
    TestMethod method = TestMethod::Standard;
    double alpha = 0.05;
    double ll_full = 0.0;
    double ll_nested = 0.0;
    /// Standard: max(0, 2 (ll_full - ll_nested)). Split: the log likelihood
    /// ratio evaluated on the nested fitting half D0.
    double statistic = 0.0;
    long long df = 0;            // standard method only
    double p_value = -1.0;       // standard method only; -1 when absent
    double threshold = 0.0;      // split method only: log(1/alpha)
    bool reject_null = false;
    bool statistic_clipped = false;  // nested fit beat the full fit
    /// True when the parameter-count difference is exactly zero. The
    /// chi-squared calibration degenerates, the test has no power, and the
    /// verdict is fail-to-reject with p = 1.
    bool df_degenerate = false;
    std::uint64_t full_seed = 0;    // selected multistart seeds, for audit
    std::uint64_t nested_seed = 0;
    std::uint64_t split_seed = 0;   // split method only

    std::string verdict() const { return reject_null ? "reject_H0" : "fail_to_reject_H0"; }
    /// The layer-structure reading of the verdict, e.g. failing to reject in
    /// the redundance test reads "layer_redundant".
    std::string interpretation() const;
    std::string to_json() const;
};

struct TestBudget {
    int full_starts = 20;
    int nested_starts = 20;
    FitConfig config;
};

/// Fits both models by multistart on the full data and compares
/// 2 (ll_full - ll_nested), clipped at zero, against chi^2(df).
TestReport standard_lrt(const MultilayerNetwork& network, const TestKind& kind,
                        double alpha, const TestBudget& budget = {});

/// Regularity-free split test: the data is divided by a seeded Bernoulli(1/2)
/// mask into halves D0 and D1 (symmetric for undirected networks); the full
/// model is fit on D1, the nested model on D0, both likelihoods are evaluated
/// on D0 only, and H0 is rejected when the log ratio exceeds log(1/alpha).
TestReport split_lrt(const MultilayerNetwork& network, const TestKind& kind, double alpha,
                     std::uint64_t split_seed,
                     const TestBudget& budget = {20, 50, FitConfig{}});

}  // namespace nntuck
