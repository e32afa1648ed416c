#include "nntuck/dependence.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "nntuck/errors.hpp"
#include "nntuck/rng.hpp"

namespace nntuck {

TestKind TestKind::independence_vs_dependent(Index k, Index c) {
    TestKind t;
    t.family = Family::IndependenceVsDependent;
    t.k = k;
    t.c = c;
    return t;
}

TestKind TestKind::redundance_vs_c2(Index k) {
    TestKind t;
    t.family = Family::RedundanceVsC2;
    t.k = k;
    t.c = 2;
    return t;
}

TestKind TestKind::nested_dependent(Index k, Index c_full, Index c_nested) {
    if (c_nested >= c_full) {
        throw std::invalid_argument("nested_dependent requires C_nested < C_full");
    }
    TestKind t;
    t.family = Family::NestedDependent;
    t.k = k;
    t.c_full = c_full;
    t.c_nested = c_nested;
    return t;
}

std::string TestKind::name() const {
    switch (family) {
        case Family::IndependenceVsDependent: return "independence";
        case Family::RedundanceVsC2: return "redundance";
        case Family::NestedDependent: return "nested_dependent";
    }
    return "unknown";
}

long long degrees_of_freedom_raw(const TestKind& kind, Index num_layers) {
    const long long l = num_layers;
    const long long k = kind.k;
    switch (kind.family) {
        case TestKind::Family::IndependenceVsDependent: {
            const long long c = kind.c;
            return (l - c) * k * k - l * c;
        }
        case TestKind::Family::RedundanceVsC2:
            return k * k + 2 * l;
        case TestKind::Family::NestedDependent:
            return (l + k * k) * (kind.c_full - kind.c_nested);
    }
    throw std::invalid_argument("degrees_of_freedom: invalid test kind");
}

long long degrees_of_freedom(const TestKind& kind, Index num_layers) {
    const long long df = degrees_of_freedom_raw(kind, num_layers);
    if (df <= 0) {
        throw std::invalid_argument("test not admissible: degrees of freedom " +
                                    std::to_string(df) + " is not positive");
    }
    return df;
}

namespace {

// Regularized incomplete gamma functions: P(a, x) by power series and
// Q(a, x) by Lentz continued fraction, following the classic split at
// x < a + 1. Double precision; terminates well under 1e-12 absolute error
// for the df range used here.
double gamma_p_series(double a, double x) {
    const double gln = std::lgamma(a);
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
}

double gamma_q_continued_fraction(double a, double x) {
    const double gln = std::lgamma(a);
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

double regularized_gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

}  // namespace

double chi_squared_sf(double x, long long df) {
    if (df < 1) throw std::invalid_argument("chi_squared_sf requires df >= 1");
    if (x < 0.0) throw std::invalid_argument("chi_squared_sf requires x >= 0");
    return regularized_gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

namespace {

struct ModelPair {
    ModelVariant full;
    ModelVariant nested;
};

ModelPair test_models(const TestKind& kind, const MultilayerNetwork& network) {
    const Index l = network.num_layers();
    const bool symmetric = !network.directed;
    switch (kind.family) {
        case TestKind::Family::IndependenceVsDependent:
            return {ModelVariant::independent(kind.k, l, symmetric),
                    ModelVariant::dependent(kind.k, kind.c, symmetric)};
        case TestKind::Family::RedundanceVsC2:
            // At L == 2 the free-Y C=2 class coincides with the layer
            // independent class up to the usual Y gauge (Y is an invertible
            // 2x2 change of basis absorbed by the core), so the full model is
            // fit in the identified parametrization. df stays K^2 + 2L.
            if (l == 2) {
                return {ModelVariant::independent(kind.k, l, symmetric),
                        ModelVariant::redundant(kind.k, symmetric)};
            }
            return {ModelVariant::dependent(kind.k, 2, symmetric),
                    ModelVariant::redundant(kind.k, symmetric)};
        case TestKind::Family::NestedDependent:
            return {ModelVariant::dependent(kind.k, kind.c_full, symmetric),
                    ModelVariant::dependent(kind.k, kind.c_nested, symmetric)};
    }
    throw std::invalid_argument("invalid test kind");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
}

}  // namespace

std::string TestReport::interpretation() const {
    switch (kind.family) {
        case TestKind::Family::IndependenceVsDependent:
            return reject_null ? "layer_independent" : "layer_dependent";
        case TestKind::Family::RedundanceVsC2:
            return reject_null ? "not_layer_redundant" : "layer_redundant";
        case TestKind::Family::NestedDependent:
            return reject_null ? "prefer_larger_C" : "smaller_C_sufficient";
    }
    return "unknown";
}

std::string TestReport::to_json() const {
    nlohmann::json doc{
        {"test", kind.name()},
        {"K", kind.k},
        {"method", method == TestMethod::Standard ? "standard" : "split"},
        {"alpha", alpha},
        {"ll_full", ll_full},
        {"ll_nested", ll_nested},
        {"statistic", statistic},
        {"verdict", verdict()},
        {"interpretation", interpretation()},
        {"statistic_clipped", statistic_clipped},
        {"full_seed", full_seed},
        {"nested_seed", nested_seed},
    };
    if (kind.family == TestKind::Family::NestedDependent) {
        doc["C_full"] = kind.c_full;
        doc["C_nested"] = kind.c_nested;
    } else {
        doc["C"] = kind.c;
    }
    if (method == TestMethod::Standard) {
        doc["df"] = df;
        doc["p_value"] = p_value;
        doc["df_degenerate"] = df_degenerate;
    } else {
        doc["threshold"] = threshold;
        doc["split_seed"] = split_seed;
    }
    return doc.dump(2);
}

TestReport standard_lrt(const MultilayerNetwork& network, const TestKind& kind,
                        double alpha, const TestBudget& budget) {
    check_alpha(alpha);
    const long long df = degrees_of_freedom_raw(kind, network.num_layers());
    if (df < 0) {
        throw std::invalid_argument("test not admissible: degrees of freedom " +
                                    std::to_string(df) + " is negative");
    }
    const ModelPair models = test_models(kind, network);

    const FitResult full =
        fit_multistart(network, models.full, budget.config, budget.full_starts);
    const FitResult nested =
        fit_multistart(network, models.nested, budget.config, budget.nested_starts);

    TestReport report;
    report.kind = kind;
    report.method = TestMethod::Standard;
    report.alpha = alpha;
    report.ll_full = full.log_likelihood;
    report.ll_nested = nested.log_likelihood;
    report.full_seed = full.seed;
    report.nested_seed = nested.seed;
    const double raw = 2.0 * (full.log_likelihood - nested.log_likelihood);
    report.statistic_clipped = raw < 0.0;
    report.statistic = std::max(0.0, raw);
    report.df = df;
    if (df == 0) {
        // Equal parameter counts: the chi-squared null degenerates to a point
        // mass and the test cannot reject.
        report.df_degenerate = true;
        report.p_value = 1.0;
        report.reject_null = false;
    } else {
        report.p_value = chi_squared_sf(report.statistic, df);
        report.reject_null = report.p_value < alpha;
    }
    return report;
}

TestReport split_lrt(const MultilayerNetwork& network, const TestKind& kind, double alpha,
                     std::uint64_t split_seed, const TestBudget& budget) {
    check_alpha(alpha);
    // Admissibility matches the standard test.
    const long long df = degrees_of_freedom_raw(kind, network.num_layers());
    if (df < 0) {
        throw std::invalid_argument("test not admissible: degrees of freedom " +
                                    std::to_string(df) + " is negative");
    }
    const ModelPair models = test_models(kind, network);

    const Index n = network.num_nodes();
    const Index l = network.num_layers();
    Tensor3 m0(n, n, l);
    Rng rng(split_seed);
    if (network.directed) {
        for (double& v : m0.data()) v = rng.uniform01() <= 0.5 ? 1.0 : 0.0;
    } else {
        for (Index i = 0; i < n; ++i)
            for (Index j = i; j < n; ++j) {
                for (Index ell = 0; ell < l; ++ell) {
                    const double bit = rng.uniform01() <= 0.5 ? 1.0 : 0.0;
                    m0(i, j, ell) = bit;
                    m0(j, i, ell) = bit;
                }
            }
    }
    const Tensor3 m1 = invert_mask(m0);

    const FitResult full =
        fit_multistart(network, models.full, budget.config, budget.full_starts, m1);
    const FitResult nested =
        fit_multistart(network, models.nested, budget.config, budget.nested_starts, m0);

    TestReport report;
    report.kind = kind;
    report.method = TestMethod::Split;
    report.alpha = alpha;
    report.split_seed = split_seed;
    report.full_seed = full.seed;
    report.nested_seed = nested.seed;
    // Both estimates are scored on D0, the half the nested model was fit on.
    report.ll_full = poisson_log_likelihood(network.adjacency, reconstruct(full.model), m0);
    report.ll_nested = nested.log_likelihood;
    report.statistic = report.ll_full - report.ll_nested;
    report.threshold = std::log(1.0 / alpha);
    report.reject_null = report.statistic > report.threshold;
    return report;
}

}  // namespace nntuck
