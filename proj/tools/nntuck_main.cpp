// Command-line front end: fit | cv | test | interpret | synth | power.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Errors are reported as one JSON object on stderr.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "nntuck/dependence.hpp"
#include "nntuck/errors.hpp"
#include "nntuck/experiments.hpp"
#include "nntuck/interpret.hpp"
#include "nntuck/io.hpp"
#include "nntuck/model.hpp"
#include "nntuck/solver.hpp"

namespace {

using nlohmann::json;
using namespace nntuck;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void emit_error(const char* type, const std::string& message) {
    json doc{{"error", {{"type", type}, {"message", message}}}};
    std::cerr << doc.dump() << "\n";
}

struct CommonFitFlags {
    int starts = 20;
    std::uint64_t seed = 0;
    double rel_tol = 1e-5;
    int patience = 10;
    int max_iters = 2000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--starts", starts, "Number of multistart initializations");
        cmd->add_option("--seed", seed, "Base random seed");
        cmd->add_option("--rel-tol", rel_tol, "Relative KL tolerance for convergence");
        cmd->add_option("--patience", patience, "Convergence window length in sweeps");
        cmd->add_option("--max-iters", max_iters, "Maximum update sweeps per run");
    }

    FitConfig config() const {
        FitConfig cfg;
        cfg.rel_tol = rel_tol;
        cfg.patience = patience;
        cfg.max_iters = max_iters;
        cfg.seed = seed;
        return cfg;
    }

    json to_json() const {
        return {{"starts", starts}, {"seed", seed},           {"rel_tol", rel_tol},
                {"patience", patience}, {"max_iters", max_iters}};
    }
};

ModelVariant parse_variant(const std::string& name, Index k, Index c, Index num_layers,
                           bool symmetric) {
    const VariantKind kind = variant_kind_from_string(name);
    switch (kind) {
        case VariantKind::Independent: return ModelVariant::independent(k, num_layers, symmetric);
        case VariantKind::Redundant: return ModelVariant::redundant(k, symmetric);
        case VariantKind::Dependent: return ModelVariant::dependent(k, c, symmetric);
    }
    throw std::invalid_argument("unknown variant: " + name);
}

std::string matrix_csv(const Matrix& m) {
    std::ostringstream out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            char buffer[32];
            std::snprintf(buffer, sizeof(buffer), "%.17g", m(i, j));
            out << buffer;
        }
        out << "\n";
    }
    return out.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Nonnegative Tucker decomposition of multilayer networks under KL loss"};
    app.require_subcommand(1);

    // ---- fit ----------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Estimate a model and write JSON + KL trace");
    std::string fit_network, fit_variant = "dependent", fit_out = "fit";
    Index fit_k = 2, fit_c = 2;
    bool fit_symmetric = false, fit_drop_diagonal = false, fit_binarize = false;
    CommonFitFlags fit_flags;
    fit_cmd->add_option("--network", fit_network, "Network TSV file")->required();
    fit_cmd->add_option("--variant", fit_variant, "independent | dependent | redundant")
        ->check(CLI::IsMember({"independent", "dependent", "redundant"}));
    fit_cmd->add_option("--K", fit_k, "Node community count");
    fit_cmd->add_option("--C", fit_c, "Layer community count (dependent variant)");
    fit_cmd->add_flag("--symmetric", fit_symmetric, "Tie U = V and keep core slices symmetric");
    fit_cmd->add_flag("--drop-diagonal", fit_drop_diagonal, "Zero self-edges on ingestion");
    fit_cmd->add_flag("--binarize", fit_binarize, "Binarize weights after ingestion");
    fit_flags.attach(fit_cmd);
    fit_cmd->add_option("--out", fit_out, "Output prefix");

    // ---- cv -----------------------------------------------------------
    auto* cv_cmd = app.add_subcommand("cv", "Link-prediction cross-validation over a grid");
    std::string cv_network, cv_task = "independent", cv_selection = "train", cv_out = "cv";
    std::vector<std::string> cv_variants{"independent", "dependent", "redundant"};
    std::vector<Index> cv_ks{2}, cv_cs{2};
    int cv_folds = 5;
    bool cv_drop_diagonal = false, cv_binarize = false;
    CommonFitFlags cv_flags;
    cv_flags.starts = 10;
    cv_cmd->add_option("--network", cv_network, "Network TSV file")->required();
    cv_cmd->add_option("--task", cv_task, "independent | tubular")
        ->check(CLI::IsMember({"independent", "tubular"}));
    cv_cmd->add_option("--folds", cv_folds, "Number of masks b; held-out fraction 1/b");
    cv_cmd->add_option("--variants", cv_variants, "Variants to sweep")->delimiter(',');
    cv_cmd->add_option("--K", cv_ks, "Node community counts")->delimiter(',');
    cv_cmd->add_option("--C", cv_cs, "Layer community counts (dependent only)")->delimiter(',');
    cv_cmd->add_option("--selection", cv_selection,
                       "Multistart selection: train (default) or test log-likelihood")
        ->check(CLI::IsMember({"train", "test"}));
    cv_cmd->add_flag("--drop-diagonal", cv_drop_diagonal, "Zero self-edges on ingestion");
    cv_cmd->add_flag("--binarize", cv_binarize, "Binarize weights after ingestion");
    cv_flags.attach(cv_cmd);
    cv_cmd->add_option("--out", cv_out, "Output prefix");

    // ---- test ---------------------------------------------------------
    auto* test_cmd = app.add_subcommand("test", "Layer interdependence likelihood ratio test");
    std::string test_network, test_kind = "redundance", test_method = "standard",
                test_out = "test.json";
    Index test_k = 2, test_c = 2, test_c_full = 2, test_c_nested = 1;
    double test_alpha = 0.05;
    int test_nested_starts = -1;
    std::uint64_t test_split_seed = 1;
    bool test_drop_diagonal = false, test_binarize = false;
    CommonFitFlags test_flags;
    test_cmd->add_option("--network", test_network, "Network TSV file")->required();
    test_cmd->add_option("--kind", test_kind, "independence | redundance | nested")
        ->check(CLI::IsMember({"independence", "redundance", "nested"}));
    test_cmd->add_option("--K", test_k, "Node community count");
    test_cmd->add_option("--C", test_c, "Dependent-model C (independence test)");
    test_cmd->add_option("--C-full", test_c_full, "Larger C (nested test)");
    test_cmd->add_option("--C-nested", test_c_nested, "Smaller C (nested test)");
    test_cmd->add_option("--alpha", test_alpha, "Significance level");
    test_cmd->add_option("--method", test_method, "standard | split")
        ->check(CLI::IsMember({"standard", "split"}));
    test_cmd->add_option("--nested-starts", test_nested_starts,
                         "Multistarts for the nested model (default 20 standard, 50 split)");
    test_cmd->add_option("--split-seed", test_split_seed, "Seed for the split mask");
    test_cmd->add_flag("--drop-diagonal", test_drop_diagonal, "Zero self-edges on ingestion");
    test_cmd->add_flag("--binarize", test_binarize, "Binarize weights after ingestion");
    test_flags.attach(test_cmd);
    test_cmd->add_option("--out", test_out, "Output report path");

    // ---- interpret ----------------------------------------------------
    auto* interp_cmd = app.add_subcommand("interpret", "Y-factor interpretation CSV blocks");
    std::string interp_model, interp_refs = "auto", interp_out = "interpret.csv";
    std::uint64_t interp_seed = 0;
    interp_cmd->add_option("--model", interp_model, "Model JSON file")->required();
    interp_cmd->add_option("--refs", interp_refs,
                           "Comma-separated reference layers, or 'auto' to maximize |det|");
    interp_cmd->add_option("--seed", interp_seed, "Seed for the reference subset search");
    interp_cmd->add_option("--out", interp_out, "Output CSV path");

    // ---- synth --------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Write a benchmark synthetic network");
    int synth_which = 1;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "synthetic";
    synth_cmd->add_option("--which", synth_which, "1 (mixed layers) or 2 (strata layers)")
        ->check(CLI::IsMember({1, 2}));
    synth_cmd->add_option("--seed", synth_seed, "Sampling seed");
    synth_cmd->add_option("--out", synth_out, "Output prefix");

    // ---- power --------------------------------------------------------
    auto* power_cmd = app.add_subcommand("power", "Redundance-test size study table");
    std::vector<Index> power_ns{50, 100, 200}, power_ls{2, 5, 10};
    Index power_k = 2;
    int power_replicates = 1;
    double power_alpha = 0.05;
    bool power_large = false;
    std::string power_out = "power";
    CommonFitFlags power_flags;
    power_cmd->add_option("--N", power_ns, "Node counts")->delimiter(',');
    power_cmd->add_option("--L", power_ls, "Layer counts")->delimiter(',');
    power_cmd->add_option("--K", power_k, "Node community count");
    power_cmd->add_option("--replicates", power_replicates, "Replicates per cell");
    power_cmd->add_option("--alpha", power_alpha, "Significance level");
    power_cmd->add_flag("--large-grid", power_large,
                        "Use the full grid (N up to 1000, L up to 20); hour-scale runtime");
    power_flags.attach(power_cmd);
    power_cmd->add_option("--out", power_out, "Output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return kExitUsage;
    }

    if (*fit_cmd) {
        const MultilayerNetwork net =
            load_network(fit_network, {fit_drop_diagonal, fit_binarize});
        const ModelVariant variant =
            parse_variant(fit_variant, fit_k, fit_c, net.num_layers(), fit_symmetric);
        const FitResult result =
            fit_multistart(net, variant, fit_flags.config(), fit_flags.starts);
        save_model(result.model, fit_out + ".model.json");
        save_text_atomic(fit_out + ".trace.csv", kl_trace_csv(result.kl_trace));
        json run{{"command", "fit"},
                 {"network", fit_network},
                 {"variant", fit_variant},
                 {"K", fit_k},
                 {"C", result.model.variant.layer_communities},
                 {"symmetric", fit_symmetric},
                 {"drop_diagonal", fit_drop_diagonal},
                 {"binarize", fit_binarize},
                 {"fit", fit_flags.to_json()},
                 {"selected_seed", result.seed},
                 {"converged", result.converged},
                 {"iterations", result.iterations},
                 {"final_kl", result.kl_trace.back()},
                 {"log_likelihood", result.log_likelihood}};
        save_text_atomic(fit_out + ".fit.json", run.dump(2) + "\n");
        return 0;
    }

    if (*cv_cmd) {
        const MultilayerNetwork net = load_network(cv_network, {cv_drop_diagonal, cv_binarize});
        std::vector<ModelVariant> grid;
        for (const std::string& name : cv_variants) {
            const VariantKind kind = variant_kind_from_string(name);
            for (Index k : cv_ks) {
                if (kind == VariantKind::Dependent) {
                    for (Index c : cv_cs) {
                        if (c >= net.num_layers()) continue;  // inadmissible grid point
                        grid.push_back(ModelVariant::dependent(k, c, !net.directed));
                    }
                } else if (kind == VariantKind::Independent) {
                    grid.push_back(ModelVariant::independent(k, net.num_layers(), !net.directed));
                } else {
                    grid.push_back(ModelVariant::redundant(k, !net.directed));
                }
            }
        }
        MaskSpec spec;
        spec.task = cv_task == "independent" ? MaskTask::IndependentLP : MaskTask::TubularLP;
        spec.folds = cv_folds;
        spec.seed = cv_flags.seed;
        spec.symmetric = !net.directed;
        const Selection selection = cv_selection == "train" ? Selection::ByTrainLogLikelihood
                                                            : Selection::ByTestLogLikelihood;
        const CvReport report =
            cross_validate(net, grid, spec, cv_flags.starts, selection, cv_flags.config());
        save_text_atomic(cv_out + ".cv.csv", cv_report_csv(report));
        save_text_atomic(cv_out + ".cv.json", cv_report_json(report));
        return 0;
    }

    if (*test_cmd) {
        const MultilayerNetwork net =
            load_network(test_network, {test_drop_diagonal, test_binarize});
        TestKind kind;
        if (test_kind == "independence") {
            kind = TestKind::independence_vs_dependent(test_k, test_c);
        } else if (test_kind == "redundance") {
            kind = TestKind::redundance_vs_c2(test_k);
        } else {
            kind = TestKind::nested_dependent(test_k, test_c_full, test_c_nested);
        }
        TestBudget budget;
        budget.config = test_flags.config();
        budget.full_starts = test_flags.starts;
        budget.nested_starts =
            test_nested_starts > 0 ? test_nested_starts : (test_method == "split" ? 50 : 20);
        const TestReport report =
            test_method == "standard"
                ? standard_lrt(net, kind, test_alpha, budget)
                : split_lrt(net, kind, test_alpha, test_split_seed, budget);
        save_text_atomic(test_out, report.to_json() + "\n");
        std::cout << report.verdict() << "\n";
        return 0;
    }

    if (*interp_cmd) {
        const NNTuckModel model = load_model(interp_model);
        std::vector<Index> refs;
        if (interp_refs == "auto") {
            refs = choose_reference_layers(model.y, model.variant.layer_communities, interp_seed);
        } else {
            for (const std::string& token : CLI::detail::split(interp_refs, ',')) {
                refs.push_back(static_cast<Index>(std::stoll(token)));
            }
        }
        const ReferenceBasis basis = reference_basis_transform(model, refs);
        std::ostringstream out;
        out << "# Y\n" << matrix_csv(model.y);
        out << "# Y_l1\n" << matrix_csv(row_normalize_l1(model.y));
        out << "# similarity\n" << matrix_csv(layer_similarity(model.y));
        out << "# Y_star\n" << matrix_csv(basis.y_star);
        out << "# reference_layers\n";
        for (std::size_t i = 0; i < refs.size(); ++i) out << (i ? "," : "") << refs[i];
        out << "\n";
        save_text_atomic(interp_out, out.str());
        return 0;
    }

    if (*synth_cmd) {
        const SyntheticNetwork synth = synthetic_network(synth_which, synth_seed);
        save_network(synth.network, synth_out + ".network.tsv");
        save_model(synth.ground_truth, synth_out + ".truth.json");
        json run{{"command", "synth"}, {"which", synth_which}, {"seed", synth_seed}};
        save_text_atomic(synth_out + ".synth.json", run.dump(2) + "\n");
        return 0;
    }

    if (*power_cmd) {
        if (power_large) {
            power_ns = {50, 100, 200, 500, 1000};
            power_ls = {2, 5, 10, 20};
        }
        TestBudget budget;
        budget.config = power_flags.config();
        budget.full_starts = power_flags.starts;
        budget.nested_starts = power_flags.starts;
        const std::vector<PowerCell> table =
            lrt_power_study(power_ns, power_ls, power_k, power_replicates, power_alpha,
                            power_flags.seed, budget);
        std::ostringstream csv;
        csv << "# redundance LRT size study; alpha=" << power_alpha << " K=" << power_k
            << " replicates=" << power_replicates << " seed=" << power_flags.seed
            << " starts=" << power_flags.starts << "\n";
        csv << power_table_csv(table);
        save_text_atomic(power_out + ".power.csv", csv.str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const nntuck::DataError& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const nntuck::NumericalError& e) {
        emit_error("numeric", e.what());
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const std::out_of_range& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        emit_error("numeric", e.what());
        return kExitNumerical;
    }
}
