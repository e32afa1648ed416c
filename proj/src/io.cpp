#include "nntuck/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nntuck/errors.hpp"

namespace nntuck {

namespace {

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

long long parse_int(const std::string& token, int line, const char* what) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DataError("line " + std::to_string(line) + ": expected integer " + what +
                        ", got '" + token + "'");
    }
    return value;
}

double parse_double(const std::string& token, int line) {
    try {
        std::size_t used = 0;
        const double value = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line) + ": expected numeric weight, got '" +
                        token + "'");
    }
}

std::vector<std::string> tokenize_record(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

}  // namespace

MultilayerNetwork load_network(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open network file: " + path);

    std::string line;
    int line_number = 0;
    // header: # N=<int> L=<int> directed=<0|1>
    Index n = -1, l = -1;
    bool directed = true;
    bool have_header = false;
    MultilayerNetwork net;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!have_header) {
                Index parsed_n = -1, parsed_l = -1;
                int parsed_directed = -1;
                for (const std::string& token : tokenize_record(body)) {
                    const std::size_t eq = token.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = token.substr(0, eq);
                    const std::string value = token.substr(eq + 1);
                    if (key == "N") parsed_n = parse_int(value, line_number, "N");
                    else if (key == "L") parsed_l = parse_int(value, line_number, "L");
                    else if (key == "directed")
                        parsed_directed = static_cast<int>(parse_int(value, line_number, "directed"));
                }
                if (parsed_n <= 0 || parsed_l <= 0 || (parsed_directed != 0 && parsed_directed != 1)) {
                    throw DataError("line " + std::to_string(line_number) +
                                    ": header must be '# N=<int> L=<int> directed=<0|1>'");
                }
                n = parsed_n;
                l = parsed_l;
                directed = parsed_directed == 1;
                net.adjacency = Tensor3(n, n, l);
                net.directed = directed;
                have_header = true;
            } else if (body.rfind(" node_labels=", 0) == 0 || body.rfind("node_labels=", 0) == 0) {
                net.node_labels = split(body.substr(body.find('=') + 1), ',');
            } else if (body.rfind(" layer_labels=", 0) == 0 || body.rfind("layer_labels=", 0) == 0) {
                net.layer_labels = split(body.substr(body.find('=') + 1), ',');
            }
            continue;
        }
        if (!have_header) {
            throw DataError("line " + std::to_string(line_number) +
                            ": edge record before the '# N=... L=... directed=...' header");
        }
        const std::vector<std::string> tokens = tokenize_record(line);
        if (tokens.size() < 3 || tokens.size() > 4) {
            throw DataError("line " + std::to_string(line_number) +
                            ": expected 'layer i j [weight]'");
        }
        const long long layer = parse_int(tokens[0], line_number, "layer");
        const long long i = parse_int(tokens[1], line_number, "i");
        const long long j = parse_int(tokens[2], line_number, "j");
        const double weight = tokens.size() == 4 ? parse_double(tokens[3], line_number) : 1.0;
        if (layer < 0 || layer >= l) {
            throw DataError("line " + std::to_string(line_number) + ": layer index " +
                            std::to_string(layer) + " out of range [0, " + std::to_string(l) + ")");
        }
        if (i < 0 || i >= n || j < 0 || j >= n) {
            throw DataError("line " + std::to_string(line_number) + ": node index out of range [0, " +
                            std::to_string(n) + ")");
        }
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw DataError("line " + std::to_string(line_number) +
                            ": edge weights must be finite and nonnegative");
        }
        net.adjacency(i, j, layer) += weight;
        if (!directed && i != j) net.adjacency(j, i, layer) += weight;
    }
    if (!have_header) throw DataError("network file has no header: " + path);

    if (options.drop_diagonal) {
        for (Index k = 0; k < l; ++k)
            for (Index d = 0; d < n; ++d) net.adjacency(d, d, k) = 0.0;
    }
    if (options.binarize) {
        for (double& v : net.adjacency.data()) v = v > 0.0 ? 1.0 : 0.0;
    }
    net.validate();
    return net;
}

void save_network(const MultilayerNetwork& network, const std::string& path) {
    network.validate();
    std::ostringstream out;
    out << "# N=" << network.num_nodes() << " L=" << network.num_layers()
        << " directed=" << (network.directed ? 1 : 0) << "\n";
    auto join = [](const std::vector<std::string>& items) {
        std::string joined;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) joined += ',';
            joined += items[i];
        }
        return joined;
    };
    if (!network.node_labels.empty()) out << "# node_labels=" << join(network.node_labels) << "\n";
    if (!network.layer_labels.empty())
        out << "# layer_labels=" << join(network.layer_labels) << "\n";
    for (Index k = 0; k < network.num_layers(); ++k)
        for (Index i = 0; i < network.num_nodes(); ++i)
            for (Index j = network.directed ? Index{0} : i; j < network.num_nodes(); ++j) {
                const double w = network.adjacency(i, j, k);
                if (w == 0.0) continue;
                out << k << '\t' << i << '\t' << j << '\t' << format_double(w) << "\n";
            }
    save_text_atomic(path, out.str());
}

NNTuckModel load_model(const std::string& path) {
    try {
        return model_from_json(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse model file " + path + ": " + e.what());
    }
}

void save_model(const NNTuckModel& model, const std::string& path) {
    save_text_atomic(path, model_to_json(model) + "\n");
}

void save_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw DataError("short write to file: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string kl_trace_csv(const std::vector<double>& trace) {
    std::ostringstream out;
    out << "iteration,kl\n";
    for (std::size_t t = 0; t < trace.size(); ++t) {
        out << t << ',' << format_double(trace[t]) << "\n";
    }
    return out.str();
}

namespace {

std::string variant_triplet(const ModelVariant& v) {
    std::ostringstream out;
    out << to_string(v.kind) << ',' << v.node_communities << ',' << v.layer_communities;
    return out.str();
}

}  // namespace

std::string cv_report_csv(const CvReport& report) {
    std::ostringstream out;
    out << "variant,K,C,fold,auc,train_log_likelihood,test_log_likelihood,"
           "selected_seed,runtime_seconds\n";
    for (const CvCell& cell : report.cells) {
        for (const CvFold& fold : cell.folds) {
            out << variant_triplet(cell.variant) << ',' << fold.fold << ','
                << format_double(fold.auc) << ',' << format_double(fold.train_log_likelihood)
                << ',' << format_double(fold.test_log_likelihood) << ',' << fold.selected_seed
                << ',' << format_double(fold.runtime_seconds) << "\n";
        }
    }
    return out.str();
}

std::string cv_report_json(const CvReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CvCell& cell : report.cells) {
        nlohmann::json folds = nlohmann::json::array();
        for (const CvFold& fold : cell.folds) {
            folds.push_back({{"fold", fold.fold},
                             {"auc", fold.auc},
                             {"train_log_likelihood", fold.train_log_likelihood},
                             {"test_log_likelihood", fold.test_log_likelihood},
                             {"selected_seed", fold.selected_seed},
                             {"runtime_seconds", fold.runtime_seconds}});
        }
        cells.push_back({{"variant", to_string(cell.variant.kind)},
                         {"K", cell.variant.node_communities},
                         {"C", cell.variant.layer_communities},
                         {"mean_auc", cell.mean_auc},
                         {"folds", std::move(folds)}});
    }
    nlohmann::json doc{
        {"task", report.spec.task == MaskTask::IndependentLP ? "independent" : "tubular"},
        {"folds", report.spec.folds},
        {"mask_seed", report.spec.seed},
        {"symmetric_masks", report.spec.symmetric},
        {"n_starts", report.n_starts},
        {"selection",
         report.selection == Selection::ByTrainLogLikelihood ? "train_log_likelihood"
                                                             : "test_log_likelihood"},
        {"fit_seed", report.config.seed},
        {"rel_tol", report.config.rel_tol},
        {"patience", report.config.patience},
        {"max_iters", report.config.max_iters},
        {"cells", std::move(cells)}};
    return doc.dump(2);
}

std::string power_table_csv(const std::vector<PowerCell>& table) {
    std::ostringstream out;
    out << "N,L,replicate,ll_full,ll_nested,statistic,df,p_value,reject\n";
    for (const PowerCell& cell : table) {
        out << cell.n << ',' << cell.l << ',' << cell.replicate << ','
            << format_double(cell.ll_full) << ',' << format_double(cell.ll_nested) << ','
            << format_double(cell.statistic) << ',' << cell.df << ','
            << format_double(cell.p_value) << ',' << (cell.reject ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace nntuck
