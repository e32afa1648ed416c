#include "nntuck/model.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace nntuck {

using nlohmann::json;

void MultilayerNetwork::validate() const {
    if (adjacency.dim(0) != adjacency.dim(1)) {
        throw std::invalid_argument("network adjacency tensor must be frontally square");
    }
    if (!adjacency.all_nonnegative()) {
        throw std::invalid_argument("network adjacency entries must be nonnegative");
    }
    if (!directed) {
        for (Index ell = 0; ell < num_layers(); ++ell)
            for (Index i = 0; i < num_nodes(); ++i)
                for (Index j = i + 1; j < num_nodes(); ++j)
                    if (adjacency(i, j, ell) != adjacency(j, i, ell)) {
                        throw std::invalid_argument(
                            "undirected network has an asymmetric frontal slice (layer " +
                            std::to_string(ell) + ")");
                    }
    }
    if (!node_labels.empty() && static_cast<Index>(node_labels.size()) != num_nodes()) {
        throw std::invalid_argument("node label count does not match N");
    }
    if (!layer_labels.empty() && static_cast<Index>(layer_labels.size()) != num_layers()) {
        throw std::invalid_argument("layer label count does not match L");
    }
}

std::string to_string(VariantKind kind) {
    switch (kind) {
        case VariantKind::Independent: return "independent";
        case VariantKind::Dependent: return "dependent";
        case VariantKind::Redundant: return "redundant";
    }
    return "unknown";
}

VariantKind variant_kind_from_string(const std::string& name) {
    if (name == "independent") return VariantKind::Independent;
    if (name == "dependent") return VariantKind::Dependent;
    if (name == "redundant") return VariantKind::Redundant;
    throw std::invalid_argument("unknown variant kind: " + name);
}

ModelVariant ModelVariant::independent(Index k, Index num_layers, bool symmetric) {
    return {VariantKind::Independent, k, num_layers, symmetric};
}

ModelVariant ModelVariant::dependent(Index k, Index c, bool symmetric) {
    return {VariantKind::Dependent, k, c, symmetric};
}

ModelVariant ModelVariant::redundant(Index k, bool symmetric) {
    return {VariantKind::Redundant, k, 1, symmetric};
}

void ModelVariant::validate(Index num_nodes, Index num_layers) const {
    if (node_communities < 1 || node_communities > num_nodes) {
        throw std::invalid_argument("node community count K must satisfy 1 <= K <= N");
    }
    if (layer_communities < 1) {
        throw std::invalid_argument("layer community count C must be >= 1");
    }
    switch (kind) {
        case VariantKind::Independent:
            if (layer_communities != num_layers) {
                throw std::invalid_argument("layer independent model requires C = L");
            }
            break;
        case VariantKind::Dependent:
            if (layer_communities >= num_layers) {
                throw std::invalid_argument("layer dependent model requires C < L");
            }
            break;
        case VariantKind::Redundant:
            if (layer_communities != 1) {
                throw std::invalid_argument("layer redundant model requires C = 1");
            }
            break;
    }
}

namespace {

bool matrix_nonnegative(const Matrix& m) { return (m.array() >= 0.0).all(); }

bool is_identity(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    return m == Matrix::Identity(m.rows(), m.cols());
}

}  // namespace

void NNTuckModel::validate() const {
    const Index n = u.rows();
    const Index k = variant.node_communities;
    const Index c = variant.layer_communities;
    const Index l = y.rows();
    variant.validate(n, l);
    if (u.cols() != k || v.rows() != n || v.cols() != k) {
        throw std::invalid_argument("factor matrices U, V must both be N x K");
    }
    if (y.cols() != c) {
        throw std::invalid_argument("factor matrix Y must be L x C");
    }
    if (core.dim(0) != k || core.dim(1) != k || core.dim(2) != c) {
        throw std::invalid_argument("core tensor must be K x K x C");
    }
    if (!matrix_nonnegative(u) || !matrix_nonnegative(v) || !matrix_nonnegative(y) ||
        !core.all_nonnegative()) {
        throw std::invalid_argument("model factors must be nonnegative");
    }
    if (variant.kind == VariantKind::Independent && !is_identity(y)) {
        throw std::invalid_argument("layer independent model requires Y = I");
    }
    if (variant.kind == VariantKind::Redundant && y != Matrix::Ones(l, 1)) {
        throw std::invalid_argument("layer redundant model requires Y = ones");
    }
    if (variant.symmetric) {
        if (u != v) {
            throw std::invalid_argument("symmetric model requires U = V");
        }
        for (Index ell = 0; ell < c; ++ell) {
            const Matrix slice = frontal_slice(core, ell);
            if (slice != slice.transpose().eval()) {
                throw std::invalid_argument("symmetric model requires symmetric core slices");
            }
        }
    }
}

Tensor3 reconstruct(const NNTuckModel& model) {
    if (model.u.cols() != model.core.dim(0) || model.v.cols() != model.core.dim(1) ||
        model.y.cols() != model.core.dim(2)) {
        throw std::invalid_argument("reconstruct: factor/core dimension mismatch");
    }
    Tensor3 t = mode_product(model.core, model.u, 1);
    t = mode_product(t, model.v, 2);
    return mode_product(t, model.y, 3);
}

long long count_parameters(const ModelVariant& variant, Index num_nodes, Index num_layers) {
    const long long n = num_nodes;
    const long long l = num_layers;
    const long long k = variant.node_communities;
    const long long c = variant.layer_communities;
    switch (variant.kind) {
        case VariantKind::Independent: return 2 * n * k + k * k * l;
        case VariantKind::Dependent: return 2 * n * k + l * c + k * k * c;
        case VariantKind::Redundant: return 2 * n * k + k * k;
    }
    throw std::invalid_argument("count_parameters: invalid variant");
}

InterpretabilityCheck check_interpretability(Index k, Index c, bool symmetric) {
    if (k < 1 || c < 1) {
        throw std::invalid_argument("check_interpretability requires K, C >= 1");
    }
    const Index bound = symmetric ? k * (k + 1) / 2 : k * k;
    return c < bound ? InterpretabilityCheck::Ok : InterpretabilityCheck::Warning;
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty()) {
        throw std::invalid_argument(std::string("model json: ") + what + " must be a 2d array");
    }
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows[0].size());
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
            throw std::invalid_argument(std::string("model json: ragged rows in ") + what);
        }
        for (Index j = 0; j < c; ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                          .get<double>();
        }
    }
    return m;
}

}  // namespace

std::string model_to_json(const NNTuckModel& model) {
    json core = json::array();
    for (Index ell = 0; ell < model.core.dim(2); ++ell) {
        core.push_back(matrix_to_json(frontal_slice(model.core, ell)));
    }
    json doc{{"N", model.num_nodes()},
             {"L", model.num_layers()},
             {"K", model.variant.node_communities},
             {"C", model.variant.layer_communities},
             {"variant", to_string(model.variant.kind)},
             {"symmetric", model.variant.symmetric},
             {"U", matrix_to_json(model.u)},
             {"V", matrix_to_json(model.v)},
             {"Y", matrix_to_json(model.y)},
             {"core", std::move(core)}};
    return doc.dump(2);
}

NNTuckModel model_from_json(const std::string& text) {
    const json doc = json::parse(text);
    NNTuckModel model;
    model.variant.kind = variant_kind_from_string(doc.at("variant").get<std::string>());
    model.variant.node_communities = doc.at("K").get<Index>();
    model.variant.layer_communities = doc.at("C").get<Index>();
    model.variant.symmetric = doc.at("symmetric").get<bool>();
    model.u = matrix_from_json(doc.at("U"), "U");
    model.v = matrix_from_json(doc.at("V"), "V");
    model.y = matrix_from_json(doc.at("Y"), "Y");
    const json& core = doc.at("core");
    const Index k = model.variant.node_communities;
    const Index c = model.variant.layer_communities;
    if (static_cast<Index>(core.size()) != c) {
        throw std::invalid_argument("model json: core slice count does not match C");
    }
    model.core = Tensor3(k, k, c);
    for (Index ell = 0; ell < c; ++ell) {
        set_frontal_slice(model.core, ell,
                          matrix_from_json(core[static_cast<std::size_t>(ell)], "core"));
    }
    model.validate();
    return model;
}

}  // namespace nntuck
