#pragma once

#include <string>

#include "nntuck/experiments.hpp"
#include "nntuck/model.hpp"

namespace nntuck {

struct LoadOptions {
    bool drop_diagonal = false;  // zero a_iil on ingestion
    bool binarize = false;       // applied after drop_diagonal
};

/// Reads the line-oriented network format:
///   # N=<int> L=<int> directed=<0|1>
///   # node_labels=a,b,c            (optional)
///   # layer_labels=x,y             (optional)
///   layer<TAB>i<TAB>j[<TAB>weight]
/// Indices are zero-based, omitted weights default to 1, duplicate records
/// sum, and undirected files store each edge once and are mirrored on load.
MultilayerNetwork load_network(const std::string& path, const LoadOptions& options = {});

/// Writes the format above; load_network(save_network(n)) reproduces the
/// adjacency tensor exactly. Undirected networks store the i <= j triangle.
void save_network(const MultilayerNetwork& network, const std::string& path);

NNTuckModel load_model(const std::string& path);
void save_model(const NNTuckModel& model, const std::string& path);

/// Writes content to a temporary file in the target directory, then renames.
void save_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string kl_trace_csv(const std::vector<double>& trace);

/// One row per (variant, K, C, fold):
/// variant,K,C,fold,auc,train_log_likelihood,test_log_likelihood,selected_seed,runtime_seconds
std::string cv_report_csv(const CvReport& report);
std::string cv_report_json(const CvReport& report);

/// One row per (N, L, replicate): N,L,replicate,statistic,df,p_value,reject
std::string power_table_csv(const std::vector<PowerCell>& table);

}  // namespace nntuck
