#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "svrcd/discrete_model.hpp"
#include "svrcd/graph.hpp"
#include "svrcd/metrics.hpp"
#include "svrcd/optimizer.hpp"

namespace svrcd {

enum class GraphType { bipartite, scale_free, random };
enum class ExperimentMode { sweep_lambda1, sweep_lambda2, sweep_gamma, compare, scalability, noise };
enum class Method { svrcd, hc };

std::string to_string(GraphType t);
std::string to_string(ExperimentMode m);
std::string to_string(Method m);
/// Throw ConfigError on unknown names.
GraphType parse_graph_type(std::string_view s);
ExperimentMode parse_mode(std::string_view s);

/// Truth graph of the given family; random DAGs get p edges.
DagGraph make_truth(GraphType type, Index p, std::uint64_t seed);

struct Instance
{
    DagGraph truth;
    Dataset data;
};

/**
 * Replicate r of a synthetic benchmark: truth graph, coefficients, n binary
 * rows and optional noise, all derived from seed + r.
 */
Instance make_instance(GraphType type, Index n, Index p, double noise, std::uint64_t seed, int replicate);

struct ExperimentConfig
{
    GraphType graph_type = GraphType::bipartite;
    Index p = 50;
    Index n = 50;
    int replicates = 20;
    HyperParams hp;
    std::vector<double> noise{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    std::uint64_t seed = 1;
    std::string out;
    ExperimentMode mode = ExperimentMode::compare;
    int max_parents = 3;
    int threads = 1;
};

/// Throws ConfigError.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// One row of an experiment table: a method under fixed (n, p, hyperparameters, noise).
struct Setting
{
    std::string label;
    Method method = Method::svrcd;
    Index n = 0;
    Index p = 0;
    HyperParams hp;
    double noise = 0.0;
};

/// The settings a config expands to, in output order.
std::vector<Setting> expand_settings(const ExperimentConfig& cfg);

struct SettingResult
{
    Setting setting;
    std::vector<MetricsReport> reports;  ///< one per replicate
    MetricsSummary summary;
    std::vector<double> seconds;         ///< wall time per replicate
};

struct RunRecord
{
    nlohmann::json config;
    std::vector<SettingResult> results;
    std::string hash;  ///< content hash of the config (minus out and threads) and every metrics row
};

/**
 * Runs every setting on `replicates` synthetic datasets. Replicate r draws its
 * truth graph, coefficients, rows and noise from seed + r, so settings that
 * share (n, p) share datasets. When cfg.out is set, writes config.json,
 * metrics.csv, aggregate.csv, variance.csv, timing.csv, run.json and the
 * data/, truth/, estimated/ and traces/ trees there. Everything except
 * timing.csv is a pure function of the config.
 */
RunRecord run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// BIC score of one node's multinomial table given its parents.
double bic_family_score(const Dataset& d, Index child, const std::vector<Index>& parents);

/**
 * Greedy hill climbing over single-edge additions, deletions and reversals
 * under the BIC score, keeping only acyclic moves and at most `max_parents`
 * parents per node. Stops at a local optimum.
 */
DagGraph hc_baseline(const Dataset& d, int max_parents = 3);

/// Git blob hash: hex SHA-1 of "blob <size>\0" + content.
std::string content_hash(std::string_view content);

} // namespace svrcd
