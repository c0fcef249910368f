#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "svrcd/discrete_model.hpp"
#include "svrcd/graph.hpp"
#include "svrcd/score.hpp"

namespace svrcd {

struct HyperParams
{
    double lambda1 = 1.0;  ///< group sparsity weight
    double lambda2 = 0.2;  ///< weight on cycle-closing blocks
    double gamma = 0.001;  ///< step size
    Index m = -1;          ///< inner iterations per block epoch; negative means one per data row
    int sweeps = 100;      ///< maximum outer sweeps
    double tol = 1e-5;     ///< relative objective change that ends the run
    double tau = 1e-8;     ///< block norm above which an edge is reported
};

/// Throws ConfigError on out-of-range fields.
void validate(const HyperParams& hp);

/**
 * The learner minimizes
 *
 *     -LL(beta) + sqrt(n) * (lambda1 * sum ||beta_{i.j}|| + lambda2 * sum cyc(i,j) ||beta_{i.j}||)
 *
 * i.e. the penalty weights are quoted per sqrt(n) rows, which keeps one set of
 * defaults usable from tens to thousands of rows.
 */
inline double penalty_scale(Index n) { return std::sqrt(static_cast<double>(n)); }

/// Score with the penalty weights scaled by penalty_scale(d.rows()).
ScoreValue learner_score(const ParamSet& params, const Dataset& d, const PathMatrix& pm, const HyperParams& hp);

// ---- proximal building blocks ------------------------------------------------

/// Group soft-thresholding: max(0, 1 - threshold / ||block||) * block.
template <typename Derived>
typename Derived::PlainObject prox_group(const Eigen::MatrixBase<Derived>& block,
                                         typename Derived::Scalar threshold)
{
    using Scalar = typename Derived::Scalar;
    const Scalar norm = block.norm();
    if (norm <= threshold) return Derived::PlainObject::Zero(block.rows(), block.cols());
    return block * (Scalar(1) - threshold / norm);
}

/// Subtracts each column's mean across rows (child levels), so every column sums to zero.
template <typename Derived>
typename Derived::PlainObject project_sum_zero(const Eigen::MatrixBase<Derived>& block)
{
    typename Derived::PlainObject out = block;
    if (out.rows() > 0) out.rowwise() -= out.colwise().mean();
    return out;
}

// ---- optimizer ---------------------------------------------------------------------

enum class GradientMode {
    stochastic,  ///< variance-reduced single-row steps
    full_batch,  ///< exact mean gradient every step (proximal gradient descent)
};

/**
 * Mutable state of a run. `logits` caches, per child, the n x n_i logits of
 * the current parameters; the epoch routines keep it in sync. Call
 * refresh_logits() after editing `params` by hand.
 */
struct OptimizerState
{
    OptimizerState(const Dataset& data, ParamSet initial, std::uint64_t seed);

    void refresh_logits();

    const Dataset* data;
    ParamSet params;
    ParamSet snapshot;            ///< coefficients at the start of each block's latest epoch
    ParamSet snapshot_grad_mean;  ///< full-data gradient at the snapshot, per block
    PathMatrix pm;
    int sweep = 0;
    std::vector<ScoreValue> trace;
    std::mt19937_64 rng;
    std::vector<Eigen::MatrixXd> logits;
};

/**
 * One variance-reduced epoch on block beta_{i.j}: refresh the snapshot and its
 * full gradient, then m steps of
 *
 *     v     = grad_h(beta) - grad_h(snapshot) + mean_grad(snapshot)
 *     block = prox(project(block - gamma * v), gamma * (lambda1 + lambda2 * cyc(i, j)))
 *
 * with cyc(i, j) read from state.pm. v is built from mean per-row gradients of
 * the negative log-likelihood and the step applies gamma * penalty_scale(n) to
 * it, which is a proximal step of size gamma on learner_score / sqrt(n).
 * Throws NonFiniteUpdate on overflow.
 */
void svrg_epoch(OptimizerState& state, Index child, Index parent, const HyperParams& hp,
                GradientMode mode = GradientMode::stochastic);

/// Same scheme on child i's intercept, with no penalty.
void svrg_intercept_epoch(OptimizerState& state, Index child, const HyperParams& hp,
                          GradientMode mode = GradientMode::stochastic);

/// The variance-reduced direction for row h at the current state, restricted to block (i, j).
Eigen::MatrixXd variance_reduced_direction(const OptimizerState& state, Index child, Index parent, Index row);

/// learner_score of the current parameters under state.pm.
ScoreValue objective(const OptimizerState& state, const HyperParams& hp);

struct LearnResult
{
    DagGraph graph;
    ParamSet params;
    std::vector<ScoreValue> trace;
    int sweeps = 0;
    double seconds = 0.0;
};

struct RunOptions
{
    GradientMode mode = GradientMode::stochastic;
    /// When set, one CSV line "sweep,neg_ll,sparsity_pen,dag_pen,total,edges" per sweep.
    std::ostream* trace_csv = nullptr;
};

/// Uniform (0,1) initial coefficients, centred across levels; self blocks zero.
ParamSet random_init(const VariableSpec& spec, std::mt19937_64& rng);

LearnResult run(const Dataset& data, const HyperParams& hp, std::uint64_t seed, const RunOptions& options = {});

/// Edge j -> i iff ||beta_{i.j}|| > tau.
DagGraph extract_edges(const ParamSet& params, double tau);

/**
 * Breaks every directed cycle by deleting the edge of smallest block norm on
 * it (ties: smallest (child, parent)), zeroing that block in `params`.
 */
DagGraph repair_dag(const DagGraph& g, ParamSet& params);

} // namespace svrcd
