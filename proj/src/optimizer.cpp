#include "svrcd/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace svrcd {

void validate(const HyperParams& hp)
{
    if (!(hp.lambda1 >= 0.0)) throw ConfigError("lambda1 must be >= 0");
    if (!(hp.lambda2 >= 0.0)) throw ConfigError("lambda2 must be >= 0");
    if (!(hp.gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (hp.sweeps < 1) throw ConfigError("sweeps must be >= 1");
    if (!(hp.tol >= 0.0)) throw ConfigError("tol must be >= 0");
    if (!(hp.tau >= 0.0)) throw ConfigError("tau must be >= 0");
}

OptimizerState::OptimizerState(const Dataset& d, ParamSet initial, std::uint64_t seed)
    : data(&d),
      params(std::move(initial)),
      snapshot(params),
      snapshot_grad_mean(params.spec()),
      pm{BoolMatrix::Constant(params.size(), params.size(), false)},
      rng(seed)
{
    if (!(params.spec() == d.spec())) throw ShapeMismatch("initial parameters do not match dataset spec");
    refresh_logits();
}

void OptimizerState::refresh_logits()
{
    logits.resize(static_cast<std::size_t>(params.size()));
    for (Index i = 0; i < params.size(); ++i) {
        logits[static_cast<std::size_t>(i)] = data->design() * params.child(i).transpose();
    }
}

namespace {

// Softmax residuals p(x_h) - e_{y_h} for every row, from a logits matrix.
void residuals(const Eigen::MatrixXd& logits, const Dataset& d, Index child, Eigen::MatrixXd& out)
{
    out.resize(logits.rows(), logits.cols());
    for (Index h = 0; h < logits.rows(); ++h) {
        const double top = logits.row(h).maxCoeff();
        out.row(h) = (logits.row(h).array() - top).exp().matrix();
        out.row(h) /= out.row(h).sum();
        out(h, d(h, child)) -= 1.0;
    }
}

/**
 * Shared epoch for a column range [col, col + width) of child i's coefficients.
 * `threshold` is the penalty weight; the step applies gamma * threshold.
 */
void run_epoch(OptimizerState& state, Index child, Index col, Index width, double threshold,
               const HyperParams& hp, GradientMode mode, Index block_id)
{
    const Dataset& d = *state.data;
    const Index n = d.rows();
    if (n == 0) return;
    const Index steps = hp.m >= 0 ? hp.m : n;
    const Index levels = d.spec().levels(child);

    auto& z = state.logits[static_cast<std::size_t>(child)];
    auto block = state.params.child(child).middleCols(col, width);
    auto snap = state.snapshot.child(child).middleCols(col, width);
    auto mu = state.snapshot_grad_mean.child(child).middleCols(col, width);
    const auto xs = d.design().middleCols(col, width);

    // snapshot and its full gradient
    snap = block;
    Eigen::MatrixXd snap_res;
    residuals(z, d, child, snap_res);
    mu.noalias() = snap_res.transpose() * xs / static_cast<double>(n);

    const double step = hp.gamma * penalty_scale(n);
    const double shrink = hp.gamma * threshold;
    // A zero block whose gradient mean sits inside the threshold cannot move:
    // the first step is a pure prox of -gamma * mu, and with beta == snapshot the
    // variance-reduced direction stays mu.
    if (steps == 0) return;
    if (block.isZero(0.0) && step * mu.norm() <= shrink) return;

    std::uniform_int_distribution<Index> pick(0, n - 1);
    Eigen::MatrixXd delta(levels, width);
    Eigen::MatrixXd v(levels, width);
    Eigen::VectorXd logit_h(levels);
    Eigen::VectorXd res_h(levels);
    Eigen::MatrixXd full_logits;
    Eigen::MatrixXd full_res;

    for (Index t = 0; t < steps; ++t) {
        delta = block - snap;
        if (mode == GradientMode::stochastic) {
            const Index h = pick(state.rng);
            const auto x = xs.row(h).transpose();
            logit_h = z.row(h).transpose();
            logit_h.noalias() += delta * x;
            const double top = logit_h.maxCoeff();
            res_h = (logit_h.array() - top).exp().matrix();
            res_h /= res_h.sum();
            res_h(d(h, child)) -= 1.0;
            res_h -= snap_res.row(h).transpose();
            v = mu;
            v.noalias() += res_h * x.transpose();
        } else {
            full_logits = z;
            full_logits.noalias() += xs * delta.transpose();
            residuals(full_logits, d, child, full_res);
            v.noalias() = full_res.transpose() * xs / static_cast<double>(n);
        }

        block -= step * v;
        block.rowwise() -= block.colwise().mean();
        if (shrink > 0.0) {
            const double norm = block.norm();
            if (norm <= shrink) {
                block.setZero();
            } else {
                block *= 1.0 - shrink / norm;
            }
        }
        if (!block.allFinite()) throw NonFiniteUpdate(child, block_id);
    }

    delta = block - snap;
    if (!delta.isZero(0.0)) z.noalias() += xs * delta.transpose();
    snap = block;
}

} // namespace

void svrg_epoch(OptimizerState& state, Index child, Index parent, const HyperParams& hp, GradientMode mode)
{
    const VariableSpec& spec = state.params.spec();
    if (child == parent) throw std::invalid_argument("self block has no parameters");
    if (child < 0 || parent < 0 || child >= spec.size() || parent >= spec.size()) {
        throw NodeOutOfRange("block index out of range");
    }
    const double threshold = hp.lambda1 + (state.pm(child, parent) ? hp.lambda2 : 0.0);
    run_epoch(state, child, spec.offset(parent), spec.dummies(parent), threshold, hp, mode, parent);
}

void svrg_intercept_epoch(OptimizerState& state, Index child, const HyperParams& hp, GradientMode mode)
{
    if (child < 0 || child >= state.params.size()) throw NodeOutOfRange("child index out of range");
    run_epoch(state, child, 0, 1, 0.0, hp, mode, -1);
}

Eigen::MatrixXd variance_reduced_direction(const OptimizerState& state, Index child, Index parent, Index row)
{
    const VariableSpec& spec = state.params.spec();
    const Dataset& d = *state.data;
    const Index col = spec.offset(parent);
    const Index width = spec.dummies(parent);

    const auto grad_at = [&](const ParamSet& p) {
        return sample_grad_ll(p, d, child, row).middleCols(col, width).eval();
    };
    const Eigen::MatrixXd mean_at_snapshot = full_grad_ll(state.snapshot, d, child).middleCols(col, width);
    return grad_at(state.params) - grad_at(state.snapshot) + mean_at_snapshot;
}

ScoreValue learner_score(const ParamSet& params, const Dataset& d, const PathMatrix& pm, const HyperParams& hp)
{
    const double scale = penalty_scale(d.rows());
    return total_score(params, d, pm, scale * hp.lambda1, scale * hp.lambda2);
}

ScoreValue objective(const OptimizerState& state, const HyperParams& hp)
{
    return learner_score(state.params, *state.data, state.pm, hp);
}

ParamSet random_init(const VariableSpec& spec, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ParamSet params(spec);
    for (Index i = 0; i < spec.size(); ++i) {
        auto& w = params.child(i);
        for (Index c = 0; c < w.cols(); ++c) {
            for (Index l = 0; l < w.rows(); ++l) w(l, c) = unit(rng);
        }
        params.block(i, i).setZero();
        w = project_sum_zero(w);
    }
    return params;
}

DagGraph extract_edges(const ParamSet& params, double tau)
{
    DagGraph g(params.size());
    for (Index i = 0; i < params.size(); ++i) {
        for (Index j = 0; j < params.size(); ++j) {
            if (j != i && params.block_norm(i, j) > tau) g.add_edge(j, i);
        }
    }
    return g;
}

DagGraph repair_dag(const DagGraph& g, ParamSet& params)
{
    if (g.size() != params.size()) throw NodeCountMismatch("graph and parameters disagree on node count");
    DagGraph out = g;
    for (auto cycle = find_cycle(out); !cycle.empty(); cycle = find_cycle(out)) {
        Index best_from = -1;
        Index best_to = -1;
        double best_norm = 0.0;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const Index from = cycle[k];
            const Index to = cycle[(k + 1) % cycle.size()];
            const double norm = params.block_norm(to, from);
            const bool better = best_from < 0 || norm < best_norm ||
                                (norm == best_norm && std::pair{to, from} < std::pair{best_to, best_from});
            if (better) {
                best_from = from;
                best_to = to;
                best_norm = norm;
            }
        }
        out.remove_edge(best_from, best_to);
        params.block(best_to, best_from).setZero();
    }
    return out;
}

LearnResult run(const Dataset& data, const HyperParams& hp, std::uint64_t seed, const RunOptions& options)
{
    validate(hp);
    if (data.rows() < 1) throw EmptyInput("learning needs at least one data row");
    if (data.cols() < 2) throw EmptyInput("learning needs at least two variables");
    const auto start = std::chrono::steady_clock::now();

    std::mt19937_64 init_rng(seed);
    OptimizerState state(data, random_init(data.spec(), init_rng), seed ^ 0x9e3779b97f4a7c15ULL);
    const Index p = data.cols();

    if (options.trace_csv) *options.trace_csv << "sweep,neg_ll,sparsity_pen,dag_pen,total,edges\n";
    double previous = 0.0;
    for (int sweep = 1; sweep <= hp.sweeps; ++sweep) {
        state.sweep = sweep;
        state.pm = path_matrix(extract_edges(state.params, hp.tau));
        for (Index i = 0; i < p; ++i) {
            svrg_intercept_epoch(state, i, hp, options.mode);
            for (Index j = 0; j < p; ++j) {
                if (j != i) svrg_epoch(state, i, j, hp, options.mode);
            }
        }
        const ScoreValue score = objective(state, hp);
        state.trace.push_back(score);
        if (options.trace_csv) {
            *options.trace_csv << sweep << ',' << score.neg_ll << ',' << score.sparsity_pen << ','
                               << score.dag_pen << ',' << score.total << ','
                               << extract_edges(state.params, hp.tau).edge_count() << '\n';
        }
        if (sweep > 1) {
            const double change = std::abs(previous - score.total) / std::max(std::abs(previous), 1e-300);
            if (change < hp.tol) break;
        }
        previous = score.total;
    }

    LearnResult result;
    result.params = std::move(state.params);
    result.graph = repair_dag(extract_edges(result.params, hp.tau), result.params);
    result.trace = std::move(state.trace);
    result.sweeps = state.sweep;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace svrcd
