#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

#include "svrcd/optimizer.hpp"
#include "test_support.hpp"

using namespace svrcd;

namespace {

Eigen::MatrixXd random_block(std::mt19937_64& rng, Index rows, Index cols)
{
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd b(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) b(r, c) = z(rng);
    }
    return b;
}

double max_column_sum(const ParamSet& params)
{
    double worst = 0.0;
    for (Index i = 0; i < params.size(); ++i) {
        worst = std::max(worst, params.child(i).colwise().sum().cwiseAbs().maxCoeff());
    }
    return worst;
}

ParamSet centred(ParamSet params)
{
    for (Index i = 0; i < params.size(); ++i) params.child(i) = project_sum_zero(params.child(i));
    return params;
}

} // namespace

TEST_CASE("prox_group")
{
    const Eigen::MatrixXd b = (Eigen::MatrixXd(2, 1) << 3, 4).finished();
    CHECK(prox_group(b, 1.0).isApprox((Eigen::MatrixXd(2, 1) << 2.4, 3.2).finished(), 1e-15));
    CHECK(prox_group(b, 5.0).isZero(0.0));
    CHECK(prox_group(b, 7.0).isZero(0.0));
    CHECK(prox_group(b, 0.0) == b);
    CHECK(prox_group(Eigen::MatrixXd::Zero(2, 3), 0.0).isZero(0.0));
}

TEST_CASE("prox_group is non-expansive")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> thr(0.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_block(rng, 3, 2);
        const auto b = random_block(rng, 3, 2);
        const double t = thr(rng);
        CHECK((prox_group(a, t) - prox_group(b, t)).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("project_sum_zero")
{
    const Eigen::MatrixXd b = (Eigen::MatrixXd(2, 1) << 1, 3).finished();
    CHECK(project_sum_zero(b) == (Eigen::MatrixXd(2, 1) << -1, 1).finished());

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = project_sum_zero(random_block(rng, 4, 3));
        CHECK(c.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        CHECK((project_sum_zero(c) - c).cwiseAbs().maxCoeff() < 1e-15);

        // shrinking a centred block keeps it centred, so the two maps commute there
        const double t = 0.5 * static_cast<double>(trial % 5);
        CHECK((prox_group(project_sum_zero(c), t) - project_sum_zero(prox_group(c, t))).cwiseAbs().maxCoeff() <
              1e-14);
    }
}

TEST_CASE("extract_edges")
{
    ParamSet params(VariableSpec::binary(3));
    CHECK(extract_edges(params, 1e-8).edge_count() == 0);

    params.block(2, 0) << 3.0, -4.0;
    const auto g = extract_edges(params, 1e-8);
    CHECK(g.edge_count() == 1);
    CHECK(g.has_edge(0, 2));
    CHECK(extract_edges(params, 5.0).edge_count() == 0);
}

TEST_CASE("repair_dag keeps the stronger edge of a 2-cycle")
{
    ParamSet params(VariableSpec::binary(2));
    params.block(1, 0) << 2.5, -2.5;    // edge 0 -> 1, norm ~3.54
    params.block(0, 1) << 0.05, -0.05;  // edge 1 -> 0, norm ~0.07
    auto g = extract_edges(params, 1e-8);
    const auto repaired = repair_dag(g, params);
    CHECK(repaired.has_edge(0, 1));
    CHECK_FALSE(repaired.has_edge(1, 0));
    CHECK(params.block_norm(0, 1) == 0.0);
    CHECK(params.block_norm(1, 0) > 0.0);
}

TEST_CASE("repair_dag leaves a DAG alone")
{
    std::mt19937_64 rng(3);
    auto params = testing::random_params(rng, VariableSpec::binary(6));
    const auto dag = gen_random_dag(6, 7, 4);
    const auto before = params;
    CHECK(repair_dag(dag, params) == dag);
    for (Index i = 0; i < 6; ++i) CHECK(params.child(i) == before.child(i));
}

TEST_CASE("repair_dag on random cyclic digraphs")
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const auto g = testing::random_digraph(rng, 6);
        auto params = testing::random_params(rng, VariableSpec::binary(g.size()));
        auto again = params;
        const auto repaired = repair_dag(g, params);
        CHECK_FALSE(testing::brute_force_closure(repaired.adjacency()).matrix().diagonal().any());
        CHECK_FALSE((repaired.adjacency() && !g.adjacency()).any());
        for (auto [from, to] : g.edges()) {
            if (!repaired.has_edge(from, to)) CHECK(params.block_norm(to, from) == 0.0);
        }
        CHECK(repair_dag(g, again) == repaired);
    }
}

TEST_CASE("variance-reduced direction averages to the full gradient")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const VariableSpec spec({2, 3, 2, 2});
        const auto d = testing::random_dataset(rng, spec, 11);
        OptimizerState state(d, testing::random_params(rng, spec), 1);
        state.snapshot = testing::random_params(rng, spec);
        for (Index i = 0; i < 4; ++i) {
            for (Index j = 0; j < 4; ++j) {
                if (i == j) continue;
                Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(spec.levels(i), spec.dummies(j));
                for (Index h = 0; h < d.rows(); ++h) mean += variance_reduced_direction(state, i, j, h);
                mean /= static_cast<double>(d.rows());
                const Eigen::MatrixXd full = full_grad_ll(state.params, d, i).middleCols(spec.offset(j), spec.dummies(j));
                CHECK((mean - full).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("stochastic epoch replays the reference update")
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const VariableSpec spec({2, 3, 2});
        const auto d = testing::random_dataset(rng, spec, 15);
        HyperParams hp;
        hp.gamma = 0.05;
        hp.lambda1 = 0.1;
        OptimizerState state(d, centred(testing::random_params(rng, spec)), 77 + trial);
        state.pm = path_matrix(gen_random_dag(3, 2, static_cast<std::uint64_t>(trial)));

        const Index i = trial % 3;
        const Index j = (i + 1 + trial % 2) % 3;
        const double threshold = hp.lambda1 + (state.pm(i, j) ? hp.lambda2 : 0.0);

        // replay with a copy of the generator
        auto replay_rng = state.rng;
        ParamSet current = state.params;
        const ParamSet snapshot = state.params;
        const Index col = spec.offset(j);
        const Index width = spec.dummies(j);
        const Eigen::MatrixXd mu = full_grad_ll(snapshot, d, i).middleCols(col, width);
        std::uniform_int_distribution<Index> pick(0, d.rows() - 1);
        for (Index t = 0; t < d.rows(); ++t) {
            const Index h = pick(replay_rng);
            const Eigen::MatrixXd v = sample_grad_ll(current, d, i, h).middleCols(col, width) -
                                      sample_grad_ll(snapshot, d, i, h).middleCols(col, width) + mu;
            const Eigen::MatrixXd stepped = current.block(i, j) - hp.gamma * penalty_scale(d.rows()) * v;
            current.block(i, j) = prox_group(project_sum_zero(stepped), hp.gamma * threshold);
        }

        svrg_epoch(state, i, j, hp);
        CHECK((state.params.child(i) - current.child(i)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((state.snapshot.block(i, j) - state.params.block(i, j)).isZero(0.0));
        CHECK(max_column_sum(state.params) < 1e-12);
    }
}

TEST_CASE("single-row data makes the stochastic step exact")
{
    std::mt19937_64 rng(7);
    const VariableSpec spec({2, 2, 3});
    const auto d = testing::random_dataset(rng, spec, 1);
    HyperParams hp;
    hp.m = 25;
    hp.gamma = 0.1;
    const auto init = centred(testing::random_params(rng, spec));
    OptimizerState a(d, init, 1);
    OptimizerState b(d, init, 2);
    svrg_epoch(a, 2, 0, hp, GradientMode::stochastic);
    svrg_epoch(b, 2, 0, hp, GradientMode::full_batch);
    CHECK((a.params.child(2) - b.params.child(2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero-length epoch leaves the coefficients alone")
{
    std::mt19937_64 rng(8);
    const VariableSpec spec({2, 2});
    const auto d = testing::random_dataset(rng, spec, 10);
    HyperParams hp;
    hp.m = 0;
    const auto init = centred(testing::random_params(rng, spec));
    OptimizerState state(d, init, 1);
    svrg_epoch(state, 0, 1, hp);
    svrg_intercept_epoch(state, 1, hp);
    for (Index i = 0; i < 2; ++i) CHECK(state.params.child(i) == init.child(i));
    CHECK_THROWS_AS(svrg_epoch(state, 1, 1, hp), std::invalid_argument);
}

TEST_CASE("huge steps are reported as non-finite")
{
    std::mt19937_64 rng(9);
    const VariableSpec spec({2, 2});
    const auto d = testing::random_dataset(rng, spec, 10);
    HyperParams hp;
    hp.gamma = 1e308;
    hp.lambda1 = 0.0;
    OptimizerState state(d, centred(testing::random_params(rng, spec)), 1);
    CHECK_THROWS_AS(svrg_intercept_epoch(state, 0, hp), NonFiniteUpdate);
}

TEST_CASE("full-batch steps never increase the objective")
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        const VariableSpec spec({2, 2, 3, 2});
        const auto d = testing::random_dataset(rng, spec, 20);
        HyperParams hp;
        hp.m = 1;
        std::mt19937_64 init_rng(static_cast<std::uint64_t>(trial));
        OptimizerState state(d, random_init(spec, init_rng), 1);
        for (int sweep = 0; sweep < 3; ++sweep) {
            state.pm = path_matrix(extract_edges(state.params, hp.tau));
            double previous = objective(state, hp).total;
            for (Index i = 0; i < 4; ++i) {
                for (Index j = -1; j < 4; ++j) {
                    if (j == i) continue;
                    for (int step = 0; step < 5; ++step) {
                        if (j < 0) {
                            svrg_intercept_epoch(state, i, hp, GradientMode::full_batch);
                        } else {
                            svrg_epoch(state, i, j, hp, GradientMode::full_batch);
                        }
                        const double now = objective(state, hp).total;
                        CHECK(now <= previous + 1e-9);
                        previous = now;
                    }
                }
            }
        }
    }
}

TEST_CASE("run keeps coefficients centred and returns a DAG")
{
    const auto g = gen_bipartite(8, 3);
    const auto spec = VariableSpec::binary(8);
    const auto d = sample_dataset(g, gen_true_cpds(g, spec, {}, 3), 60, 4);
    HyperParams hp;
    hp.sweeps = 10;
    std::ostringstream trace;
    const auto result = run(d, hp, 5, {GradientMode::stochastic, &trace});
    CHECK(is_dag(result.graph));
    CHECK(max_column_sum(result.params) < 1e-12);
    CHECK(result.trace.size() == static_cast<std::size_t>(result.sweeps));
    CHECK(result.graph == extract_edges(result.params, hp.tau));

    std::istringstream lines(trace.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "sweep,neg_ll,sparsity_pen,dag_pen,total,edges");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == result.sweeps);
}

TEST_CASE("run is deterministic in its seed")
{
    const auto g = gen_random_dag(6, 6, 1);
    const auto spec = VariableSpec::binary(6);
    const auto d = sample_dataset(g, gen_true_cpds(g, spec, {}, 1), 40, 2);
    HyperParams hp;
    hp.sweeps = 8;
    const auto a = run(d, hp, 9);
    const auto b = run(d, hp, 9);
    CHECK(a.graph == b.graph);
    for (Index i = 0; i < 6; ++i) CHECK(a.params.child(i) == b.params.child(i));
}

TEST_CASE("run recovers a single strong edge")
{
    DagGraph g(2);
    g.add_edge(0, 1);
    const auto spec = VariableSpec::binary(2);
    int found = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = sample_dataset(g, gen_true_cpds(g, spec, {}, seed), 2000, seed + 1000);
        const auto result = run(d, HyperParams{}, seed);
        found += result.graph.edge_count() == 1;
    }
    CHECK(found >= 18);
}

TEST_CASE("run input validation")
{
    std::mt19937_64 rng(11);
    const auto d = testing::random_dataset(rng, VariableSpec::binary(3), 10);
    HyperParams bad;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(run(d, bad, 1), ConfigError);
    const auto one_var = testing::random_dataset(rng, VariableSpec::binary(1), 10);
    CHECK_THROWS_AS(run(one_var, HyperParams{}, 1), EmptyInput);
    const auto no_rows = testing::random_dataset(rng, VariableSpec::binary(3), 0);
    CHECK_THROWS_AS(run(no_rows, HyperParams{}, 1), EmptyInput);
}
