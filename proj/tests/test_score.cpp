#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "svrcd/score.hpp"
#include "test_support.hpp"

using namespace svrcd;

namespace {

/// Per-row probability product, written without the score code.
double direct_log_likelihood(const ParamSet& params, const Dataset& d)
{
    double total = 0.0;
    for (Index h = 0; h < d.rows(); ++h) {
        const Eigen::VectorXd x = encode_row(d.spec(), d.values().row(h).transpose());
        for (Index i = 0; i < d.cols(); ++i) {
            const Eigen::VectorXd logits = params.child(i) * x;
            double denom = 0.0;
            for (Index l = 0; l < logits.size(); ++l) denom += std::exp(logits(l));
            total += std::log(std::exp(logits(d(h, i))) / denom);
        }
    }
    return total;
}

PathMatrix empty_pm(Index p) { return PathMatrix{BoolMatrix::Constant(p, p, false)}; }

struct Relabelled
{
    Dataset data;
    ParamSet params;
    PathMatrix pm;
};

/// Variable `v` becomes `perm[v]` everywhere.
Relabelled relabel(const Dataset& d, const ParamSet& params, const PathMatrix& pm, const std::vector<Index>& perm)
{
    const Index p = d.cols();
    std::vector<int> cards(static_cast<std::size_t>(p));
    for (Index v = 0; v < p; ++v) cards[static_cast<std::size_t>(perm[v])] = d.spec().levels(v);
    const VariableSpec spec(cards);

    Dataset::Values values(d.rows(), p);
    for (Index v = 0; v < p; ++v) values.col(perm[v]) = d.values().col(v);

    ParamSet out(spec);
    BoolMatrix reach(p, p);
    for (Index i = 0; i < p; ++i) {
        out.intercept(perm[i]) = params.intercept(i);
        for (Index j = 0; j < p; ++j) {
            out.block(perm[i], perm[j]) = params.block(i, j);
            reach(perm[i], perm[j]) = pm(i, j);
        }
    }
    return {Dataset(std::move(values), spec), std::move(out), PathMatrix{reach}};
}

} // namespace

TEST_CASE("log-likelihood of zero coefficients is uniform")
{
    std::mt19937_64 rng(1);
    const auto spec = VariableSpec::binary(4);
    const auto d = testing::random_dataset(rng, spec, 7);
    CHECK(log_likelihood(ParamSet(spec), d) == doctest::Approx(7 * 4 * std::log(0.5)).epsilon(1e-14));

    const auto one = testing::random_dataset(rng, VariableSpec::binary(1), 1);
    CHECK(log_likelihood(ParamSet(VariableSpec::binary(1)), one) == doctest::Approx(-0.693147180559945));
}

TEST_CASE("log-likelihood matches the probability-product oracle")
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const VariableSpec spec({2, 3, 2, 4});
        const auto d = testing::random_dataset(rng, spec, 12);
        const auto params = testing::random_params(rng, spec, 2.0);
        const double ll = log_likelihood(params, d);
        CHECK(ll <= 0.0);
        CHECK(std::abs(ll - direct_log_likelihood(params, d)) < 1e-10);
    }
}

TEST_CASE("layout mismatch is rejected")
{
    std::mt19937_64 rng(3);
    const auto d = testing::random_dataset(rng, VariableSpec::binary(3), 5);
    CHECK_THROWS_AS(log_likelihood(ParamSet(VariableSpec::binary(4)), d), ShapeMismatch);
    CHECK_THROWS_AS(log_likelihood(ParamSet(VariableSpec({2, 3, 2})), d), ShapeMismatch);
}

TEST_CASE("sparsity penalty")
{
    ParamSet params(VariableSpec::binary(3));
    CHECK(sparsity_penalty(params, 1.0) == 0.0);

    params.block(1, 0) << 3.0, -4.0;
    CHECK(sparsity_penalty(params, 1.0) == doctest::Approx(5.0));

    params.intercept(2) << 10.0, -10.0;
    CHECK(sparsity_penalty(params, 1.0) == doctest::Approx(5.0));

    std::mt19937_64 rng(4);
    const auto random = testing::random_params(rng, VariableSpec({2, 3, 4}));
    CHECK(sparsity_penalty(random, 2.0) == doctest::Approx(2.0 * sparsity_penalty(random, 1.0)).epsilon(1e-14));
}

TEST_CASE("dag penalty")
{
    std::mt19937_64 rng(5);
    const auto random = testing::random_params(rng, VariableSpec::binary(4));
    CHECK(dag_penalty(random, empty_pm(4), 0.2) == 0.0);

    // edge 0 -> 1 is in the current graph; block beta_{0.1} would add 1 -> 0
    ParamSet params(VariableSpec::binary(2));
    params.block(0, 1) << 3.0, -4.0;
    DagGraph g(2);
    g.add_edge(0, 1);
    CHECK(dag_penalty(params, path_matrix(g), 0.2) == doctest::Approx(1.0));

    // the forward block of an existing edge is never charged
    ParamSet forward(VariableSpec::binary(2));
    forward.block(1, 0) << 3.0, -4.0;
    CHECK(dag_penalty(forward, path_matrix(g), 0.2) == 0.0);
}

TEST_CASE("dag penalty vanishes exactly when no nonzero block closes a cycle")
{
    std::mt19937_64 rng(6);
    std::bernoulli_distribution keep(0.3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto g = testing::random_digraph(rng, 5);
        const Index p = g.size();
        ParamSet params = testing::random_params(rng, VariableSpec::binary(p));
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) {
                if (!keep(rng)) params.block(i, j).setZero();
            }
        }
        const auto pm = path_matrix(g);
        bool closing = false;
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) closing = closing || (i != j && pm(i, j) && params.block_norm(i, j) > 0);
        }
        CHECK((dag_penalty(params, pm, 0.2) == 0.0) == !closing);
    }
}

TEST_CASE("penalties are homogeneous in each block")
{
    std::mt19937_64 rng(7);
    const VariableSpec spec({2, 3, 2});
    auto params = testing::random_params(rng, spec);
    BoolMatrix reach = BoolMatrix::Constant(3, 3, true);
    const PathMatrix pm{reach};
    const double s0 = sparsity_penalty(params, 1.0);
    const double d0 = dag_penalty(params, pm, 0.5);
    const double norm = params.block_norm(2, 1);
    for (double t : {0.0, 0.5, 3.0}) {
        auto scaled = params;
        scaled.block(2, 1) *= t;
        CHECK(sparsity_penalty(scaled, 1.0) == doctest::Approx(s0 + (t - 1) * norm).epsilon(1e-12));
        CHECK(dag_penalty(scaled, pm, 0.5) == doctest::Approx(d0 + 0.5 * (t - 1) * norm).epsilon(1e-12));
    }
}

TEST_CASE("total score recombines and decomposes per child")
{
    std::mt19937_64 rng(8);
    const VariableSpec spec({2, 2, 3, 2});
    const auto d = testing::random_dataset(rng, spec, 15);

    const auto zero = total_score(ParamSet(spec), d, empty_pm(4), 1.0, 0.2);
    CHECK(zero.total == doctest::Approx(-(15 * 3 * std::log(0.5) + 15 * std::log(1.0 / 3.0))));
    CHECK(zero.sparsity_pen == 0.0);
    CHECK(zero.dag_pen == 0.0);

    for (int trial = 0; trial < 20; ++trial) {
        const auto params = testing::random_params(rng, spec);
        const auto pm = path_matrix(gen_random_dag(4, 3, static_cast<std::uint64_t>(trial)));
        const auto s = total_score(params, d, pm, 1.0, 0.2);
        CHECK(s.total - s.sparsity_pen - s.dag_pen == doctest::Approx(s.neg_ll).epsilon(1e-15));
        CHECK(s.sparsity_pen >= 0.0);
        CHECK(s.dag_pen >= 0.0);

        // per-child objectives summed
        double sum = 0.0;
        for (Index i = 0; i < 4; ++i) {
            double child = -child_log_likelihood(params, d, i);
            for (Index j = 0; j < 4; ++j) {
                if (j == i) continue;
                child += (1.0 + (pm(i, j) ? 0.2 : 0.0)) * params.block_norm(i, j);
            }
            sum += child;
        }
        CHECK(sum == doctest::Approx(s.total).epsilon(1e-12));

        double ll = 0.0;
        for (Index i = 0; i < 4; ++i) ll += child_log_likelihood(params, d, i);
        CHECK(ll == doctest::Approx(log_likelihood(params, d)).epsilon(1e-14));
    }
}

TEST_CASE("score parts are covariant under relabelling")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const VariableSpec spec({2, 3, 2, 4, 2});
        const auto d = testing::random_dataset(rng, spec, 10);
        const auto params = testing::random_params(rng, spec);
        auto g = testing::random_digraph(rng, 5);
        while (g.size() != 5) g = testing::random_digraph(rng, 5);
        const auto pm = path_matrix(g);

        std::vector<Index> perm(5);
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto r = relabel(d, params, pm, perm);

        const auto a = total_score(params, d, pm, 1.0, 0.2);
        const auto b = total_score(r.params, r.data, r.pm, 1.0, 0.2);
        CHECK(a.neg_ll == doctest::Approx(b.neg_ll).epsilon(1e-12));
        CHECK(a.sparsity_pen == doctest::Approx(b.sparsity_pen).epsilon(1e-12));
        CHECK(a.dag_pen == doctest::Approx(b.dag_pen).epsilon(1e-12));
    }
}

TEST_CASE("per-row gradient by hand")
{
    // zero coefficients, x_0 = 1, child 1 observed at level 1
    const auto spec = VariableSpec::binary(2);
    Dataset::Values values(1, 2);
    values << 1, 1;
    const Dataset d(values, spec);
    const auto grad = sample_grad_ll(ParamSet(spec), d, 1, 0);
    CHECK(grad(1, spec.offset(0)) == doctest::Approx(-0.5));
    CHECK(grad(0, spec.offset(0)) == doctest::Approx(0.5));
    CHECK(grad.col(spec.offset(1)).isZero(0.0));

    // near-perfect prediction drives the gradient to zero
    ParamSet sharp(spec);
    sharp.intercept(1) << -40.0, 40.0;
    CHECK(sample_grad_ll(sharp, d, 1, 0).cwiseAbs().maxCoeff() < 1e-30);
}

TEST_CASE("analytic gradients match finite differences")
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const VariableSpec spec({2, 3, 2});
        const auto d = testing::random_dataset(rng, spec, 10);
        const auto params = testing::random_params(rng, spec);

        const std::function<double(const ParamSet&)> mean_nll = [&](const ParamSet& b) {
            return -log_likelihood(b, d) / static_cast<double>(d.rows());
        };
        const auto fd = fd_gradient(mean_nll, params, 1e-5);
        for (Index i = 0; i < 3; ++i) {
            CHECK(testing::max_rel_error(full_grad_ll(params, d, i), fd.child(i), 1e-8) < 1e-6);
        }

        const Index h = trial % d.rows();
        const Dataset row(d.values().row(h), spec);
        const std::function<double(const ParamSet&)> row_nll = [&](const ParamSet& b) {
            return -log_likelihood(b, row);
        };
        const auto fd_row = fd_gradient(row_nll, params, 1e-5);
        for (Index i = 0; i < 3; ++i) {
            CHECK(testing::max_rel_error(sample_grad_ll(params, d, i, h), fd_row.child(i), 1e-8) < 1e-6);
        }
    }
}

TEST_CASE("full gradient is the row mean")
{
    std::mt19937_64 rng(11);
    const VariableSpec spec({3, 2, 2});
    const auto d = testing::random_dataset(rng, spec, 9);
    const auto params = testing::random_params(rng, spec);

    for (Index i = 0; i < 3; ++i) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(spec.levels(i), spec.width());
        for (Index h = 0; h < d.rows(); ++h) sum += sample_grad_ll(params, d, i, h);
        CHECK((sum / 9.0 - full_grad_ll(params, d, i)).cwiseAbs().maxCoeff() < 1e-14);
    }

    const Dataset one(d.values().topRows(1), spec);
    CHECK((full_grad_ll(params, one, 0) - sample_grad_ll(params, one, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);

    const auto doubled = Dataset::concat(d, d);
    for (Index i = 0; i < 3; ++i) {
        CHECK((full_grad_ll(params, doubled, i) - full_grad_ll(params, d, i)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("fd_gradient on closed-form objectives")
{
    std::mt19937_64 rng(12);
    const VariableSpec spec({2, 3});
    const auto beta = testing::random_params(rng, spec);
    const auto c = testing::random_params(rng, spec);

    const std::function<double(const ParamSet&)> quadratic = [&](const ParamSet& b) {
        double s = 0.0;
        for (Index i = 0; i < b.size(); ++i) s += 0.5 * b.child(i).squaredNorm();
        return s;
    };
    const std::function<double(const ParamSet&)> linear = [&](const ParamSet& b) {
        double s = 0.0;
        for (Index i = 0; i < b.size(); ++i) s += c.child(i).cwiseProduct(b.child(i)).sum();
        return s;
    };
    const auto gq = fd_gradient(quadratic, beta, 1e-4);
    const auto gl = fd_gradient(linear, beta, 1e-3);
    for (Index i = 0; i < 2; ++i) {
        CHECK((gq.child(i) - beta.child(i)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((gl.child(i) - c.child(i)).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS(fd_gradient(linear, beta, 0.0));
}
