#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "svrcd/discrete_model.hpp"
#include "svrcd/graph.hpp"

namespace svrcd {

template <typename Scalar>
struct ScoreValueT
{
    Scalar neg_ll = 0;
    Scalar sparsity_pen = 0;
    Scalar dag_pen = 0;
    Scalar total = 0;
};
using ScoreValue = ScoreValueT<double>;

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v)
{
    const auto top = v.maxCoeff();
    return top + std::log((v.array() - top).exp().sum());
}

namespace detail {

template <typename Scalar>
void check_layout(const ParamSetT<Scalar>& params, const Dataset& d)
{
    if (!(params.spec() == d.spec())) {
        throw ShapeMismatch("parameter layout does not match dataset spec");
    }
}

/// Rows of the child's logits, n x n_i.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> child_logits(const ParamSetT<Scalar>& params,
                                                                  const Dataset& d, Index i)
{
    return d.design().template cast<Scalar>() * params.child(i).transpose();
}

} // namespace detail

/// Log-likelihood contribution of one child: sum_h log P(d_hi | x_h).
template <typename Scalar>
Scalar child_log_likelihood(const ParamSetT<Scalar>& params, const Dataset& d, Index i)
{
    detail::check_layout(params, d);
    const auto logits = detail::child_logits(params, d, i);
    Scalar ll = 0;
    for (Index h = 0; h < d.rows(); ++h) ll += logits(h, d(h, i)) - log_sum_exp(logits.row(h));
    return ll;
}

/// Multi-logit log-likelihood of the whole dataset; decomposes as a sum over children.
template <typename Scalar>
Scalar log_likelihood(const ParamSetT<Scalar>& params, const Dataset& d)
{
    detail::check_layout(params, d);
    Scalar ll = 0;
    for (Index i = 0; i < params.size(); ++i) ll += child_log_likelihood(params, d, i);
    return ll;
}

/// lambda1 times the sum of Frobenius norms of every parent block. Intercepts are not penalized.
template <typename Scalar>
Scalar sparsity_penalty(const ParamSetT<Scalar>& params, double lambda1)
{
    Scalar sum = 0;
    for (Index i = 0; i < params.size(); ++i) {
        for (Index j = 0; j < params.size(); ++j) {
            if (j != i) sum += params.block_norm(i, j);
        }
    }
    return Scalar(lambda1) * sum;
}

/**
 * lambda2 times the norms of the cycle-closing blocks: beta_{i.j} (edge j -> i)
 * counts when pm already has a path i -> j.
 */
template <typename Scalar>
Scalar dag_penalty(const ParamSetT<Scalar>& params, const PathMatrix& pm, double lambda2)
{
    if (pm.size() != params.size()) throw ShapeMismatch("path matrix size does not match parameters");
    Scalar sum = 0;
    for (Index i = 0; i < params.size(); ++i) {
        for (Index j = 0; j < params.size(); ++j) {
            if (j != i && pm(i, j)) sum += params.block_norm(i, j);
        }
    }
    return Scalar(lambda2) * sum;
}

template <typename Scalar>
ScoreValueT<Scalar> total_score(const ParamSetT<Scalar>& params, const Dataset& d, const PathMatrix& pm,
                                double lambda1, double lambda2)
{
    ScoreValueT<Scalar> s;
    s.neg_ll = -log_likelihood(params, d);
    s.sparsity_pen = sparsity_penalty(params, lambda1);
    s.dag_pen = dag_penalty(params, pm, lambda2);
    s.total = s.neg_ll + s.sparsity_pen + s.dag_pen;
    return s;
}

/**
 * Gradient of the row-h negative log-likelihood with respect to child i's
 * coefficients, an n_i x width matrix: entry (l, k) is -(y_hil - p_il(x_h)) x_hk.
 * The self-block columns are zero since those coefficients are fixed.
 */
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_grad_ll(const ParamSetT<Scalar>& params,
                                                                    const Dataset& d, Index i, Index h)
{
    detail::check_layout(params, d);
    if (h < 0 || h >= d.rows()) throw std::out_of_range("row index out of range");
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = d.design().row(h).transpose().template cast<Scalar>();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = softmax(params.child(i) * x);
    residual(d(h, i)) -= Scalar(1);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grad = residual * x.transpose();
    grad.middleCols(params.spec().offset(i), params.spec().dummies(i)).setZero();
    return grad;
}

/// Mean of sample_grad_ll over all rows.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> full_grad_ll(const ParamSetT<Scalar>& params,
                                                                  const Dataset& d, Index i)
{
    detail::check_layout(params, d);
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index n = d.rows();
    Matrix grad = Matrix::Zero(params.spec().levels(i), params.spec().width());
    if (n == 0) return grad;
    Matrix residual = detail::child_logits(params, d, i);
    for (Index h = 0; h < n; ++h) {
        residual.row(h) = softmax(residual.row(h).transpose()).transpose();
        residual(h, d(h, i)) -= Scalar(1);
    }
    grad = residual.transpose() * d.design().template cast<Scalar>() / Scalar(n);
    grad.middleCols(params.spec().offset(i), params.spec().dummies(i)).setZero();
    return grad;
}

/**
 * Central finite differences of `objective` over every free coordinate
 * (intercepts and off-diagonal blocks). Self blocks are left at zero.
 */
template <typename Scalar>
ParamSetT<Scalar> fd_gradient(const std::function<Scalar(const ParamSetT<Scalar>&)>& objective,
                              const ParamSetT<Scalar>& params, Scalar step)
{
    if (!(step > Scalar(0))) throw std::invalid_argument("finite-difference step must be positive");
    ParamSetT<Scalar> grad(params.spec());
    ParamSetT<Scalar> probe = params;
    const VariableSpec& spec = params.spec();
    for (Index i = 0; i < params.size(); ++i) {
        const Index self_begin = spec.offset(i);
        const Index self_end = self_begin + spec.dummies(i);
        for (Index c = 0; c < spec.width(); ++c) {
            if (c >= self_begin && c < self_end) continue;
            for (Index l = 0; l < spec.levels(i); ++l) {
                const Scalar saved = probe.child(i)(l, c);
                probe.child(i)(l, c) = saved + step;
                const Scalar up = objective(probe);
                probe.child(i)(l, c) = saved - step;
                const Scalar down = objective(probe);
                probe.child(i)(l, c) = saved;
                grad.child(i)(l, c) = (up - down) / (Scalar(2) * step);
            }
        }
    }
    return grad;
}

} // namespace svrcd
