#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "svrcd/errors.hpp"
#include "svrcd/graph.hpp"

namespace svrcd {

/**
 * Level counts of the discrete variables and the stacked dummy layout derived
 * from them.
 *
 * Every data row is encoded once into a covariate vector of width()
 * entries: slot 0 is the constant intercept, and variable j occupies the
 * dummies(j) columns starting at offset(j). Level 0 is the reference level and
 * encodes as all zeros.
 */
class VariableSpec
{
public:
    VariableSpec() = default;
    explicit VariableSpec(std::vector<int> cardinalities);
    static VariableSpec binary(Index p) { return VariableSpec(std::vector<int>(static_cast<std::size_t>(p), 2)); }

    Index size() const noexcept { return static_cast<Index>(levels_.size()); }
    int levels(Index i) const { return levels_[static_cast<std::size_t>(i)]; }
    int dummies(Index i) const { return levels(i) - 1; }
    Index offset(Index j) const { return offsets_[static_cast<std::size_t>(j)]; }
    Index width() const noexcept { return width_; }
    const std::vector<int>& cardinalities() const noexcept { return levels_; }

    friend bool operator==(const VariableSpec& a, const VariableSpec& b) { return a.levels_ == b.levels_; }

private:
    std::vector<int> levels_;
    std::vector<Index> offsets_;
    Index width_ = 1;
};

/**
 * Multi-logit coefficients for every child variable.
 *
 * Child i owns an n_i x width() matrix whose column 0 is the intercept and whose
 * columns [offset(j), offset(j) + d_j) form the block beta_{i.j}. The self block
 * beta_{i.i} is kept at zero; it exists only so that one encoded row serves
 * every child.
 */
template <typename Scalar>
class ParamSetT
{
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    ParamSetT() = default;
    explicit ParamSetT(VariableSpec spec) : spec_(std::move(spec))
    {
        weights_.reserve(static_cast<std::size_t>(spec_.size()));
        for (Index i = 0; i < spec_.size(); ++i) {
            weights_.push_back(Matrix::Zero(spec_.levels(i), spec_.width()));
        }
    }

    const VariableSpec& spec() const noexcept { return spec_; }
    Index size() const noexcept { return spec_.size(); }

    Matrix& child(Index i) { return weights_[static_cast<std::size_t>(i)]; }
    const Matrix& child(Index i) const { return weights_[static_cast<std::size_t>(i)]; }

    auto block(Index i, Index j) { return child(i).middleCols(spec_.offset(j), spec_.dummies(j)); }
    auto block(Index i, Index j) const { return child(i).middleCols(spec_.offset(j), spec_.dummies(j)); }
    auto intercept(Index i) { return child(i).col(0); }
    auto intercept(Index i) const { return child(i).col(0); }

    Scalar block_norm(Index i, Index j) const { return block(i, j).norm(); }

    template <typename Other>
    ParamSetT<Other> cast() const
    {
        ParamSetT<Other> out(spec_);
        for (Index i = 0; i < size(); ++i) out.child(i) = child(i).template cast<Other>();
        return out;
    }

private:
    VariableSpec spec_;
    std::vector<Matrix> weights_;
};

using ParamSet = ParamSetT<double>;

/**
 * n x p matrix of level indices together with the variable spec and its
 * encoded design matrix (n x spec.width(), column 0 all ones).
 */
class Dataset
{
public:
    using Values = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Dataset() = default;
    Dataset(Values values, VariableSpec spec);

    Index rows() const noexcept { return values_.rows(); }
    Index cols() const noexcept { return values_.cols(); }
    int operator()(Index h, Index i) const { return values_(h, i); }
    const Values& values() const noexcept { return values_; }
    const VariableSpec& spec() const noexcept { return spec_; }
    const Eigen::MatrixXd& design() const noexcept { return design_; }

    /// Stacks the rows of `a` and `b`; specs must agree.
    static Dataset concat(const Dataset& a, const Dataset& b);

    friend bool operator==(const Dataset& a, const Dataset& b)
    {
        return a.spec_ == b.spec_ && a.values_ == b.values_;
    }

private:
    Values values_;
    VariableSpec spec_;
    Eigen::MatrixXd design_;
};

/// Reference coding: level 0 -> zeros, level l >= 1 -> indicator at l - 1.
Eigen::VectorXd dummy_encode(int value, int n_levels);

/// Full stacked covariate vector (intercept slot plus every variable's dummies).
Eigen::VectorXd encode_row(const VariableSpec& spec, Eigen::Ref<const Eigen::VectorXi> row);

/// Numerically stable softmax of a logit vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& logits)
{
    using Scalar = typename Derived::Scalar;
    const Scalar top = logits.maxCoeff();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = (logits.array() - top).exp().matrix();
    return e / e.sum();
}

/// P(X_i = l | x) for every level l of child i given a stacked covariate vector.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> predict_proba(const ParamSetT<Scalar>& params, Index child,
                                                       const Eigen::MatrixBase<Derived>& x)
{
    if (x.size() != params.spec().width()) {
        throw ShapeMismatch("covariate vector has width " + std::to_string(x.size()) + ", expected " +
                            std::to_string(params.spec().width()));
    }
    return softmax(params.child(child) * x.template cast<Scalar>());
}

enum class ParamModel { product_multinomial, multi_logit };

/// Free parameter count of a graph under a full conditional table or the multi-logit model.
long long param_count(const VariableSpec& spec, const DagGraph& g, ParamModel model);

struct CoefficientRange
{
    double low = 1.0;
    double high = 3.0;
};

/**
 * Ground-truth multi-logit coefficients for a known graph. Each column of an
 * edge block gets magnitudes drawn from `range` with alternating signs down
 * the levels (random starting sign), then is centred across levels. Intercepts
 * and non-edge blocks are zero.
 */
ParamSet gen_true_cpds(const DagGraph& g, const VariableSpec& spec, CoefficientRange range, std::uint64_t seed);

/// Ancestral sampling in topological order. Throws CyclicGraph.
Dataset sample_dataset(const DagGraph& g, const ParamSet& params, Index n, std::uint64_t seed);

/// Each cell is replaced with probability q: the complement for binary variables,
/// a uniformly chosen different level otherwise.
Dataset inject_noise(const Dataset& d, double q, std::uint64_t seed);

// ---- CSV ---------------------------------------------------------------------
//
// Header "x0,x1,...", then one row of integer levels per line. Without an
// explicit spec the cardinality of each column is max(2, max level + 1).

Dataset read_dataset_csv(std::istream& in, const std::optional<VariableSpec>& spec = std::nullopt);
Dataset read_dataset_csv(const std::filesystem::path& path,
                         const std::optional<VariableSpec>& spec = std::nullopt);
void write_dataset_csv(const Dataset& d, std::ostream& out);
void write_dataset_csv(const Dataset& d, const std::filesystem::path& path);

/// Sidecar JSON of the form {"cardinalities": [2, 3, ...]}.
VariableSpec read_spec_json(const std::filesystem::path& path);
void write_spec_json(const VariableSpec& spec, const std::filesystem::path& path);

} // namespace svrcd
