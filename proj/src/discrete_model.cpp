#include "svrcd/discrete_model.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace svrcd {

VariableSpec::VariableSpec(std::vector<int> cardinalities) : levels_(std::move(cardinalities))
{
    offsets_.reserve(levels_.size());
    width_ = 1;
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        if (levels_[j] < 2) {
            throw LevelOutOfRange("variable " + std::to_string(j) + " has " + std::to_string(levels_[j]) +
                                  " levels; at least 2 required");
        }
        offsets_.push_back(width_);
        width_ += levels_[j] - 1;
    }
}

Dataset::Dataset(Values values, VariableSpec spec) : values_(std::move(values)), spec_(std::move(spec))
{
    if (values_.cols() != spec_.size()) {
        throw ShapeMismatch("dataset has " + std::to_string(values_.cols()) + " columns, spec has " +
                            std::to_string(spec_.size()));
    }
    design_ = Eigen::MatrixXd::Zero(values_.rows(), spec_.width());
    design_.col(0).setOnes();
    for (Index h = 0; h < values_.rows(); ++h) {
        for (Index j = 0; j < values_.cols(); ++j) {
            const int v = values_(h, j);
            if (v < 0 || v >= spec_.levels(j)) {
                throw LevelOutOfRange("row " + std::to_string(h) + ", column " + std::to_string(j) +
                                      ": level " + std::to_string(v) + " outside [0, " +
                                      std::to_string(spec_.levels(j)) + ")");
            }
            if (v > 0) design_(h, spec_.offset(j) + v - 1) = 1.0;
        }
    }
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b)
{
    if (!(a.spec() == b.spec())) throw ShapeMismatch("cannot stack datasets with different specs");
    Values stacked(a.rows() + b.rows(), a.cols());
    stacked << a.values(), b.values();
    return Dataset(std::move(stacked), a.spec());
}

Eigen::VectorXd dummy_encode(int value, int n_levels)
{
    if (n_levels < 2 || value < 0 || value >= n_levels) {
        throw LevelOutOfRange("level " + std::to_string(value) + " outside [0, " + std::to_string(n_levels) + ")");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_levels - 1);
    if (value > 0) out(value - 1) = 1.0;
    return out;
}

Eigen::VectorXd encode_row(const VariableSpec& spec, Eigen::Ref<const Eigen::VectorXi> row)
{
    if (row.size() != spec.size()) throw ShapeMismatch("row length does not match spec");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.width());
    x(0) = 1.0;
    for (Index j = 0; j < spec.size(); ++j) {
        x.segment(spec.offset(j), spec.dummies(j)) = dummy_encode(row(j), spec.levels(j));
    }
    return x;
}

long long param_count(const VariableSpec& spec, const DagGraph& g, ParamModel model)
{
    if (spec.size() != g.size()) throw NodeCountMismatch("spec and graph disagree on node count");
    long long total = 0;
    for (Index i = 0; i < g.size(); ++i) {
        const auto parents = g.parents(i);
        const long long ni = spec.levels(i);
        if (model == ParamModel::product_multinomial) {
            long long configs = 1;
            for (Index j : parents) configs *= spec.levels(j);
            total += ni * configs;
        } else {
            long long dummies = 0;
            for (Index j : parents) dummies += spec.dummies(j);
            total += (ni - 1) + ni * dummies;
        }
    }
    return total;
}

ParamSet gen_true_cpds(const DagGraph& g, const VariableSpec& spec, CoefficientRange range, std::uint64_t seed)
{
    if (!(range.high > range.low && range.low > 0.0)) {
        throw std::invalid_argument("coefficient range must satisfy high > low > 0");
    }
    if (spec.size() != g.size()) throw NodeCountMismatch("spec and graph disagree on node count");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> magnitude(range.low, range.high);
    std::bernoulli_distribution coin(0.5);

    ParamSet params(spec);
    for (auto [j, i] : g.edges()) {
        auto blk = params.block(i, j);
        for (Index c = 0; c < blk.cols(); ++c) {
            double sign = coin(rng) ? 1.0 : -1.0;
            for (Index l = 0; l < blk.rows(); ++l) {
                blk(l, c) = sign * magnitude(rng);
                sign = -sign;
            }
        }
        blk.rowwise() -= blk.colwise().mean();
    }
    return params;
}

Dataset sample_dataset(const DagGraph& g, const ParamSet& params, Index n, std::uint64_t seed)
{
    const VariableSpec& spec = params.spec();
    if (spec.size() != g.size()) throw NodeCountMismatch("parameters and graph disagree on node count");
    if (n < 0) throw std::invalid_argument("row count must be non-negative");
    const auto order = topo_sort(g);

    std::vector<std::vector<Index>> parents(static_cast<std::size_t>(g.size()));
    for (Index i = 0; i < g.size(); ++i) parents[static_cast<std::size_t>(i)] = g.parents(i);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Dataset::Values values(n, g.size());
    Eigen::VectorXd logits;
    for (Index h = 0; h < n; ++h) {
        for (Index v : order) {
            logits = params.intercept(v);
            for (Index j : parents[static_cast<std::size_t>(v)]) {
                const int level = values(h, j);
                if (level > 0) logits += params.block(v, j).col(level - 1);
            }
            const Eigen::VectorXd prob = softmax(logits);
            // inverse-CDF draw
            double u = unit(rng);
            int level = 0;
            for (; level < prob.size() - 1; ++level) {
                u -= prob(level);
                if (u < 0.0) break;
            }
            values(h, v) = level;
        }
    }
    return Dataset(std::move(values), spec);
}

Dataset inject_noise(const Dataset& d, double q, std::uint64_t seed)
{
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("noise fraction must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Dataset::Values values = d.values();
    for (Index h = 0; h < values.rows(); ++h) {
        for (Index j = 0; j < values.cols(); ++j) {
            // q = 1 must flip every cell; unit() never returns 1.0
            if (!(unit(rng) < q)) continue;
            const int levels = d.spec().levels(j);
            if (levels == 2) {
                values(h, j) = 1 - values(h, j);
            } else {
                std::uniform_int_distribution<int> other(0, levels - 2);
                const int draw = other(rng);
                values(h, j) = draw >= values(h, j) ? draw + 1 : draw;
            }
        }
    }
    return Dataset(std::move(values), d.spec());
}

// ---------------------------------------------------------------------------

Dataset read_dataset_csv(std::istream& in, const std::optional<VariableSpec>& spec)
{
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    ++lineno;
    std::size_t ncols = 0;
    {
        std::stringstream header(line);
        for (std::string cell; std::getline(header, cell, ',');) ++ncols;
    }
    if (ncols == 0) throw ParseError(lineno, "empty header");

    std::vector<int> flat;
    Index nrows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream fields(line);
        std::size_t count = 0;
        for (std::string cell; std::getline(fields, cell, ',');) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(cell, &used);
            } catch (const std::exception&) {
                throw ParseError(lineno, "non-integer cell '" + cell + "'");
            }
            if (used != cell.size()) throw ParseError(lineno, "non-integer cell '" + cell + "'");
            if (v < 0) throw LevelOutOfRange("line " + std::to_string(lineno) + ": negative level");
            flat.push_back(v);
            ++count;
        }
        if (count != ncols) {
            throw ParseError(lineno, "expected " + std::to_string(ncols) + " cells, got " + std::to_string(count));
        }
        ++nrows;
    }

    Dataset::Values values = Eigen::Map<Dataset::Values>(flat.data(), nrows, static_cast<Index>(ncols));
    if (spec) return Dataset(std::move(values), *spec);

    std::vector<int> cards(ncols, 2);
    for (Index j = 0; j < values.cols(); ++j) {
        if (nrows > 0) cards[static_cast<std::size_t>(j)] = std::max(2, values.col(j).maxCoeff() + 1);
    }
    return Dataset(std::move(values), VariableSpec(std::move(cards)));
}

Dataset read_dataset_csv(const std::filesystem::path& path, const std::optional<VariableSpec>& spec)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_dataset_csv(in, spec);
}

void write_dataset_csv(const Dataset& d, std::ostream& out)
{
    for (Index j = 0; j < d.cols(); ++j) out << (j ? "," : "") << 'x' << j;
    out << '\n';
    for (Index h = 0; h < d.rows(); ++h) {
        for (Index j = 0; j < d.cols(); ++j) out << (j ? "," : "") << d(h, j);
        out << '\n';
    }
}

void write_dataset_csv(const Dataset& d, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_dataset_csv(d, out);
}

VariableSpec read_spec_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        const auto doc = nlohmann::json::parse(in);
        return VariableSpec(doc.at("cardinalities").get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, path.string() + ": " + e.what());
    }
}

void write_spec_json(const VariableSpec& spec, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << nlohmann::json{{"cardinalities", spec.cardinalities()}}.dump() << '\n';
}

} // namespace svrcd
