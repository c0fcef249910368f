#include "svrcd/metrics.hpp"

#include <array>
#include <ostream>

#include "svrcd/errors.hpp"

namespace svrcd {

MetricsReport MetricsReport::from_counts(double predicted, double expected, double reversed, double true_edges)
{
    MetricsReport r;
    r.P = predicted;
    r.E = expected;
    r.R = reversed;
    r.s0 = true_edges;
    r.M = true_edges - expected - reversed;
    r.FP = predicted - expected - reversed;
    r.TPR = true_edges > 0 ? expected / true_edges : 0.0;
    r.FDR = predicted > 0 ? (reversed + r.FP) / predicted : 0.0;
    r.SHD = reversed + r.M + r.FP;
    const double uni = predicted + true_edges - expected;
    r.JI = uni > 0 ? expected / uni : 0.0;
    return r;
}

MetricsReport evaluate(const DagGraph& estimated, const DagGraph& truth)
{
    if (estimated.size() != truth.size()) {
        throw NodeCountMismatch("estimated graph has " + std::to_string(estimated.size()) +
                                " nodes, truth has " + std::to_string(truth.size()));
    }
    double predicted = 0;
    double expected = 0;
    double reversed = 0;
    for (auto [from, to] : estimated.edges()) {
        ++predicted;
        if (truth.has_edge(from, to)) {
            ++expected;
        } else if (truth.has_edge(to, from)) {
            ++reversed;
        }
    }
    return MetricsReport::from_counts(predicted, expected, reversed, static_cast<double>(truth.edge_count()));
}

namespace {

constexpr std::array<double MetricsReport::*, 10> kFields = {
    &MetricsReport::P,   &MetricsReport::E,   &MetricsReport::R,   &MetricsReport::M,  &MetricsReport::FP,
    &MetricsReport::TPR, &MetricsReport::FDR, &MetricsReport::SHD, &MetricsReport::JI, &MetricsReport::s0,
};

} // namespace

MetricsSummary aggregate(const std::vector<MetricsReport>& reports)
{
    if (reports.empty()) throw EmptyInput("cannot aggregate an empty list of reports");
    const double count = static_cast<double>(reports.size());

    MetricsReport raw_mean;
    for (const auto& r : reports) {
        for (auto f : kFields) raw_mean.*f += r.*f / count;
    }
    MetricsSummary out;
    for (const auto& r : reports) {
        for (auto f : kFields) {
            const double dev = r.*f - raw_mean.*f;
            out.variance.*f += dev * dev / count;
        }
    }
    out.mean = MetricsReport::from_counts(raw_mean.P, raw_mean.E, raw_mean.R, raw_mean.s0);
    return out;
}

void write_metrics_row(std::ostream& out, const MetricsReport& r)
{
    out << r.P << ',' << r.E << ',' << r.R << ',' << r.M << ',' << r.FP << ',' << r.TPR << ',' << r.FDR << ','
        << r.SHD << ',' << r.JI;
}

} // namespace svrcd
