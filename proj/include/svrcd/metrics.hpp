#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "svrcd/graph.hpp"

namespace svrcd {

/**
 * Structure recovery counts and the rates derived from them. Counts are reals
 * so that averages over replicates keep the same shape.
 *
 *   P  = E + R + FP      predicted edges
 *   s0 = E + R + M       true edges
 *   SHD = R + M + FP,  TPR = E / s0,  FDR = (R + FP) / P,  JI = E / (P + s0 - E)
 */
struct MetricsReport
{
    double P = 0, E = 0, R = 0, M = 0, FP = 0;
    double TPR = 0, FDR = 0, SHD = 0, JI = 0;
    double s0 = 0;

    /// Fills the derived fields from the four primary counts.
    static MetricsReport from_counts(double predicted, double expected, double reversed, double true_edges);
};

/// Compares an estimated graph against the truth. Throws NodeCountMismatch.
MetricsReport evaluate(const DagGraph& estimated, const DagGraph& truth);

struct MetricsSummary
{
    MetricsReport mean;      ///< counts averaged, rates recomputed from the averaged counts
    MetricsReport variance;  ///< population variance of every field across reports
};

/// Throws EmptyInput on an empty list.
MetricsSummary aggregate(const std::vector<MetricsReport>& reports);

inline constexpr std::string_view kMetricsHeader = "P,E,R,M,FP,TPR,FDR,SHD,JI";
void write_metrics_row(std::ostream& out, const MetricsReport& r);

} // namespace svrcd
