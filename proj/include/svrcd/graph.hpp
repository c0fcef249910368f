#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace svrcd {

using Index = Eigen::Index;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Directed graph over p nodes stored as a dense boolean adjacency matrix.
 *
 * Convention used throughout the library: adjacency()(j, i) == true means the
 * edge j -> i, i.e. j is a parent of i, and the coefficient block beta_{i.j}
 * may be nonzero.
 */
class DagGraph
{
public:
    DagGraph() = default;
    explicit DagGraph(Index p);
    explicit DagGraph(BoolMatrix adjacency);

    Index size() const noexcept { return adj_.rows(); }
    const BoolMatrix& adjacency() const noexcept { return adj_; }

    bool has_edge(Index from, Index to) const { return adj_(from, to); }
    void add_edge(Index from, Index to);
    void remove_edge(Index from, Index to);
    Index edge_count() const { return adj_.count(); }

    std::vector<Index> parents(Index child) const;
    std::vector<Index> children(Index parent) const;
    /// Edges as (from, to) pairs in row-major order.
    std::vector<std::pair<Index, Index>> edges() const;

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels);

    friend bool operator==(const DagGraph& a, const DagGraph& b)
    {
        return a.size() == b.size() && (a.adj_ == b.adj_).all();
    }

private:
    void check_node(Index v) const;

    BoolMatrix adj_;
    std::vector<std::string> labels_;
};

/// reach(i, j) is true iff a directed path of length >= 1 leads from i to j.
struct PathMatrix
{
    BoolMatrix reach;

    bool operator()(Index from, Index to) const { return reach(from, to); }
    Index size() const noexcept { return reach.rows(); }
};

/// Transitive closure by breadth-first search from every node.
PathMatrix path_matrix(const DagGraph& g);

bool is_dag(const DagGraph& g);

/// Kahn's algorithm with ties broken by ascending node index. Throws CyclicGraph.
std::vector<Index> topo_sort(const DagGraph& g);

/// Some directed cycle as a node sequence v0 -> v1 -> ... -> v0 (v0 not repeated), empty if acyclic.
std::vector<Index> find_cycle(const DagGraph& g);

// ---- synthetic generators --------------------------------------------------

/**
 * Two-layer DAG: the first round(0.2 p) nodes are sources, the rest sinks, and
 * p distinct source->sink edges are drawn uniformly. When p exceeds the number of
 * admissible pairs the count is clipped, or InfeasibleEdgeCount is thrown if
 * `strict` is set.
 */
DagGraph gen_bipartite(Index p, std::uint64_t seed, bool strict = false);

/// Preferential attachment with one edge per new node, weight (degree + 1)^power.
/// Edges point from the earlier node to the newly added one.
DagGraph gen_scale_free(Index p, double power, std::uint64_t seed);
inline constexpr double kDefaultAttachmentPower = -3.0;

/// Uniform random topological order, then `edge_count` distinct order-respecting pairs.
DagGraph gen_random_dag(Index p, Index edge_count, std::uint64_t seed);

// ---- edge-list text format -------------------------------------------------
//
//   p <count>
//   <from> <to>
//   ...

DagGraph read_edge_list(std::istream& in);
DagGraph read_edge_list(const std::filesystem::path& path);
void write_edge_list(const DagGraph& g, std::ostream& out);
void write_edge_list(const DagGraph& g, const std::filesystem::path& path);

} // namespace svrcd
