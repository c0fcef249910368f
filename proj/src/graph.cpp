#include "svrcd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <sstream>

#include "svrcd/errors.hpp"

namespace svrcd {

DagGraph::DagGraph(Index p) : adj_(BoolMatrix::Constant(p, p, false)) {}

DagGraph::DagGraph(BoolMatrix adjacency) : adj_(std::move(adjacency))
{
    if (adj_.rows() != adj_.cols()) {
        throw ShapeMismatch("adjacency matrix must be square");
    }
    for (Index i = 0; i < adj_.rows(); ++i) {
        if (adj_(i, i)) {
            throw std::invalid_argument("self-loop on node " + std::to_string(i));
        }
    }
}

void DagGraph::check_node(Index v) const
{
    if (v < 0 || v >= size()) {
        throw NodeOutOfRange("node " + std::to_string(v) + " outside [0, " +
                             std::to_string(size()) + ")");
    }
}

void DagGraph::add_edge(Index from, Index to)
{
    check_node(from);
    check_node(to);
    if (from == to) {
        throw std::invalid_argument("self-loop on node " + std::to_string(from));
    }
    adj_(from, to) = true;
}

void DagGraph::remove_edge(Index from, Index to)
{
    check_node(from);
    check_node(to);
    adj_(from, to) = false;
}

std::vector<Index> DagGraph::parents(Index child) const
{
    check_node(child);
    std::vector<Index> out;
    for (Index j = 0; j < size(); ++j) {
        if (adj_(j, child)) out.push_back(j);
    }
    return out;
}

std::vector<Index> DagGraph::children(Index parent) const
{
    check_node(parent);
    std::vector<Index> out;
    for (Index i = 0; i < size(); ++i) {
        if (adj_(parent, i)) out.push_back(i);
    }
    return out;
}

std::vector<std::pair<Index, Index>> DagGraph::edges() const
{
    std::vector<std::pair<Index, Index>> out;
    for (Index j = 0; j < size(); ++j) {
        for (Index i = 0; i < size(); ++i) {
            if (adj_(j, i)) out.emplace_back(j, i);
        }
    }
    return out;
}

void DagGraph::set_labels(std::vector<std::string> labels)
{
    if (!labels.empty() && static_cast<Index>(labels.size()) != size()) {
        throw ShapeMismatch("label count does not match node count");
    }
    labels_ = std::move(labels);
}

namespace {

std::vector<std::vector<Index>> out_lists(const DagGraph& g)
{
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(g.size()));
    for (auto [from, to] : g.edges()) out[static_cast<std::size_t>(from)].push_back(to);
    return out;
}

} // namespace

PathMatrix path_matrix(const DagGraph& g)
{
    const Index p = g.size();
    const auto succ = out_lists(g);
    PathMatrix pm{BoolMatrix::Constant(p, p, false)};
    std::vector<Index> queue;
    queue.reserve(static_cast<std::size_t>(p));
    for (Index src = 0; src < p; ++src) {
        queue.clear();
        queue.push_back(src);
        // src itself is only marked when a cycle returns to it
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (Index next : succ[static_cast<std::size_t>(queue[head])]) {
                if (!pm.reach(src, next)) {
                    pm.reach(src, next) = true;
                    queue.push_back(next);
                }
            }
        }
    }
    return pm;
}

namespace {

// Kahn's algorithm; returns fewer than p nodes when a cycle exists.
std::vector<Index> kahn_order(const DagGraph& g)
{
    const Index p = g.size();
    const auto succ = out_lists(g);
    std::vector<Index> indegree(static_cast<std::size_t>(p), 0);
    for (auto [from, to] : g.edges()) ++indegree[static_cast<std::size_t>(to)];

    std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
    for (Index v = 0; v < p; ++v) {
        if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(p));
    while (!ready.empty()) {
        const Index v = ready.top();
        ready.pop();
        order.push_back(v);
        for (Index w : succ[static_cast<std::size_t>(v)]) {
            if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push(w);
        }
    }
    return order;
}

} // namespace

bool is_dag(const DagGraph& g)
{
    return static_cast<Index>(kahn_order(g).size()) == g.size();
}

std::vector<Index> topo_sort(const DagGraph& g)
{
    auto order = kahn_order(g);
    if (static_cast<Index>(order.size()) != g.size()) throw CyclicGraph();
    return order;
}

std::vector<Index> find_cycle(const DagGraph& g)
{
    const Index p = g.size();
    const auto succ = out_lists(g);
    enum class Mark : unsigned char { white, grey, black };
    std::vector<Mark> mark(static_cast<std::size_t>(p), Mark::white);
    std::vector<Index> parent(static_cast<std::size_t>(p), -1);

    // iterative DFS, stack of (node, next successor position)
    std::vector<std::pair<Index, std::size_t>> stack;
    for (Index root = 0; root < p; ++root) {
        if (mark[static_cast<std::size_t>(root)] != Mark::white) continue;
        stack.emplace_back(root, 0);
        mark[static_cast<std::size_t>(root)] = Mark::grey;
        while (!stack.empty()) {
            auto& [v, pos] = stack.back();
            const auto& next = succ[static_cast<std::size_t>(v)];
            if (pos == next.size()) {
                mark[static_cast<std::size_t>(v)] = Mark::black;
                stack.pop_back();
                continue;
            }
            const Index w = next[pos++];
            const auto ws = static_cast<std::size_t>(w);
            if (mark[ws] == Mark::grey) {
                std::vector<Index> cycle{w};
                for (Index u = v; u != w; u = parent[static_cast<std::size_t>(u)]) {
                    cycle.push_back(u);
                }
                std::reverse(cycle.begin() + 1, cycle.end());
                return cycle;
            }
            if (mark[ws] == Mark::white) {
                mark[ws] = Mark::grey;
                parent[ws] = v;
                stack.emplace_back(w, 0);
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

DagGraph gen_bipartite(Index p, std::uint64_t seed, bool strict)
{
    if (p < 2) throw std::invalid_argument("bipartite graph needs p >= 2");
    const Index upper = std::max<Index>(1, static_cast<Index>(std::lround(0.2 * static_cast<double>(p))));
    const Index lower = p - upper;
    const Index available = upper * lower;
    Index wanted = p;
    if (wanted > available) {
        if (strict) {
            throw InfeasibleEdgeCount(static_cast<std::size_t>(wanted),
                                      static_cast<std::size_t>(available));
        }
        wanted = available;
    }

    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(available));
    for (Index u = 0; u < upper; ++u) {
        for (Index l = upper; l < p; ++l) pairs.emplace_back(u, l);
    }
    std::mt19937_64 rng(seed);
    DagGraph g(p);
    // partial Fisher-Yates
    for (Index k = 0; k < wanted; ++k) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), pairs.size() - 1);
        std::swap(pairs[static_cast<std::size_t>(k)], pairs[pick(rng)]);
        g.add_edge(pairs[static_cast<std::size_t>(k)].first, pairs[static_cast<std::size_t>(k)].second);
    }
    return g;
}

DagGraph gen_scale_free(Index p, double power, std::uint64_t seed)
{
    if (p < 2) throw std::invalid_argument("scale-free graph needs p >= 2");
    std::mt19937_64 rng(seed);
    std::vector<double> degree(static_cast<std::size_t>(p), 0.0);
    std::vector<double> weight;
    weight.reserve(static_cast<std::size_t>(p));
    DagGraph g(p);
    for (Index node = 1; node < p; ++node) {
        weight.clear();
        for (Index k = 0; k < node; ++k) {
            weight.push_back(std::pow(degree[static_cast<std::size_t>(k)] + 1.0, power));
        }
        std::discrete_distribution<Index> pick(weight.begin(), weight.end());
        const Index target = pick(rng);
        g.add_edge(target, node);
        degree[static_cast<std::size_t>(target)] += 1.0;
        degree[static_cast<std::size_t>(node)] += 1.0;
    }
    return g;
}

DagGraph gen_random_dag(Index p, Index edge_count, std::uint64_t seed)
{
    if (p < 1) throw std::invalid_argument("random DAG needs p >= 1");
    const Index available = p * (p - 1) / 2;
    if (edge_count < 0 || edge_count > available) {
        throw InfeasibleEdgeCount(static_cast<std::size_t>(std::max<Index>(edge_count, 0)),
                                  static_cast<std::size_t>(available));
    }
    std::mt19937_64 rng(seed);
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index v = 0; v < p; ++v) order[static_cast<std::size_t>(v)] = v;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(available));
    for (Index a = 0; a < p; ++a) {
        for (Index b = a + 1; b < p; ++b) pairs.emplace_back(a, b);
    }
    DagGraph g(p);
    for (Index k = 0; k < edge_count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), pairs.size() - 1);
        std::swap(pairs[static_cast<std::size_t>(k)], pairs[pick(rng)]);
        const auto [a, b] = pairs[static_cast<std::size_t>(k)];
        g.add_edge(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
    }
    return g;
}

// ---------------------------------------------------------------------------

namespace {

bool parse_index(const std::string& token, long long& value)
{
    std::size_t used = 0;
    try {
        value = std::stoll(token, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == token.size();
}

} // namespace

DagGraph read_edge_list(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    std::optional<DagGraph> g;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;) tokens.push_back(t);
        if (tokens.empty()) continue;

        long long a = 0;
        long long b = 0;
        if (!g) {
            if (tokens.size() != 2 || tokens[0] != "p" || !parse_index(tokens[1], a) || a < 1) {
                throw ParseError(lineno, "expected header 'p <count>'");
            }
            g.emplace(static_cast<Index>(a));
            continue;
        }
        if (tokens.size() != 2 || !parse_index(tokens[0], a) || !parse_index(tokens[1], b)) {
            throw ParseError(lineno, "expected '<from> <to>', got '" + line + "'");
        }
        if (a < 0 || b < 0 || a >= g->size() || b >= g->size()) {
            throw NodeOutOfRange("line " + std::to_string(lineno) + ": edge " + std::to_string(a) +
                                 " " + std::to_string(b) + " outside [0, " +
                                 std::to_string(g->size()) + ")");
        }
        if (a == b) throw ParseError(lineno, "self-loop");
        g->add_edge(static_cast<Index>(a), static_cast<Index>(b));
    }
    if (!g) throw ParseError(lineno, "missing header 'p <count>'");
    return *std::move(g);
}

DagGraph read_edge_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_edge_list(in);
}

void write_edge_list(const DagGraph& g, std::ostream& out)
{
    out << "p " << g.size() << '\n';
    for (auto [from, to] : g.edges()) out << from << ' ' << to << '\n';
}

void write_edge_list(const DagGraph& g, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_edge_list(g, out);
}

} // namespace svrcd
