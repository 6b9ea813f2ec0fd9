#include "core/topology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "core/error.hpp"

namespace dfl {

namespace {

void add_edge(Graph& g, int a, int b) {
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
}

void sort_adjacency(Graph& g) {
    for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
}

} // namespace

std::size_t Graph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adjacency) twice += nbrs.size();
    return twice / 2;
}

Graph generate_ba(int n, int m, Rng& rng) {
    if (n < 2) raise(ErrorKind::parameter, "generate_ba: need at least 2 nodes, got " + std::to_string(n));
    if (m < 1) raise(ErrorKind::parameter, "generate_ba: m must be >= 1, got " + std::to_string(m));
    if (n < m + 1) raise(ErrorKind::parameter, "generate_ba: need n >= m+1");

    Graph g;
    g.node_count = n;
    g.adjacency.resize(static_cast<std::size_t>(n));

    // Urn holds each node once per incident edge, so a uniform draw is
    // degree-proportional attachment.
    std::vector<int> urn;
    if (m == 1) {
        add_edge(g, 0, 1);
        urn = {0, 1};
        for (int node = 2; node < n; ++node) {
            const int target = urn[rng.next_below(urn.size())];
            add_edge(g, node, target);
            urn.push_back(target);
            urn.push_back(node);
        }
    } else {
        // Seed clique over the first m+1 nodes, then degree-proportional
        // attachment with m distinct targets per new node.
        for (int a = 0; a <= m; ++a)
            for (int b = a + 1; b <= m; ++b) {
                add_edge(g, a, b);
                urn.push_back(a);
                urn.push_back(b);
            }
        for (int node = m + 1; node < n; ++node) {
            std::vector<int> targets;
            while (static_cast<int>(targets.size()) < m) {
                const int candidate = urn[rng.next_below(urn.size())];
                if (std::find(targets.begin(), targets.end(), candidate) == targets.end())
                    targets.push_back(candidate);
            }
            for (int target : targets) {
                add_edge(g, node, target);
                urn.push_back(target);
                urn.push_back(node);
            }
        }
    }

    sort_adjacency(g);
    return g;
}

Graph generate_star(int n) {
    if (n < 2) raise(ErrorKind::parameter, "generate_star: need at least 2 nodes, got " + std::to_string(n));
    Graph g;
    g.node_count = n;
    g.adjacency.resize(static_cast<std::size_t>(n));
    const int hub = n - 1;
    for (int leaf = 0; leaf < hub; ++leaf) add_edge(g, hub, leaf);
    sort_adjacency(g);
    return g;
}

std::vector<int> neighborhood(const Graph& g, int node) {
    if (node < 0 || node >= g.node_count)
        raise(ErrorKind::parameter, "neighborhood: node id " + std::to_string(node) + " out of range");
    std::vector<int> result = g.adjacency[static_cast<std::size_t>(node)];
    result.push_back(node);
    std::sort(result.begin(), result.end());
    return result;
}

CentralityRanking centrality_ranking(const Graph& g) {
    CentralityRanking ranking;
    ranking.ordered.resize(static_cast<std::size_t>(g.node_count));
    std::iota(ranking.ordered.begin(), ranking.ordered.end(), 0);
    std::sort(ranking.ordered.begin(), ranking.ordered.end(), [&g](int a, int b) {
        const int da = g.degree(a);
        const int db = g.degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    return ranking;
}

std::string serialize_edge_list(const Graph& g) {
    std::ostringstream out;
    out << "# nodes=" << g.node_count << "\n";
    for (int i = 0; i < g.node_count; ++i)
        for (int j : g.adjacency[static_cast<std::size_t>(i)])
            if (i < j) out << i << " " << j << "\n";
    return out.str();
}

} // namespace dfl
