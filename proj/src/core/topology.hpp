#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"

namespace dfl {

// Undirected communication topology. Adjacency lists are kept sorted;
// invariants (symmetry, no self-loops, all ids present) hold for every
// graph produced by this module.
struct Graph {
    int node_count = 0;
    std::vector<std::vector<int>> adjacency;

    int degree(int node) const { return static_cast<int>(adjacency.at(node).size()); }
    std::size_t edge_count() const;
};

// Node ids sorted by degree descending, ties broken by ascending id.
struct CentralityRanking {
    std::vector<int> ordered;
};

// Barabasi-Albert preferential attachment. For m=1 this is exact: a single
// starting edge {0,1}, then each new node attaches to one existing node
// drawn from an urn holding every node once per incident edge (degree-
// proportional). The result is a connected tree with n-1 edges.
Graph generate_ba(int n, int m, Rng& rng);

// Star over n nodes: hub is node n-1 so that leaf ids 0..n-2 line up with
// the client ids used in decentralized runs.
Graph generate_star(int n);

// Closed neighborhood: adjacency[i] plus i itself, sorted.
std::vector<int> neighborhood(const Graph& g, int node);

CentralityRanking centrality_ranking(const Graph& g);

// Edge-list text form: header "# nodes=N", then one "i j" line per edge
// with i < j, lines sorted by (i, j).
std::string serialize_edge_list(const Graph& g);

} // namespace dfl
