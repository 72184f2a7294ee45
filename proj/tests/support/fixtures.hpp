#pragma once

#include <vector>

#include "biflp/instance.hpp"

namespace testutil {

struct SiteSpec {
    long long opening_cost;
    long long capacity;
};

/// Instance over an explicit distance matrix: the first `sites.size()` nodes
/// are candidate sites, every node is a demand node.
inline biflp::Instance make_instance(std::size_t n_nodes, const std::vector<SiteSpec>& sites,
                                     std::vector<std::vector<double>> distances, double d_max) {
    std::vector<biflp::Instance::Node> nodes(n_nodes);
    for (std::size_t p = 0; p < n_nodes; ++p) {
        nodes[p].id = static_cast<int>(p + 1);
        nodes[p].x = 0.0;
        nodes[p].y = 0.0;
        if (p < sites.size()) {
            nodes[p].is_site = true;
            nodes[p].opening_cost = sites[p].opening_cost;
            nodes[p].capacity = sites[p].capacity;
        }
    }
    biflp::Instance inst(std::move(nodes), n_nodes, d_max);
    inst.set_explicit_distances(std::move(distances));
    return inst;
}

/// Distance matrix where listed (a, b) pairs are `near` and all other
/// off-diagonal pairs are `far`.
inline std::vector<std::vector<double>> near_pairs(std::size_t n,
                                                   const std::vector<std::pair<int, int>>& pairs,
                                                   double near = 1.0, double far = 100.0) {
    std::vector<std::vector<double>> d(n, std::vector<double>(n, far));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    for (auto [a, b] : pairs) {
        if (a == b) continue;
        d[a][b] = near;
        d[b][a] = near;
    }
    return d;
}

/// The two-node toy: one site (capacity 5) covering both demand nodes.
inline biflp::Instance toy_two_nodes(long long capacity = 5) {
    return make_instance(2, {{5000, capacity}}, near_pairs(2, {{0, 1}}), 6.0);
}

}  // namespace testutil
