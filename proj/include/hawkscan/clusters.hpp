#pragma once

#include <set>
#include <string>
#include <vector>

#include "hawkscan/edges.hpp"

namespace hawkscan {

/// One scanning cluster: a named directed subgraph.
struct Cluster {
    std::string name;
    std::set<int> nodes;
    EdgeSet edges;
};

/// The scanning geometry: L clusters plus the deduplicated union of their
/// edges (the set the score engine tracks).
class ClusterSet {
public:
    ClusterSet() = default;

    explicit ClusterSet(std::vector<Cluster> clusters) : clusters_(std::move(clusters)) {
        if (clusters_.empty()) throw std::invalid_argument("ClusterSet: no clusters");
        std::vector<std::pair<int, int>> all;
        std::set<std::pair<int, int>> seen;
        for (const Cluster& c : clusters_) {
            if (c.edges.empty())
                throw std::invalid_argument("ClusterSet: cluster '" + c.name + "' has no edges");
            for (const auto& e : c.edges.edges()) {
                if (!c.nodes.count(e.first) || !c.nodes.count(e.second))
                    throw std::invalid_argument("ClusterSet: edge endpoint outside cluster '" +
                                                c.name + "'");
                if (seen.insert(e).second) all.push_back(e);
            }
        }
        union_edges_ = EdgeSet(std::move(all));
    }

    std::size_t size() const { return clusters_.size(); }
    const Cluster& operator[](std::size_t i) const { return clusters_[i]; }
    const std::vector<Cluster>& clusters() const { return clusters_; }
    const EdgeSet& union_edges() const { return union_edges_; }

    int max_node() const {
        int hi = union_edges_.max_node();
        for (const Cluster& c : clusters_)
            for (int n : c.nodes) hi = std::max(hi, n);
        return hi;
    }

private:
    std::vector<Cluster> clusters_;
    EdgeSet union_edges_;
};

} // namespace hawkscan
