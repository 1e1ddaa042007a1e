#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "hawkscan/common.hpp"

namespace hawkscan {

/// Ordered set of directed node pairs (source, target). The ordering defines
/// the coordinates of score vectors and information matrices.
class EdgeSet {
public:
    EdgeSet() = default;

    explicit EdgeSet(std::vector<std::pair<int, int>> edges) : edges_(std::move(edges)) {
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const auto& e = edges_[i];
            if (e.first < 0 || e.second < 0)
                throw std::invalid_argument("EdgeSet: negative node index");
            if (!index_.emplace(e, i).second)
                throw std::invalid_argument("EdgeSet: duplicate edge");
        }
    }

    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::pair<int, int>& operator[](std::size_t i) const { return edges_[i]; }

    /// Index of (p, q), or -1 if untracked.
    int find(int p, int q) const {
        auto it = index_.find({p, q});
        return it == index_.end() ? -1 : static_cast<int>(it->second);
    }

    bool contains(int p, int q) const { return find(p, q) >= 0; }

    int max_node() const {
        int hi = -1;
        for (const auto& e : edges_) hi = std::max({hi, e.first, e.second});
        return hi;
    }

    void check_in_range(int num_nodes) const {
        if (max_node() >= num_nodes)
            throw std::invalid_argument("EdgeSet: node index out of range");
    }

private:
    std::vector<std::pair<int, int>> edges_;
    std::map<std::pair<int, int>, std::size_t> index_;
};

} // namespace hawkscan
