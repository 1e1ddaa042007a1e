#pragma once

#include <string>
#include <vector>

#include "hawkscan/clusters.hpp"
#include "hawkscan/model.hpp"

namespace hawkscan {

struct Fixture {
    HawkesModel model; // null model: unit base rates, zero influence, beta = 1
    ClusterSet clusters;
};

namespace detail {

inline Cluster star_cluster(std::string name, int center, std::vector<int> spokes) {
    Cluster c;
    c.name = std::move(name);
    c.nodes.insert(center);
    std::vector<std::pair<int, int>> edges;
    for (int s : spokes) {
        c.nodes.insert(s);
        edges.emplace_back(center, s);
    }
    c.edges = EdgeSet(std::move(edges));
    return c;
}

} // namespace detail

/// 12-node benchmark network: four overlapping 5-node clusters, each scanned
/// on the 4 edges from its center outward. Node ids are 0-based.
inline Fixture fixture_fig1() {
    Fixture f;
    f.model.mu = Eigen::VectorXd::Ones(12);
    f.model.A = Eigen::MatrixXd::Zero(12, 12);
    f.model.beta = 1.0;
    std::vector<Cluster> cs;
    cs.push_back(detail::star_cluster("c1", 3, {0, 2, 4, 7}));
    cs.push_back(detail::star_cluster("c2", 4, {1, 3, 5, 8}));
    cs.push_back(detail::star_cluster("c3", 7, {3, 6, 8, 10}));
    cs.push_back(detail::star_cluster("c4", 8, {4, 7, 9, 11}));
    f.clusters = ClusterSet(std::move(cs));
    return f;
}

/// Chain of 20 star clusters: adjacent clusters share one spoke node, so each
/// cluster has edges from its center to a left junction, a right junction and
/// two private spokes. 81 nodes total.
inline Fixture fixture_line20() {
    const int num_clusters = 20;
    // junctions 0..20, centers 21..40, private spokes 41..80
    auto junction = [](int i) { return i; };
    auto center = [&](int i) { return num_clusters + 1 + i; };
    auto priv = [&](int i, int which) { return 2 * num_clusters + 1 + 2 * i + which; };

    std::vector<Cluster> cs;
    for (int i = 0; i < num_clusters; ++i)
        cs.push_back(detail::star_cluster("c" + std::to_string(i + 1), center(i),
                                          {junction(i), junction(i + 1), priv(i, 0), priv(i, 1)}));
    Fixture f;
    const int n = 4 * num_clusters + 1;
    f.model.mu = Eigen::VectorXd::Ones(n);
    f.model.A = Eigen::MatrixXd::Zero(n, n);
    f.model.beta = 1.0;
    f.clusters = ClusterSet(std::move(cs));
    return f;
}

inline Fixture fixture(const std::string& name) {
    if (name == "fig1") return fixture_fig1();
    if (name == "line20") return fixture_line20();
    throw config_error("unknown fixture '" + name + "' (expected fig1 or line20)");
}

/// Post-change influence matrices for the benchmark cases on the fig1
/// network (0-based node ids: centers 3,4,7,8).
inline HawkesModel fig1_case(const std::string& name) {
    HawkesModel m = fixture_fig1().model;
    auto set = [&m](int p, int q, double a) { m.A(p, q) = a; };
    if (name == "i") {
        set(3, 0, 0.2); set(3, 2, 0.2); set(3, 4, 0.2); set(3, 7, 0.2);
    } else if (name == "ii") {
        set(3, 0, 0.5); set(3, 2, 0.5); set(3, 4, 0.5); set(3, 7, 0.5);
    } else if (name == "iii") {
        set(3, 0, 0.6); set(3, 2, 0.4); set(3, 4, 0.5); set(3, 7, 0.5);
    } else if (name == "iv") {
        set(3, 0, 0.5); set(3, 2, 0.5); set(8, 4, 0.5); set(8, 7, 0.5);
    } else if (name == "v") {
        set(3, 4, 0.5); set(3, 7, 0.5); set(8, 7, 0.5); set(8, 4, 0.5);
    } else if (name == "vi") {
        set(3, 4, 0.5); set(3, 7, 0.5);
    } else if (name == "vii") {
        set(3, 4, 0.5);
    } else {
        throw config_error("unknown change case '" + name + "' (expected i..vii)");
    }
    return m;
}

/// Post-change model for the line20 network: cross-excitation 0.2 from one
/// cluster's center to its four spokes.
inline HawkesModel line20_change(int cluster_index = 9, double alpha = 0.2) {
    Fixture f = fixture_line20();
    if (cluster_index < 0 || cluster_index >= static_cast<int>(f.clusters.size()))
        throw config_error("line20_change: cluster index out of range");
    HawkesModel m = f.model;
    const Cluster& c = f.clusters[static_cast<std::size_t>(cluster_index)];
    for (const auto& [p, q] : c.edges.edges()) m.A(p, q) = alpha;
    return m;
}

} // namespace hawkscan
