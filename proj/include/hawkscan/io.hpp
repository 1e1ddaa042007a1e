#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkscan/calibration.hpp"
#include "hawkscan/clusters.hpp"
#include "hawkscan/fisher.hpp"
#include "hawkscan/model.hpp"
#include "hawkscan/scan.hpp"

namespace hawkscan {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Event CSV: header "time,node"; strictly increasing decimal times, 0-based
// node ids. Exact ties on ingestion are perturbed forward by 1e-9 time units.

inline void write_events_csv(std::ostream& os, const EventStream& stream) {
    os << "time,node\n";
    for (const Event& e : stream.events) os << format_double(e.time) << ',' << e.node << '\n';
}

inline void write_events_csv(const std::string& path, const EventStream& stream) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    write_events_csv(os, stream);
}

inline EventStream read_events_csv(std::istream& is, double horizon = -1.0) {
    EventStream stream;
    std::string line;
    long line_no = 0;
    if (!std::getline(is, line)) throw config_error("event file: empty");
    ++line_no;
    if (line != "time,node" && line != "time,node\r")
        throw config_error("event file line 1: expected header 'time,node'");
    double prev_raw = -1.0;
    double prev_assigned = -1.0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw config_error("event file line " + std::to_string(line_no) + ": missing comma");
        Event e;
        try {
            e.time = std::stod(line.substr(0, comma));
            e.node = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw config_error("event file line " + std::to_string(line_no) + ": parse error");
        }
        if (e.node < 0)
            throw config_error("event file line " + std::to_string(line_no) + ": negative node");
        if (e.time < prev_raw)
            throw config_error("event file line " + std::to_string(line_no) +
                               ": times must be nondecreasing");
        prev_raw = e.time;
        // exact ties advance by 1e-9 each, deterministically
        if (e.time <= prev_assigned) e.time = prev_assigned + 1e-9;
        prev_assigned = e.time;
        stream.events.push_back(e);
    }
    stream.horizon = horizon >= 0.0 ? horizon : (stream.events.empty() ? 0.0 : prev_assigned);
    if (!stream.events.empty() && stream.events.back().time > stream.horizon)
        throw config_error("event file: events beyond the requested horizon");
    return stream;
}

inline EventStream read_events_csv_file(const std::string& path, double horizon = -1.0) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open: " + path);
    return read_events_csv(is, horizon);
}

// ---------------------------------------------------------------------------
// Model file: JSON object with keys mu (array), beta (scalar), A (row-major
// array of arrays).

inline nlohmann::json model_to_json(const HawkesModel& m) {
    nlohmann::json j;
    j["mu"] = std::vector<double>(m.mu.data(), m.mu.data() + m.mu.size());
    j["beta"] = m.beta;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.A.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.A.cols(); ++k) row.push_back(m.A(i, k));
        rows.push_back(std::move(row));
    }
    j["A"] = std::move(rows);
    return j;
}

inline HawkesModel model_from_json(const nlohmann::json& j) {
    HawkesModel m;
    try {
        const auto mu = j.at("mu").get<std::vector<double>>();
        m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
        m.beta = j.at("beta").get<double>();
        const auto& rows = j.at("A");
        m.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(mu.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto row = rows[i].get<std::vector<double>>();
            if (row.size() != mu.size()) throw config_error("model: ragged A");
            for (std::size_t k = 0; k < row.size(); ++k)
                m.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("model file: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Cluster file: JSON array of {name, nodes, edges:[[p,q],...]}.

inline nlohmann::json clusters_to_json(const ClusterSet& cs) {
    auto arr = nlohmann::json::array();
    for (const Cluster& c : cs.clusters()) {
        nlohmann::json j;
        j["name"] = c.name;
        j["nodes"] = c.nodes;
        auto edges = nlohmann::json::array();
        for (const auto& [p, q] : c.edges.edges()) edges.push_back({p, q});
        j["edges"] = std::move(edges);
        arr.push_back(std::move(j));
    }
    return arr;
}

inline ClusterSet clusters_from_json(const nlohmann::json& arr) {
    std::vector<Cluster> cs;
    try {
        for (const auto& j : arr) {
            Cluster c;
            c.name = j.at("name").get<std::string>();
            for (int n : j.at("nodes")) c.nodes.insert(n);
            std::vector<std::pair<int, int>> edges;
            for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0), e.at(1));
            c.edges = EdgeSet(std::move(edges));
            cs.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("cluster file: ") + e.what());
    }
    return ClusterSet(std::move(cs));
}

// ---------------------------------------------------------------------------
// Information matrix file: edge list + row-major matrix.

inline nlohmann::json fisher_to_json(const FisherInfo& info) {
    nlohmann::json j;
    auto edges = nlohmann::json::array();
    for (const auto& [p, q] : info.edges.edges()) edges.push_back({p, q});
    j["edges"] = std::move(edges);
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < info.matrix.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < info.matrix.cols(); ++k) row.push_back(info.matrix(i, k));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    return j;
}

inline FisherInfo fisher_from_json(const nlohmann::json& j) {
    try {
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0), e.at(1));
        FisherInfo info;
        info.edges = EdgeSet(std::move(edges));
        const auto& rows = j.at("matrix");
        const auto r = static_cast<Eigen::Index>(rows.size());
        info.matrix.resize(r, r);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index k = 0; k < r; ++k)
                info.matrix(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        return info;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("fisher file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open: " + path);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    os << j.dump(2) << '\n';
}

/// Trajectory CSV: t, one column per cluster statistic, then the scan value.
inline void write_trajectory_csv(std::ostream& os, const std::vector<GammaSnapshot>& traj,
                                 std::size_t num_clusters) {
    os << 't';
    for (std::size_t i = 1; i <= num_clusters; ++i) os << ",gamma_" << i;
    os << ",max_abs\n";
    for (const GammaSnapshot& s : traj) {
        os << format_double(s.t);
        for (Eigen::Index i = 0; i < s.per_cluster.size(); ++i)
            os << ',' << format_double(s.per_cluster[i]);
        os << ',' << format_double(s.max_abs) << '\n';
    }
}

inline void write_trajectory_csv(const std::string& path, const std::vector<GammaSnapshot>& traj,
                                 std::size_t num_clusters) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    write_trajectory_csv(os, traj, num_clusters);
}

/// Calibration report: the surrogate correlation, thresholds and estimates.
inline nlohmann::json calibration_report(const CalibrationModel& cal, double b,
                                         const nlohmann::json& targets,
                                         const nlohmann::json& estimates,
                                         const nlohmann::json& sampler) {
    nlohmann::json j;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cal.sigma.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < cal.sigma.cols(); ++k) row.push_back(cal.sigma(i, k));
        rows.push_back(std::move(row));
    }
    j["sigma"] = std::move(rows);
    j["w_over_delta"] = cal.w_over_delta;
    j["two_sided"] = cal.two_sided;
    j["b"] = b;
    j["targets"] = targets;
    j["estimates"] = estimates;
    j["sampler"] = sampler;
    return j;
}

} // namespace hawkscan
