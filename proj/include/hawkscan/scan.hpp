#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "hawkscan/clusters.hpp"
#include "hawkscan/fisher.hpp"
#include "hawkscan/score.hpp"

namespace hawkscan {

/// Monitoring schedule and stopping rule parameters.
struct MonitorConfig {
    double w = 200.0;       // window length
    double delta = 10.0;    // update interval; w must be an integer multiple
    double b = 3.0;         // alarm threshold (strict exceedance)
    bool two_sided = true;  // scan |Gamma| rather than signed Gamma

    void validate() const {
        if (!(delta > 0.0) || !(w > 0.0) || delta > w)
            throw config_error("MonitorConfig: need 0 < delta <= w");
        const double ratio = w / delta;
        if (std::fabs(ratio - std::llround(ratio)) > 1e-9)
            throw config_error("MonitorConfig: w must be an integer multiple of delta");
        if (!(b > 0.0)) throw config_error("MonitorConfig: threshold must be positive");
    }

    int w_over_delta() const { return static_cast<int>(std::llround(w / delta)); }
};

/// Per-cluster statistics at one update instant.
struct GammaSnapshot {
    double t = 0.0;
    Eigen::VectorXd per_cluster;
    double max_abs = 0.0;
};

struct DetectionResult {
    bool stopped = false;
    double stop_time = 0.0;
    std::vector<GammaSnapshot> trajectory;
    std::vector<int> flagged_clusters;
};

/// Symmetric inverse square root with an eigenvalue floor: eigenvalues below
/// eps * lambda_max are raised to the floor so degenerate clusters stay
/// usable (at the cost of bias, which callers should treat as such).
inline Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& m, double rel_floor = 1e-8) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw numeric_error("inverse_sqrt_psd: eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lambda_max = ev.maxCoeff();
    if (!(lambda_max > 0.0))
        throw numeric_error("inverse_sqrt_psd: matrix has no positive eigenvalue");
    const double floor = rel_floor * lambda_max;
    Eigen::VectorXd inv_sqrt(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -floor)
            throw numeric_error("inverse_sqrt_psd: negative eigenvalue " + std::to_string(ev[i]));
        inv_sqrt[i] = 1.0 / std::sqrt(std::max(ev[i], floor));
    }
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

/// Self-normalized cluster statistic: (w R)^{-1/2} 1^T I^{-1/2} s for the
/// cluster's window score s and per-unit-time information I.
inline double cluster_stat(const Eigen::VectorXd& score, const Eigen::MatrixXd& fisher,
                           double w) {
    if (fisher.rows() != score.size() || fisher.cols() != score.size())
        throw std::invalid_argument("cluster_stat: dimension mismatch");
    if (!(w > 0.0)) throw std::invalid_argument("cluster_stat: window must be positive");
    const Eigen::MatrixXd isqrt = inverse_sqrt_psd(fisher);
    const double r = static_cast<double>(score.size());
    return (isqrt * score).sum() / std::sqrt(w * r);
}

/// Precomputed monitoring weights: Gamma_i = coeff_i . window_score(union).
class ScanWeights {
public:
    ScanWeights(const ClusterSet& clusters, const FisherInfo& fisher, double w) {
        coeffs_.reserve(clusters.size());
        for (const Cluster& c : clusters.clusters()) {
            const Eigen::MatrixXd block = fisher.block(c.edges);
            const Eigen::MatrixXd isqrt = inverse_sqrt_psd(block);
            const Eigen::VectorXd v =
                isqrt.transpose() * Eigen::VectorXd::Ones(block.rows()) /
                std::sqrt(w * static_cast<double>(c.edges.size()));
            // map cluster coordinates onto union-edge coordinates
            std::vector<std::pair<int, double>> coeff;
            for (std::size_t i = 0; i < c.edges.size(); ++i) {
                const int idx = clusters.union_edges().find(c.edges[i].first, c.edges[i].second);
                coeff.emplace_back(idx, v[static_cast<Eigen::Index>(i)]);
            }
            coeffs_.push_back(std::move(coeff));
        }
    }

    Eigen::VectorXd gammas(const Eigen::VectorXd& union_window_score) const {
        Eigen::VectorXd g(static_cast<Eigen::Index>(coeffs_.size()));
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            double acc = 0.0;
            for (const auto& [idx, wgt] : coeffs_[i]) acc += wgt * union_window_score[idx];
            g[static_cast<Eigen::Index>(i)] = acc;
        }
        return g;
    }

private:
    std::vector<std::vector<std::pair<int, double>>> coeffs_;
};

/// Evaluate all cluster statistics at a checkpointed instant t >= w.
inline GammaSnapshot scan_snapshot(const ScoreState& state, const ClusterSet& clusters,
                                   const FisherInfo& fisher, const MonitorConfig& cfg, double t) {
    cfg.validate();
    const Eigen::VectorXd s = state.window_score(t, cfg.w, clusters.union_edges());
    ScanWeights weights(clusters, fisher, cfg.w);
    GammaSnapshot snap;
    snap.t = t;
    snap.per_cluster = weights.gammas(s);
    snap.max_abs = snap.per_cluster.cwiseAbs().maxCoeff();
    return snap;
}

/// Clusters whose statistic strictly exceeds the threshold (in absolute
/// value when two_sided).
inline std::vector<int> localize(const GammaSnapshot& snap, double b, bool two_sided = true) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < snap.per_cluster.size(); ++i) {
        const double g = snap.per_cluster[i];
        if ((two_sided ? std::fabs(g) : g) > b) out.push_back(static_cast<int>(i));
    }
    return out;
}

/// Single-pass monitor: checkpoints every delta, evaluates from t = w (the
/// first full window), stops at the first update whose scan statistic
/// strictly exceeds b. keep_trajectory=false retains only the last snapshot.
inline DetectionResult run_monitor(const EventStream& stream, const HawkesModel& model0,
                                   const ClusterSet& clusters, const FisherInfo& fisher,
                                   const MonitorConfig& cfg, bool keep_trajectory = true) {
    cfg.validate();
    model0.validate();
    clusters.union_edges().check_in_range(model0.num_nodes());

    ScoreState::Options opts;
    opts.checkpoint_interval = cfg.delta;
    opts.checkpoint_slots = cfg.w_over_delta() + 1;
    ScoreState state(model0, clusters.union_edges(), opts);
    state.checkpoint(0.0);
    ScanWeights weights(clusters, fisher, cfg.w);

    DetectionResult res;
    std::size_t next_event = 0;
    const auto n_events = stream.events.size();
    long step = 0;
    for (;;) {
        ++step;
        const double t = static_cast<double>(step) * cfg.delta;
        if (t > stream.horizon + 1e-12) break;
        while (next_event < n_events && stream.events[next_event].time < t)
            state.ingest_event(stream.events[next_event++]);
        state.checkpoint(t);
        if (t + 1e-12 < cfg.w) continue;

        GammaSnapshot snap;
        snap.t = t;
        snap.per_cluster = weights.gammas(state.window_score(t, cfg.w, clusters.union_edges()));
        snap.max_abs = snap.per_cluster.cwiseAbs().maxCoeff();
        const double stat = cfg.two_sided ? snap.max_abs : snap.per_cluster.maxCoeff();
        const bool alarm = stat > cfg.b;
        if (keep_trajectory || alarm)
            res.trajectory.push_back(snap);
        if (alarm) {
            res.stopped = true;
            res.stop_time = t;
            res.flagged_clusters = localize(res.trajectory.back(), cfg.b, cfg.two_sided);
            break;
        }
    }
    return res;
}

} // namespace hawkscan
