#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hawkscan/edges.hpp"
#include "hawkscan/model.hpp"
#include "hawkscan/score.hpp"

namespace hawkscan {

/// Per-unit-time asymptotic covariance of the normalized cumulative score
/// over a fixed edge set. Block-diagonal across target nodes.
struct FisherInfo {
    EdgeSet edges;
    Eigen::MatrixXd matrix;
    bool degenerate = false; // set when estimated from an empty stream

    /// Symmetric sub-block for a subset of the edges.
    Eigen::MatrixXd block(const EdgeSet& subset) const {
        const auto r = static_cast<Eigen::Index>(subset.size());
        Eigen::MatrixXd out(r, r);
        std::vector<int> idx(subset.size());
        for (std::size_t i = 0; i < subset.size(); ++i) {
            const int j = edges.find(subset[i].first, subset[i].second);
            if (j < 0) throw config_error("FisherInfo: edge (" + std::to_string(subset[i].first) +
                                          "," + std::to_string(subset[i].second) + ") not covered");
            idx[i] = j;
        }
        for (Eigen::Index a = 0; a < r; ++a)
            for (Eigen::Index b = 0; b < r; ++b)
                out(a, b) = matrix(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        return out;
    }

    /// Cross block between two edge subsets.
    Eigen::MatrixXd cross_block(const EdgeSet& rows, const EdgeSet& cols) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(cols.size()));
        for (std::size_t a = 0; a < rows.size(); ++a) {
            const int ia = edges.find(rows[a].first, rows[a].second);
            if (ia < 0) throw config_error("FisherInfo: edge not covered");
            for (std::size_t b = 0; b < cols.size(); ++b) {
                const int ib = edges.find(cols[b].first, cols[b].second);
                if (ib < 0) throw config_error("FisherInfo: edge not covered");
                out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = matrix(ia, ib);
            }
        }
        return out;
    }
};

/// Closed-form information matrix when the reference influence matrix is
/// zero. For edges (i,q) and (p,q) sharing target q the entry is the
/// stationary moment E[R_i R_p] / mu_q:
///   diagonal (p == i):  (mu_p / mu_q) (1/(2 beta) + mu_p / beta^2)
///   off-diagonal:        mu_i mu_p / (mu_q beta^2)
/// Entries across distinct targets are exactly zero.
inline FisherInfo fisher_closed_form(const HawkesModel& model0, const EdgeSet& edges) {
    model0.validate();
    edges.check_in_range(model0.num_nodes());
    if (!model0.is_poisson())
        throw std::invalid_argument("fisher_closed_form: requires a zero influence matrix");
    const double beta = model0.beta;
    const auto r = static_cast<Eigen::Index>(edges.size());
    FisherInfo info{edges, Eigen::MatrixXd::Zero(r, r)};
    for (Eigen::Index a = 0; a < r; ++a) {
        const auto [i, q] = edges[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < r; ++b) {
            const auto [p, q2] = edges[static_cast<std::size_t>(b)];
            if (q2 != q) continue;
            const double mi = model0.mu[i], mp = model0.mu[p], mq = model0.mu[q];
            info.matrix(a, b) = (i == p)
                                    ? (mp / mq) * (0.5 / beta + mp / (beta * beta))
                                    : mi * mp / (mq * beta * beta);
        }
    }
    return info;
}

/// Plug-in estimate of the per-unit-time information matrix from observed
/// data: accumulated products of decayed source counts over the squared
/// intensity at the reference model, divided by the horizon.
inline FisherInfo fisher_estimate(const EventStream& stream, const HawkesModel& model,
                                  const EdgeSet& edges) {
    model.validate();
    stream.validate(model.num_nodes());
    const auto r = static_cast<Eigen::Index>(edges.size());
    if (stream.events.empty() || !(stream.horizon > 0.0)) {
        FisherInfo info{edges, Eigen::MatrixXd::Zero(r, r)};
        info.degenerate = true;
        return info;
    }
    ScoreState::Options opts;
    opts.accumulate_fisher = true;
    ScoreState state(model, edges, opts);
    for (const Event& e : stream.events) state.ingest_event(e);
    return FisherInfo{edges, state.fisher_accumulator() / stream.horizon};
}

} // namespace hawkscan
