#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "hawkscan/edges.hpp"
#include "hawkscan/model.hpp"

namespace hawkscan {

/// Streaming accumulator for the per-edge score of the log-likelihood in the
/// influence entries, evaluated at a fixed reference model. For edge (p, q)
/// the cumulative score at time T is
///
///   sum over events k at q of R_p(t_k) / lambda_q(t_k)
///   + (1/beta) * sum over events k at p of (e^{-beta(T - t_k)} - 1),
///
/// where R_p(t) is the decayed count of p-events before t. The jump part is
/// accumulated event by event; the compensator part is materialized lazily at
/// read time from the decayed counts. Optionally accumulates the plug-in
/// information-matrix sums (products of decayed counts over the squared
/// intensity, for edge pairs sharing a target).
class ScoreState {
public:
    struct Options {
        double checkpoint_interval = 0.0; // 0 disables checkpointing
        int checkpoint_slots = 0;         // ring capacity; 0 = unbounded growth
        bool accumulate_fisher = false;
        double intensity_floor = 1e-12;
    };

    ScoreState(HawkesModel model0, EdgeSet tracked) : ScoreState(std::move(model0), std::move(tracked), Options()) {}

    ScoreState(HawkesModel model0, EdgeSet tracked, Options opts)
        : model_(std::move(model0)),
          edges_(std::move(tracked)),
          opts_(opts),
          poisson_(model_.is_poisson()),
          decayed_(Eigen::VectorXd::Zero(model_.num_nodes())),
          count_(Eigen::VectorXd::Zero(model_.num_nodes())),
          jump_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges_.size()))) {
        model_.validate();
        edges_.check_in_range(model_.num_nodes());
        const int m = model_.num_nodes();
        in_edges_.assign(static_cast<std::size_t>(m), {});
        for (std::size_t i = 0; i < edges_.size(); ++i)
            in_edges_[static_cast<std::size_t>(edges_[i].second)].push_back(static_cast<int>(i));
        if (opts_.accumulate_fisher)
            fisher_.setZero(static_cast<Eigen::Index>(edges_.size()),
                            static_cast<Eigen::Index>(edges_.size()));
    }

    const EdgeSet& tracked() const { return edges_; }
    const HawkesModel& model() const { return model_; }
    double last_time() const { return last_; }
    std::int64_t floor_hits() const { return floor_hits_; }

    /// Advance the recursion by one event. Times must be nondecreasing.
    void ingest_event(const Event& e) {
        if (e.time < last_)
            throw std::invalid_argument("ScoreState: event time regression");
        if (e.node < 0 || e.node >= model_.num_nodes())
            throw std::invalid_argument("ScoreState: node out of range");
        if (e.time > last_) {
            decayed_ *= std::exp(-model_.beta * (e.time - last_));
            last_ = e.time;
        }
        const auto& hits = in_edges_[static_cast<std::size_t>(e.node)];
        if (!hits.empty()) {
            double lambda = model_.mu[e.node];
            if (!poisson_) lambda += model_.A.col(e.node).dot(decayed_);
            if (lambda < opts_.intensity_floor) {
                lambda = opts_.intensity_floor;
                ++floor_hits_;
            }
            for (int idx : hits)
                jump_[idx] += decayed_[edges_[static_cast<std::size_t>(idx)].first] / lambda;
            if (opts_.accumulate_fisher) {
                const double inv_sq = 1.0 / (lambda * lambda);
                for (int a : hits)
                    for (int b : hits)
                        fisher_(a, b) += decayed_[edges_[static_cast<std::size_t>(a)].first] *
                                         decayed_[edges_[static_cast<std::size_t>(b)].first] * inv_sq;
            }
        }
        decayed_[e.node] += 1.0;
        count_[e.node] += 1.0;
    }

    /// Cumulative score vector at time t >= last ingested event time.
    Eigen::VectorXd cumulative_score(double t) const {
        if (t < last_) throw std::invalid_argument("ScoreState: read before last event");
        const double decay = std::exp(-model_.beta * (t - last_));
        Eigen::VectorXd s = jump_;
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const int p = edges_[i].first;
            s[static_cast<Eigen::Index>(i)] += (decayed_[p] * decay - count_[p]) / model_.beta;
        }
        return s;
    }

    /// Plug-in information sums up to the last event (divide by the horizon
    /// for the per-unit-time matrix).
    const Eigen::MatrixXd& fisher_accumulator() const {
        if (!opts_.accumulate_fisher)
            throw std::logic_error("ScoreState: fisher accumulation disabled");
        return fisher_;
    }

    /// Record a checkpoint snapshot of the cumulative score at time t.
    /// Checkpoints must land on multiples of the configured interval.
    void checkpoint(double t) {
        const std::int64_t idx = checkpoint_index(t);
        if (idx < 0)
            throw config_error("ScoreState: checkpoint time off the configured grid");
        checkpoints_.push_back({idx, cumulative_score(t)});
        if (opts_.checkpoint_slots > 0 &&
            checkpoints_.size() > static_cast<std::size_t>(opts_.checkpoint_slots))
            checkpoints_.erase(checkpoints_.begin());
    }

    /// Difference of cumulative scores S(t) - S(t-w), restricted to `edges`
    /// coordinates. Both instants must be retained checkpoints.
    Eigen::VectorXd window_score(double t, double w, const EdgeSet& edges) const {
        if (t < w) throw config_error("window_score: t < w");
        const Eigen::VectorXd* hi = find_checkpoint(t);
        const Eigen::VectorXd* lo = find_checkpoint(t - w);
        if (hi == nullptr || lo == nullptr)
            throw config_error("window_score: missing checkpoint (window/interval mismatch)");
        Eigen::VectorXd out(static_cast<Eigen::Index>(edges.size()));
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const int idx = edges_.find(edges[i].first, edges[i].second);
            if (idx < 0)
                throw config_error("window_score: edge not tracked");
            out[static_cast<Eigen::Index>(i)] = (*hi)[idx] - (*lo)[idx];
        }
        return out;
    }

private:
    std::int64_t checkpoint_index(double t) const {
        if (opts_.checkpoint_interval <= 0.0) return -1;
        const double ratio = t / opts_.checkpoint_interval;
        const auto idx = static_cast<std::int64_t>(std::llround(ratio));
        if (std::fabs(ratio - static_cast<double>(idx)) > 1e-9 * std::max(1.0, std::fabs(ratio)))
            return -1;
        return idx;
    }

    const Eigen::VectorXd* find_checkpoint(double t) const {
        const std::int64_t idx = checkpoint_index(t);
        for (auto it = checkpoints_.rbegin(); it != checkpoints_.rend(); ++it)
            if (it->first == idx) return &it->second;
        return nullptr;
    }

    HawkesModel model_;
    EdgeSet edges_;
    Options opts_;
    bool poisson_;
    double last_ = 0.0;
    Eigen::VectorXd decayed_;
    Eigen::VectorXd count_;
    Eigen::VectorXd jump_;
    Eigen::MatrixXd fisher_;
    std::vector<std::vector<int>> in_edges_;
    std::vector<std::pair<std::int64_t, Eigen::VectorXd>> checkpoints_;
    std::int64_t floor_hits_ = 0;
};

} // namespace hawkscan
